"""Acceptance criteria, one test per criterion.

Run standalone with ``python tests/test_acceptance.py``; a PASS/FAIL line per
criterion is printed in the terminal summary.
"""

import math
import os
import subprocess
import sys
from pathlib import Path

import mpmath
import numpy as np
import pytest

from stablab.algebra import cyclic_algebra, matrix_algebra, symmetric_group_algebra
from stablab.defects import (
    BilinearMap,
    adef,
    associator,
    delta2,
    derivative_apply,
    identity_op,
    linear_op,
    mdef,
    multilinear_norm,
    multiplication_map,
    remainder,
    tensor_norm,
    vee,
)
from stablab.lab.config import ExperimentConfig
from stablab.lab.generators import gen_perturbed_hom, gen_perturbed_product, group_hom
from stablab.newton import (
    Instance,
    IterationConfig,
    Outcome,
    constants,
    delta_threshold,
    improve,
    stabilize,
    verify_bounds,
)
from stablab.tensor import (
    act_left,
    act_right,
    group_diagonal,
    matrix_diagonal,
    to_coeffs,
)

pytestmark = pytest.mark.acceptance

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = ROOT / "configs"
TOL = 1e-10
Z = {k: cyclic_algebra(k) for k in (2, 3, 4, 6)}
S3 = symmetric_group_algebra(3)


def rand_T(A, B, rng):
    return linear_op(rng.uniform(-1, 1, (B.dim, A.dim)), A, B)


def rand_psi(B, rng):
    return BilinearMap(rng.uniform(-1, 1, (B.dim,) * 3), (B, B), B)


def unital_instance(seed):
    """A seeded unital instance: perturbed product and perturbed homomorphism."""
    rng = np.random.default_rng(seed)
    kind = seed % 5
    eps_psi = 10 ** rng.uniform(-7, -1)
    eps_t = 10 ** rng.uniform(-4, -1)
    if kind == 4:
        A, B = Z[2], Z[4]
        base = group_hom(A, B, [0, 2])
    else:
        A = B = [Z[2], Z[3], Z[6], S3][kind]
        base = identity_op(A)
    psi = gen_perturbed_product(B, eps_psi, seed=seed)
    T = gen_perturbed_hom(A, B, base, eps_t, seed=seed + 10_000)
    return Instance(group_diagonal(A), psi, T)


# ---------------------------------------------------------------------------


def test_c01_diagonal_exactness(criterion):
    with criterion(1, "diagonal exactness") as c:
        worst = 0.0
        for A in (Z[2], Z[6], S3):
            d = group_diagonal(A)
            assert d.residual_unit <= 1e-14 and d.residual_commute <= 1e-14
            assert d.M == pytest.approx(1.0, abs=1e-14)
            worst = max(worst, d.residual_unit, d.residual_commute)
        M2 = matrix_algebra(2)
        d = matrix_diagonal(M2)
        assert d.residual_unit <= 1e-14 and d.residual_commute <= 1e-14
        # independent check of the commutation residual on basis elements
        for i in range(M2.dim):
            e = M2.basis(i)
            assert np.max(np.abs(to_coeffs(act_left(M2, e, d.rep)) - to_coeffs(act_right(M2, d.rep, e)))) <= 1e-14
        c.detail = f"max residual {max(worst, d.residual_unit, d.residual_commute):.1e}"


def _sample_sup(tensor, norms, out_norm, rng, n=100_000):
    xs = [nm.random_unit(rng, n) for nm in norms]
    subs = "abc"[: len(norms)]
    out = np.einsum("z" + subs + "," + ",".join("r" + s for s in subs) + "->rz", tensor, *xs)
    return float(np.max(out_norm(out)))


def test_c02_defect_oracle_agreement(criterion):
    with criterion(2, "defect oracle agreement") as c:
        hits = 0
        for i in range(50):
            rng = np.random.default_rng(1000 + i)
            A = Z[[2, 3, 4][i % 3]]
            T = rand_T(A, A, rng)
            psi = BilinearMap(multiplication_map(A).tensor + 0.3 * rng.uniform(-1, 1, (A.dim,) * 3), (A, A), A)
            v, a = vee(T, psi).tensor, associator(psi).tensor
            n2, n3 = (A.norm,) * 2, (A.norm,) * 3
            m_ex, a_ex = mdef(T, psi), adef(psi)
            assert m_ex.exact and a_ex.exact
            assert m_ex.value >= _sample_sup(v, n2, A.norm, rng) * (1 - 1e-12)
            assert a_ex.value >= _sample_sup(a, n3, A.norm, rng) * (1 - 1e-12)
            m_est = tensor_norm(v, n2, A.norm, exact=False, seed=i).value
            a_est = tensor_norm(a, n3, A.norm, exact=False, seed=i).value
            assert m_est <= m_ex.value * (1 + 1e-12) and a_est <= a_ex.value * (1 + 1e-12)
            hits += m_est >= 0.999 * m_ex.value and a_est >= 0.999 * a_ex.value
        assert hits >= 0.95 * 50
        c.detail = f"estimator within 0.999 on {hits}/50"


def test_c03_almost_ker(criterion):
    with criterion(3, "almost-kernel bound") as c:
        worst = math.inf
        for i in range(100):
            rng = np.random.default_rng(2000 + i)
            A = Z[[2, 3, 6][i % 3]]
            T, psi = rand_T(A, A, rng), rand_psi(A, rng)
            d = delta2(T, psi, vee(T, psi))
            margin = adef(psi).value * multilinear_norm(T).value ** 3 - multilinear_norm(d).value
            worst = min(worst, margin)
            assert margin >= -TOL
            for _ in range(10):
                x, y, z = A.norm.random_unit(rng, 3)
                Tx, Ty, Tz = T(x), T(y), T(z)
                np.testing.assert_allclose(d(x, y, z), psi(psi(Tx, Ty), Tz) - psi(Tx, psi(Ty, Tz)), rtol=0, atol=1e-12)
        c.detail = f"min margin {worst:.3e}"


def test_c04_derivative_remainder(criterion):
    with criterion(4, "derivative remainder") as c:
        worst = math.inf
        for i in range(100):
            rng = np.random.default_rng(3000 + i)
            A = Z[[2, 3, 6][i % 3]]
            T, psi, H = rand_T(A, A, rng), rand_psi(A, rng), rand_T(A, A, rng)
            rem = vee(T + H, psi) - vee(T, psi) - derivative_apply(T, psi, H)
            margin = multilinear_norm(psi).value * multilinear_norm(H).value ** 2 - multilinear_norm(rem).value
            worst = min(worst, margin)
            assert margin >= -TOL
            r = remainder(psi, H)
            x, y = A.norm.random_unit(rng, 2)
            np.testing.assert_allclose(r(x, y), psi(H(x), H(y)), rtol=0, atol=1e-14)
            # with dyadic data every product and sum is exact, so equality is bitwise
            qpsi = BilinearMap(rng.integers(-8, 9, psi.tensor.shape) / 8, (A, A), A)
            qH = linear_op(rng.integers(-8, 9, H.tensor.shape) / 8, A, A)
            qx, qy = rng.integers(-8, 9, A.dim) / 8, rng.integers(-8, 9, A.dim) / 8
            np.testing.assert_array_equal(remainder(qpsi, qH)(qx, qy), qpsi(qH(qx), qH(qy)))
        c.detail = f"min margin {worst:.3e}"


_BOUNDS = {}


def _bounds():
    if not _BOUNDS:
        for i in range(100):
            inst = unital_instance(i)
            _BOUNDS[i] = {b.name: b for b in verify_bounds(inst, seed=i)}
    return _BOUNDS


def test_c05_right_inverse_bounds(criterion):
    with criterion(5, "right-inverse and corrected-defect bounds") as c:
        worst = math.inf
        for checks in _bounds().values():
            for name in ("right_inverse", "corrected_defect", "correction_size"):
                b = checks[name]
                assert b.hypothesis_ok and b.exact
                assert b.margin >= -TOL, b
                worst = min(worst, b.margin)
        c.detail = f"min margin {worst:.3e}"


def test_c06_new_defect(criterion):
    with criterion(6, "new-defect bound") as c:
        assert constants(1, 1, 1) == (3, 1, 1)
        worst = math.inf
        for checks in _bounds().values():
            b = checks["new_defect"]
            assert b.hypothesis_ok and b.exact
            assert b.margin >= -TOL, b
            worst = min(worst, b.margin)
        c.detail = f"min margin {worst:.3e}"


def test_c07_associative_convergence(criterion):
    with criterion(7, "associative convergence") as c:
        exp = ExperimentConfig.load(CONFIGS / "default.json").build()
        inst = exp.instance
        assert inst.adef().value == 0.0
        assert multilinear_norm(inst.T - identity_op(inst.A)).value == pytest.approx(1e-3, rel=1e-12)
        tr = stabilize(inst, exp.iteration)
        assert tr.outcome is Outcome.EXACT
        assert tr.final_mdef <= 1e-13 and len(tr.steps) - 1 <= 8
        for s, nxt in zip(tr.steps, tr.steps[1:]):
            c1 = constants(inst.psi_norm.value, s.op_norm, inst.M)[0]
            assert nxt.mdef <= c1 * s.mdef**2 + 1e-12
        sv = 0.01
        Z2 = Z[2]
        T = linear_op(np.diag([1.0, 1.0 + sv]), Z2, Z2)
        FT = improve(Instance(group_diagonal(Z2), multiplication_map(Z2), T))
        closed = (1 + sv) * (1 - sv * (2 + sv) / 2)
        assert abs(FT(Z2.basis(1))[1] - closed) <= 1e-15
        assert abs(FT(Z2.basis(1))[1] - 0.9998495) <= 1e-15
        assert FT(Z2.basis(1))[0] == 0.0
        c.detail = f"{len(tr.steps) - 1} steps, final mdef {tr.final_mdef:.1e}"


def test_c08_nonassociative_endgame(criterion):
    with criterion(8, "endgame, non-associative branch") as c:
        # a 2-dimensional unital product is associative, so the perturbed product lives on Z_4
        exp = ExperimentConfig.load(CONFIGS / "z2_into_z4_nonassoc.json").build()
        inst = exp.instance
        assert inst.A.dim == 2 and inst.psi_unital and inst.T_unital
        m0, alpha, theta = inst.mdef().value, inst.adef().value, exp.iteration.resolved_theta()
        assert theta == 0.5
        assert m0 == pytest.approx(2e-2, rel=0.01)
        assert 1e-7 < alpha < 1e-5
        assert alpha <= m0 ** (1 + theta)
        tr = stabilize(inst, exp.iteration)
        assert tr.outcome is Outcome.TERMINATED
        assert tr.final_mdef < alpha ** (1 / (1 + theta))

        # hypotheses hold: mdef_0 <= delta
        A, B = Z[2], Z[4]
        psi = gen_perturbed_product(B, 1e-10, seed=0)
        T = gen_perturbed_hom(A, B, group_hom(A, B, [0, 2]), 5e-5,
                              direction=[[0, 0], [0, 0], [0, 1], [0, 0]])
        cfg = IterationConfig(epsilon=0.9, theta=0.99)
        tr2 = stabilize(Instance(group_diagonal(A), psi, T), cfg)
        assert tr2.hypothesis_satisfied and tr2.steps[0].mdef <= tr2.delta
        assert tr2.outcome is Outcome.TERMINATED
        assert tr2.final_mdef < tr2.alpha_power_bound
        assert tr2.distance_to_start < cfg.epsilon
        c.detail = f"N={tr.N}, mdef_N {tr.final_mdef:.2e} < {alpha ** (1 / (1 + theta)):.2e}"


def test_c09_exact_endgame(criterion):
    with criterion(9, "endgame, exact branch") as c:
        Z6 = Z[6]
        T = gen_perturbed_hom(Z6, Z6, identity_op(Z6), 1e-5, seed=7)
        cfg = IterationConfig(epsilon=0.9, theta=0.99)
        tr = stabilize(Instance(group_diagonal(Z6), multiplication_map(Z6), T), cfg)
        assert tr.hypothesis_satisfied
        assert tr.outcome is Outcome.EXACT
        bound = 2 * tr.delta * math.exp(2 * tr.L * tr.M) * tr.K * tr.L * tr.M
        assert tr.endgame_bound == pytest.approx(bound, rel=1e-15)
        assert tr.distance_to_start <= bound < cfg.epsilon
        c.detail = f"||S - T0|| = {tr.distance_to_start:.2e} <= {bound:.2e}"


def test_c10_delta_formula(criterion):
    with criterion(10, "delta formula") as c:
        mpmath.mp.dps = 60
        for eps in (1e-3, 0.25, 0.5, 0.9):
            closed = eps * (2 * (2 + 2 * math.e**4 + math.e**8)) ** -2
            e = mpmath.e
            ref = mpmath.mpf(eps) * (2 * (2 + 2 * e**4 + e**8)) ** -2
            got = delta_threshold(1, 1, 1, 0.5, eps)
            assert abs(got - closed) <= 1e-12 * closed
            assert abs(mpmath.mpf(got) - ref) <= 1e-12 * ref
        c.detail = f"delta(1,1,1,0.5,0.5) = {delta_threshold(1, 1, 1, 0.5, 0.5)!r}"


def _cli(args, threads, tmp):
    env = dict(os.environ, STABLAB_THREADS=str(threads))
    src = str(ROOT / "src")
    env["PYTHONPATH"] = src + os.pathsep + env.get("PYTHONPATH", "")
    subprocess.run([sys.executable, "-m", "stablab", *args], check=True, env=env, cwd=tmp,
                   stdout=subprocess.DEVNULL)


def test_c11_determinism(criterion, tmp_path):
    with criterion(11, "determinism") as c:
        cfg = str(CONFIGS / "default_nonassoc.json")
        outputs = {}
        for run, threads in enumerate((1, 8, 1, 8)):
            st, sw = tmp_path / f"trace{run}.jsonl", tmp_path / f"sweep{run}.csv"
            _cli(["stabilize", "--config", cfg, "--out", str(st)], threads, tmp_path)
            _cli(["sweep", "--config", cfg, "--vary", "epsilon_t", "--grid", "1e-4,1e-3,1e-2",
                  "--out", str(sw)], threads, tmp_path)
            outputs[run] = (st.read_bytes(), sw.read_bytes())
        assert all(o == outputs[0] for o in outputs.values())
        c.detail = "4 runs byte-identical"


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v", "-p", "no:cacheprovider"]))
