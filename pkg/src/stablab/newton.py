"""Newton-Raphson-like stabilization of ``T(xy) = psi(T x, T y)``.

The correction operator ``J`` turns a bilinear defect into a linear
correction using an exact diagonal ``sum_j a_j (x) b_j`` of the domain:

    J R (x) = sum_j psi(T a_j, R(b_j, x)),

and the improving step is ``F T = T + J T^v``.  :func:`stabilize` iterates
``F`` with the stopping rule and bookkeeping of the stability theorem, and
:func:`verify_bounds` evaluates each intermediate inequality of its proof on
a concrete instance.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cached_property

import numpy as np

from .defects import (
    DEFAULT_BUDGET,
    BilinearMap,
    LinearOp,
    adef,
    delta2,
    derivative_apply,
    linear_op,
    mdef,
    multilinear_norm,
    vee,
)
from .errors import DimensionMismatch, DomainError, NonUnitalInput
from .tensor import DiagonalRep

log = logging.getLogger(__name__)

UNITAL_TOL = 1e-12
MARGIN_TOL = 1e-10


def psi_unital_residuals(psi):
    """Max coefficient error of ``psi(1, u) = u`` and of ``psi(u, 1) = u`` over the basis."""
    B = psi.codomain
    eye = np.eye(B.dim)
    left = np.einsum("kpq,p->kq", psi.tensor, B.unit) - eye
    right = np.einsum("kpq,q->kp", psi.tensor, B.unit) - eye
    return float(np.max(np.abs(left))), float(np.max(np.abs(right)))


@dataclass(frozen=True, eq=False)
class Instance:
    """Everything the stability theorem quantifies over.

    ``K`` and ``L`` are the bounds on ``||T||`` and ``||psi||``; when left
    unset they default to ``max(1, norm)``.
    """

    diagonal: DiagonalRep
    psi: BilinearMap
    T: LinearOp
    K: float | None = None
    L: float | None = None
    hypotheses: bool = True
    budget: int = DEFAULT_BUDGET
    seed: int = 0

    def __post_init__(self):
        A, B = self.T.domain, self.T.codomain
        if self.diagonal.rep.dim != A.dim:
            raise DimensionMismatch("diagonal does not live over the domain of T")
        if self.psi.codomain.dim != B.dim or any(a.dim != B.dim for a in self.psi.domains):
            raise DimensionMismatch("psi must be bilinear on the codomain of T")

    @property
    def A(self):
        return self.T.domain

    @property
    def B(self):
        return self.T.codomain

    @property
    def M(self):
        return self.diagonal.M

    @cached_property
    def T_norm(self):
        return multilinear_norm(self.T, budget=self.budget, seed=self.seed)

    @cached_property
    def psi_norm(self):
        return multilinear_norm(self.psi, budget=self.budget, seed=self.seed)

    @property
    def K_bound(self):
        return self.K if self.K is not None else max(1.0, self.T_norm.value)

    @property
    def L_bound(self):
        return self.L if self.L is not None else max(1.0, self.psi_norm.value)

    @cached_property
    def T_unital(self):
        return self.T.is_unital(UNITAL_TOL)

    @cached_property
    def psi_left_unital(self):
        return psi_unital_residuals(self.psi)[0] <= UNITAL_TOL

    @cached_property
    def psi_unital(self):
        return max(psi_unital_residuals(self.psi)) <= UNITAL_TOL

    def with_T(self, T):
        return replace(self, T=T)

    def mdef(self):
        return mdef(self.T, self.psi, budget=self.budget, seed=self.seed)

    def adef(self):
        return adef(self.psi, budget=self.budget, seed=self.seed)


@dataclass
class IterationConfig:
    epsilon: float
    eta: float | None = None
    theta: float | None = None
    abs_tol: float = 1e-13
    max_iters: int = 64
    divergence_factor: float = 10.0

    def __post_init__(self):
        if (self.eta is None) == (self.theta is None):
            raise DomainError("give exactly one of eta and theta")
        for name in ("eta", "theta"):
            v = getattr(self, name)
            if v is not None and not 0.0 < v < 1.0:
                raise DomainError(f"{name} must lie in (0, 1), got {v}")
        if not 0.0 < self.epsilon < 1.0:
            raise DomainError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.max_iters < 0 or self.abs_tol < 0 or self.divergence_factor <= 1:
            raise DomainError("max_iters, abs_tol must be nonnegative and divergence_factor > 1")

    def resolved_theta(self):
        return self.theta if self.theta is not None else theta_from_eta(self.eta)


class Outcome(str, Enum):
    EXACT = "ExactSolution"
    TERMINATED = "TerminatedAtN"
    BUDGET = "BudgetExhausted"
    DIVERGED = "Diverged"


@dataclass
class StepRecord:
    n: int
    mdef: float
    mdef_exact: bool
    op_norm: float
    correction_norm: float | None
    omega: float
    delta_n: float
    beta_n: float
    K_n: float
    claim_ii_ok: bool
    claim_iii_ok: bool
    adef_threshold_crossed: bool
    prop34_lhs: float | None = None
    prop34_rhs: float | None = None


@dataclass
class IterationTrace:
    steps: list
    outcome: Outcome
    N: int | None
    final_op: LinearOp
    distance_to_start: float
    endgame_bound: float
    alpha: float
    alpha_exact: bool
    delta: float
    theta: float
    epsilon: float
    K: float
    L: float
    M: float
    hypothesis_satisfied: bool
    estimated_defects: bool = False
    notes: list = field(default_factory=list)

    @property
    def final_mdef(self):
        return self.steps[-1].mdef

    @property
    def alpha_power_bound(self):
        return self.alpha ** (1.0 / (1.0 + self.theta))


# --------------------------------------------------------------------------
# operators and constants


def J_apply(inst, R):
    """The correction ``x -> sum_j psi(T a_j, R(b_j, x))`` as a linear operator."""
    A, B = inst.A, inst.B
    if R.arity != 2 or R.codomain.dim != B.dim or any(a.dim != A.dim for a in R.domains):
        raise DimensionMismatch("R must be bilinear A x A -> B")
    rep = inst.diagonal.rep
    Ta = inst.T.tensor @ rep.left.T  # (dB, r): T a_j
    m = np.einsum("kpq,pr,ri,qix->kx", inst.psi.tensor, Ta, rep.right, R.tensor)
    return linear_op(m, A, B)


def improve(inst):
    return inst.T + J_apply(inst, vee(inst.T, inst.psi))


def constants(L, K, M):
    """``(C1, C2, C3)`` bounding the new defect in terms of ``||psi||, ||T||, M``."""
    c1 = L**3 * K**2 * M**2 + 2 * L * M
    c2 = K**2 * M
    c3 = L * K**4 * M
    return c1, c2, c3


def delta_threshold(K, L, M, theta, epsilon):
    """Initial defect threshold that makes the iteration provably contract.

    Evaluated in log space so large ``L*M`` underflows to 0 instead of
    overflowing.
    """
    if K < 1 or L < 1 or M < 1:
        raise DomainError(f"K, L, M must be >= 1, got {K}, {L}, {M}")
    if not 0 < theta < 1:
        raise DomainError(f"theta must lie in (0, 1), got {theta}")
    if not 0 < epsilon <= 1:
        raise DomainError(f"epsilon must lie in (0, 1], got {epsilon}")
    lm = L * M
    terms = [
        math.log(2 * lm),
        4 * lm + math.log((L**3 * M**2 + M) * K**2),
        8 * lm + math.log(lm * K**4),
    ]
    log_bracket = math.log(2.0) + float(np.logaddexp.reduce(terms))
    return math.exp(-log_bracket / theta + math.log(epsilon))


def theta_from_eta(eta):
    """A theta with ``1/(1+theta) > 1-eta``: half of the boundary value, capped at 0.99."""
    if not 0 < eta < 1:
        raise DomainError(f"eta must lie in (0, 1), got {eta}")
    return min(0.5 * eta / (1.0 - eta), 0.99)


def schedule(delta, theta, L, M, K, n):
    """``(omega_n, delta_n, beta_n, K_n)`` from the recursions of the convergence proof."""
    omega, beta = 0.0, 1.0
    for _ in range(n):
        beta *= 1.0 + L * M * 2.0 ** (-omega) * delta
        omega = 1.0 + (1.0 + theta) * omega
    if delta <= 1 and beta > math.exp(2 * L * M) * (1 + 1e-12):
        raise AssertionError(f"beta_{n} = {beta} exceeds exp(2LM)")
    return omega, 2.0 ** (-omega) * delta, beta, beta * K


# --------------------------------------------------------------------------
# the iteration


def _norm(op, inst):
    return multilinear_norm(op, budget=inst.budget, seed=inst.seed)


def stabilize(inst, config):
    """Iterate ``F`` from ``inst.T`` until a stopping rule fires."""
    psi_l, psi_r = psi_unital_residuals(inst.psi)
    if inst.hypotheses and (max(psi_l, psi_r) > UNITAL_TOL or not inst.T_unital):
        raise NonUnitalInput(
            f"unitality required: psi residuals ({psi_l:.2e}, {psi_r:.2e}), T unital={inst.T_unital}")

    theta = config.resolved_theta()
    alpha_est = inst.adef()
    alpha = alpha_est.value
    K, L, M = inst.K_bound, inst.L_bound, inst.M
    # pin K and L so later iterates are measured against the starting bounds
    inst = replace(inst, K=K, L=L)
    psi_norm = inst.psi_norm.value
    delta = delta_threshold(K, L, max(M, 1.0), theta, config.epsilon)
    T0 = inst.T

    notes = []
    m_est = inst.mdef()
    hyp = (inst.hypotheses and m_est.value <= delta
           and inst.T_norm.value <= K and psi_norm <= L)
    if inst.hypotheses and not hyp:
        log.warning("hypotheses of the theorem not met (mdef=%.3e, delta=%.3e); "
                    "no postconditions promised", m_est.value, delta)
        notes.append("hypotheses not satisfied")
    estimated = not (alpha_est.exact and m_est.exact)

    steps = []
    outcome, N = Outcome.BUDGET, None
    diverged = False
    T, T_norm = T0, inst.T_norm.value
    for n in range(config.max_iters + 1):
        m = m_est.value
        omega, delta_n, beta_n, K_n = schedule(delta, theta, L, max(M, 1.0), K, n)
        crossed = alpha > m ** (1.0 + theta)
        rec = StepRecord(
            n=n, mdef=m, mdef_exact=m_est.exact, op_norm=T_norm, correction_norm=None,
            omega=omega, delta_n=delta_n, beta_n=beta_n, K_n=K_n,
            claim_ii_ok=m <= delta_n, claim_iii_ok=T_norm <= K_n,
            adef_threshold_crossed=crossed,
        )
        steps.append(rec)
        if diverged:
            outcome = Outcome.DIVERGED
            break
        if crossed:
            outcome, N = Outcome.TERMINATED, n
            break
        if m <= config.abs_tol:
            outcome = Outcome.EXACT
            break
        if n == config.max_iters:
            break

        cur = inst.with_T(T)
        corr = J_apply(cur, vee(T, inst.psi))
        T_next = T + corr
        m_next = mdef(T_next, inst.psi, budget=inst.budget, seed=inst.seed)
        c1, c2, c3 = constants(psi_norm, T_norm, M)
        rec.correction_norm = _norm(corr, inst).value
        rec.prop34_lhs = m_next.value
        rec.prop34_rhs = c1 * m * m + c2 * alpha * m + c3 * alpha
        estimated = estimated or not m_next.exact
        if m_next.value > config.divergence_factor * max(m, delta_n):
            diverged = True
        T, m_est = T_next, m_next
        T_norm = _norm(T, inst).value

    if estimated:
        notes.append("some defects are lower estimates; comparisons use the estimates")
    return IterationTrace(
        steps=steps, outcome=outcome, N=N, final_op=T,
        distance_to_start=_norm(T - T0, inst).value,
        endgame_bound=2 * delta * math.exp(2 * L * M) * K * L * M,
        alpha=alpha, alpha_exact=alpha_est.exact, delta=delta, theta=theta,
        epsilon=config.epsilon, K=K, L=L, M=M,
        hypothesis_satisfied=hyp, estimated_defects=estimated, notes=notes,
    )


# --------------------------------------------------------------------------
# bound verification


@dataclass(frozen=True)
class BoundCheck:
    name: str
    lhs: float
    rhs: float
    hypothesis_ok: bool = True
    exact: bool = True

    @property
    def margin(self):
        return self.rhs - self.lhs

    @property
    def ok(self):
        return self.margin >= -MARGIN_TOL


def _random_linear(A, B, rng):
    return linear_op(rng.uniform(-1, 1, (B.dim, A.dim)), A, B)


def _random_bilinear(A, B, rng):
    return BilinearMap(rng.uniform(-1, 1, (B.dim, A.dim, A.dim)), (A, A), B)


def verify_bounds(inst, H=None, R=None, seed=0):
    """Evaluate each inequality of the stability proof on ``inst``.

    ``H`` (a direction for the derivative remainder) and ``R`` (a generic
    bilinear defect for the approximate right-inverse bound) default to
    seeded random maps.
    """
    rng = np.random.default_rng(seed)
    A, B, T, psi = inst.A, inst.B, inst.T, inst.psi
    if H is None:
        H = _random_linear(A, B, rng)
    if R is None:
        R = _random_bilinear(A, B, rng)
    nrm = lambda f: _norm(f, inst)  # noqa: E731

    M = inst.M
    alpha_e = inst.adef()
    m_e = inst.mdef()
    tn_e, pn_e = inst.T_norm, inst.psi_norm
    alpha, m, tn, pn = alpha_e.value, m_e.value, tn_e.value, pn_e.value
    base_exact = alpha_e.exact and m_e.exact and tn_e.exact and pn_e.exact
    one_sided = inst.T_unital and inst.psi_left_unital

    Tv = vee(T, psi)
    checks = []

    e = nrm(delta2(T, psi, Tv))
    checks.append(BoundCheck("almost_ker", e.value, alpha * tn**3, True, e.exact and base_exact))

    rem = vee(T + H, psi) - Tv - derivative_apply(T, psi, H)
    e, h = nrm(rem), nrm(H)
    checks.append(BoundCheck("derivative_remainder", e.value, pn * h.value**2, True,
                             e.exact and h.exact and pn_e.exact))

    JR = J_apply(inst, R)
    lhs = nrm(R + derivative_apply(T, psi, JR))
    r, d2r = nrm(R), nrm(delta2(T, psi, R))
    rhs = (2 * m * pn * r.value + pn * tn * d2r.value + alpha * tn**2 * r.value) * M
    checks.append(BoundCheck("right_inverse", lhs.value, rhs, one_sided,
                             lhs.exact and r.exact and d2r.exact and base_exact))

    JT = J_apply(inst, Tv)
    lhs = nrm(Tv + derivative_apply(T, psi, JT))
    rhs = (2 * m**2 * pn + alpha * m * tn**2 + alpha * pn * tn**4) * M
    checks.append(BoundCheck("corrected_defect", lhs.value, rhs, one_sided, lhs.exact and base_exact))

    jt = nrm(JT)
    checks.append(BoundCheck("correction_size", jt.value, m * pn * tn * M, True, jt.exact and base_exact))

    FT = T + JT
    new = mdef(FT, psi, budget=inst.budget, seed=inst.seed)
    c1, c2, c3 = constants(pn, tn, M)
    checks.append(BoundCheck("new_defect", new.value, c1 * m**2 + c2 * alpha * m + c3 * alpha,
                             one_sided, new.exact and base_exact))
    return checks
