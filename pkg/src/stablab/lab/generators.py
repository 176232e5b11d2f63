"""Seeded generators for perturbed products and almost-multiplicative operators."""

from __future__ import annotations

import numpy as np

from ..defects import BilinearMap, linear_op, multiplication_map, tensor_norm, vee
from ..errors import BaseNotMultiplicative, DimensionMismatch

HOM_TOL = 1e-12


def unit_adapted_basis(algebra):
    """``(Q, Q^-1)`` where the columns of ``Q`` are the unit followed by the other basis vectors.

    The unit replaces the standard basis vector on which it has its largest
    coefficient, so ``Q`` is invertible.
    """
    u = algebra.unit
    j0 = int(np.argmax(np.abs(u)))
    cols = [u] + [algebra.basis(j) for j in range(algebra.dim) if j != j0]
    Q = np.column_stack(cols)
    return Q, np.linalg.inv(Q)


def project_unit_bilinear(algebra, gamma):
    """Project a bilinear tensor so that ``gamma(1, .) = gamma(., 1) = 0``.

    In the unit-adapted basis ``gamma'(x', y') = gamma(Q x', Q y')``; the slices
    along the unit coordinate are zeroed there and the result mapped back by
    ``gamma(x, y) = gamma'(Q^-1 x, Q^-1 y)``.
    """
    Q, Qi = unit_adapted_basis(algebra)
    g = np.einsum("kij,ip,jq->kpq", gamma, Q, Q)
    g[:, 0, :] = 0.0
    g[:, :, 0] = 0.0
    return np.einsum("kpq,pi,qj->kij", g, Qi, Qi)


def project_unit_linear(domain, h):
    """Project a linear map (``dB x dA`` matrix) so that it kills the unit of ``domain``."""
    Q, Qi = unit_adapted_basis(domain)
    hp = h @ Q
    hp[:, 0] = 0.0
    return hp @ Qi


def gen_perturbed_product(B, epsilon_psi, preserve_unit=True, seed=0):
    """``mult_B + epsilon_psi * gamma`` with ``gamma`` random of unit (estimated) norm."""
    if epsilon_psi < 0:
        raise ValueError("epsilon_psi must be nonnegative")
    base = multiplication_map(B)
    if epsilon_psi == 0:
        return base
    rng = np.random.default_rng(seed)
    gamma = rng.uniform(-1.0, 1.0, (B.dim,) * 3)
    if preserve_unit:
        gamma = project_unit_bilinear(B, gamma)
    size = tensor_norm(gamma, (B.norm, B.norm), B.norm, seed=seed).value
    if size > 0:
        gamma = gamma / size
    return BilinearMap(base.tensor + epsilon_psi * gamma, (B, B), B)


def group_hom(A, B, mapping):
    """The operator ``e_g -> e_{mapping[g]}`` between group algebras."""
    mapping = np.asarray(mapping, dtype=int)
    if mapping.shape != (A.dim,) or mapping.min() < 0 or mapping.max() >= B.dim:
        raise DimensionMismatch(f"mapping must send {A.dim} indices into 0..{B.dim - 1}")
    P = np.zeros((B.dim, A.dim))
    P[mapping, np.arange(A.dim)] = 1.0
    op = linear_op(P, A, B)
    _check_hom(op)
    return op


def _check_hom(op):
    res = float(np.max(np.abs(vee(op, multiplication_map(op.codomain)).tensor)))
    if res > HOM_TOL or np.max(np.abs(op.tensor @ op.domain.unit - op.codomain.unit)) > HOM_TOL:
        raise BaseNotMultiplicative(f"base operator is not a unital homomorphism (residual {res:.3e})")


def gen_perturbed_hom(A, B, base, epsilon_t, preserve_unit=True, seed=0, direction=None):
    """``base + epsilon_t * H`` for a homomorphism ``base``.

    ``H`` is ``direction`` when given, else a seeded random operator rescaled
    to unit (estimated) norm.  With ``preserve_unit``, ``H(1) = 0``.
    """
    _check_hom(base)
    if direction is not None:
        h = np.asarray(direction, dtype=float)
        if h.shape != (B.dim, A.dim):
            raise DimensionMismatch(f"direction has shape {h.shape}, expected {(B.dim, A.dim)}")
        if preserve_unit:
            h = project_unit_linear(A, h)
    else:
        rng = np.random.default_rng(seed)
        h = rng.uniform(-1.0, 1.0, (B.dim, A.dim))
        if preserve_unit:
            h = project_unit_linear(A, h)
        size = tensor_norm(h, (A.norm,), B.norm, seed=seed).value
        if size > 0:
            h = h / size
    return linear_op(base.tensor + epsilon_t * h, A, B)
