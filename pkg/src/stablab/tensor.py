"""Finite tensors in A (x) A: module actions, the product map, and diagonals."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import L1Weighted, multiply
from .errors import (
    DiagonalRejected,
    DimensionMismatch,
    NotAGroupAlgebra,
    WrongAlgebra,
    WrongNormKind,
)


@dataclass(frozen=True, eq=False)
class TensorRep:
    """``sum_j left[j] (x) right[j]``; rows of ``left`` and ``right`` are algebra elements."""

    left: np.ndarray
    right: np.ndarray

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.left, dtype=float))
        b = np.atleast_2d(np.asarray(self.right, dtype=float))
        if a.shape != b.shape or a.shape[0] == 0:
            raise DimensionMismatch(f"summand arrays of shapes {a.shape} and {b.shape}")
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "left", a)
        object.__setattr__(self, "right", b)

    @classmethod
    def from_pairs(cls, pairs):
        pairs = list(pairs)
        return cls([p[0] for p in pairs], [p[1] for p in pairs])

    @property
    def pairs(self):
        return list(zip(self.left, self.right))

    @property
    def dim(self):
        return self.left.shape[1]

    def __len__(self):
        return self.left.shape[0]

    def __mul__(self, s):
        return TensorRep(float(s) * self.left, self.right)

    __rmul__ = __mul__

    def __add__(self, other):
        return TensorRep(np.vstack([self.left, other.left]), np.vstack([self.right, other.right]))

    def __sub__(self, other):
        return self + (-1.0) * other


@dataclass(frozen=True, eq=False)
class DiagonalRep:
    rep: TensorRep
    M: float
    residual_unit: float
    residual_commute: float


def _check(algebra, t):
    if t.dim != algebra.dim:
        raise DimensionMismatch(f"tensor over dimension {t.dim}, algebra has {algebra.dim}")


def to_coeffs(rep):
    """Coefficient matrix ``m[i, j]`` of ``e_i (x) e_j``."""
    return rep.left.T @ rep.right


def from_coeffs(m):
    """A representation of the coefficient matrix ``m`` by its rows."""
    m = np.asarray(m, dtype=float)
    return TensorRep(np.eye(m.shape[0]), m)


def pi(algebra, t):
    _check(algebra, t)
    return multiply(algebra, t.left, t.right).sum(axis=0)


def apply_lifted(phi, t):
    """The linearization of a bilinear map evaluated on a tensor: ``sum_j phi(a_j, b_j)``."""
    if phi.arity != 2 or any(a.dim != t.dim for a in phi.domains):
        raise DimensionMismatch("phi must be bilinear on the tensor's algebra")
    return np.einsum("kij,ri,rj->k", phi.tensor, t.left, t.right)


def act_left(algebra, a, t):
    _check(algebra, t)
    a = np.asarray(a, dtype=float)
    if a.shape != (algebra.dim,):
        raise DimensionMismatch("acting element has the wrong length")
    return TensorRep(multiply(algebra, a, t.left), t.right)


def act_right(algebra, t, a):
    _check(algebra, t)
    a = np.asarray(a, dtype=float)
    if a.shape != (algebra.dim,):
        raise DimensionMismatch("acting element has the wrong length")
    return TensorRep(t.left, multiply(algebra, t.right, a))


def rep_norm_bound(algebra, t):
    """``sum_j ||a_j|| ||b_j||``, an upper bound on the projective norm."""
    _check(algebra, t)
    return float(np.sum(algebra.norm(t.left) * algebra.norm(t.right)))


def exact_projective_norm_l1(coeffs, weights_row, weights_col):
    """Projective norm on weighted l1 (x) l1, which is the weighted l1 norm of the coefficients."""
    m = np.asarray(coeffs, dtype=float)
    return float(np.asarray(weights_row) @ np.abs(m) @ np.asarray(weights_col))


def projective_norm_l1(algebra, t):
    if not isinstance(algebra.norm, L1Weighted):
        raise WrongNormKind(f"{algebra.name} does not carry an l1 norm")
    w = algebra.norm.w
    return exact_projective_norm_l1(to_coeffs(t), w, w)


def coeff_norm_bound(algebra, m):
    """Upper bound on the projective norm of the tensor with coefficients ``m``.

    Exact for l1 norms; otherwise the best of the row, column and singular
    value decompositions of ``m``.
    """
    m = np.asarray(m, dtype=float)
    if isinstance(algebra.norm, L1Weighted):
        w = algebra.norm.w
        return exact_projective_norm_l1(m, w, w)
    nrm = algebra.norm
    eye = np.eye(algebra.dim)
    rows = float(np.sum(nrm(eye) * nrm(m)))
    cols = float(np.sum(nrm(m.T) * nrm(eye)))
    u, s, vt = np.linalg.svd(m)
    svd = float(np.sum(s * nrm(u.T) * nrm(vt)))
    return min(rows, cols, svd)


def commutation_residual(algebra, t):
    """Max over basis vectors ``e_i`` of the norm of ``e_i . t - t . e_i``."""
    worst = 0.0
    for i in range(algebra.dim):
        e = algebra.basis(i)
        diff = to_coeffs(act_left(algebra, e, t)) - to_coeffs(act_right(algebra, t, e))
        worst = max(worst, coeff_norm_bound(algebra, diff))
    return worst


def validate_diagonal(algebra, t, tol=1e-12):
    _check(algebra, t)
    r_unit = float(algebra.norm(pi(algebra, t) - algebra.unit))
    r_comm = commutation_residual(algebra, t)
    if r_unit > tol or r_comm > tol:
        raise DiagonalRejected(r_unit, r_comm, tol)
    return DiagonalRep(t, rep_norm_bound(algebra, t), r_unit, r_comm)


def group_diagonal(algebra):
    """``(1/k) sum_g e_g (x) e_{g^-1}`` for a group algebra of order k."""
    if not algebra.is_group_algebra:
        raise NotAGroupAlgebra(f"{algebra.name} was not built from a group table")
    k = algebra.dim
    eye = np.eye(k)
    rep = TensorRep(eye / k, eye[algebra.inverses])
    return validate_diagonal(algebra, rep, tol=1e-12)


def matrix_diagonal(algebra):
    """``sum_j e_{j1} (x) e_{1j}`` for the full matrix algebra."""
    n = algebra.matrix_order
    if n is None:
        raise WrongAlgebra(f"{algebra.name} is not a matrix algebra")
    eye = np.eye(n * n)
    rep = TensorRep(eye[[j * n for j in range(n)]], eye[list(range(n))])
    return validate_diagonal(algebra, rep, tol=1e-12)


def builtin_diagonal(algebra):
    if algebra.is_group_algebra:
        return group_diagonal(algebra)
    if algebra.matrix_order is not None:
        return matrix_diagonal(algebra)
    raise WrongAlgebra(f"no built-in diagonal for {algebra.name}")
