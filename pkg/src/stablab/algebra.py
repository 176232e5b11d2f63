"""Finite-dimensional unital normed algebras over the reals.

An algebra is stored by its structure constants ``c`` with
``e_i * e_j = sum_k c[i, j, k] e_k``, a unit vector and a norm.  Elements are
plain coordinate vectors (``numpy`` arrays of length ``dim``).
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import (
    AssociativityViolation,
    DimensionMismatch,
    NotAGroup,
    NotSubmultiplicative,
    UnitLawViolation,
)

MAX_DIM = 64
LINF_ENUM_MAX = 20
ASSOC_TOL = 1e-12
UNIT_TOL = 1e-12
UNIT_NORM_TOL = 1e-9
SUBMULT_TOL = 1e-9


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


# --------------------------------------------------------------------------
# norms


@dataclass(frozen=True)
class L1Weighted:
    """Weighted l1 norm ``sum_i w_i |x_i|``."""

    weights: tuple

    def __post_init__(self):
        w = tuple(float(v) for v in self.weights)
        if not w or not all(math.isfinite(v) and v > 0 for v in w):
            raise ValueError("L1Weighted weights must be strictly positive and finite")
        object.__setattr__(self, "weights", w)

    @classmethod
    def ones(cls, d):
        return cls((1.0,) * d)

    @property
    def dim(self):
        return len(self.weights)

    @property
    def w(self):
        return np.asarray(self.weights)

    def __call__(self, x):
        return np.abs(np.asarray(x, dtype=float)) @ self.w

    def extreme_points(self):
        pts = []
        for i, wi in enumerate(self.weights):
            for s in (1.0, -1.0):
                v = np.zeros(self.dim)
                v[i] = s / wi
                pts.append(v)
        return np.array(pts)

    def subgradient(self, y):
        return self.w * np.where(y >= 0, 1.0, -1.0)

    def linear_argmax(self, c):
        scaled = np.abs(c) / self.w
        i = np.argmax(scaled, axis=-1)
        out = np.zeros_like(c)
        ci = np.take_along_axis(c, i[..., None], axis=-1)[..., 0]
        np.put_along_axis(out, i[..., None], (np.where(ci >= 0, 1.0, -1.0) / self.w[i])[..., None], axis=-1)
        return out

    def random_unit(self, rng, size):
        x = rng.standard_normal((size, self.dim))
        return x / self(x)[:, None]


@dataclass(frozen=True)
class LInf:
    """Max norm ``max_i |x_i|``."""

    d: int

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("LInf dimension must be positive")

    @property
    def dim(self):
        return self.d

    def __call__(self, x):
        return np.max(np.abs(np.asarray(x, dtype=float)), axis=-1)

    def extreme_points(self):
        if self.d > LINF_ENUM_MAX:
            return None
        return np.array(list(itertools.product((1.0, -1.0), repeat=self.d)))

    def subgradient(self, y):
        i = np.argmax(np.abs(y), axis=-1)
        g = np.zeros_like(y)
        yi = np.take_along_axis(y, i[..., None], axis=-1)
        np.put_along_axis(g, i[..., None], np.where(yi >= 0, 1.0, -1.0), axis=-1)
        return g

    def linear_argmax(self, c):
        return np.where(c >= 0, 1.0, -1.0)

    def random_unit(self, rng, size):
        x = rng.uniform(-1.0, 1.0, (size, self.d))
        return x / self(x)[:, None]


@dataclass(frozen=True)
class SpectralMatrix:
    """Operator norm of the row-major ``n x n`` matrix with the given coordinates."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("SpectralMatrix order must be positive")

    @classmethod
    def from_dim(cls, d):
        n = math.isqrt(d)
        if n * n != d:
            raise ValueError(f"SpectralMatrix needs a perfect-square dimension, got {d}")
        return cls(n)

    @property
    def dim(self):
        return self.n * self.n

    def _mat(self, x):
        x = np.asarray(x, dtype=float)
        return x.reshape(x.shape[:-1] + (self.n, self.n))

    def __call__(self, x):
        return np.linalg.svd(self._mat(x), compute_uv=False)[..., 0]

    def extreme_points(self):
        return None

    def subgradient(self, y):
        u, _, vt = np.linalg.svd(self._mat(y))
        g = u[..., :, :1] @ vt[..., :1, :]
        return g.reshape(y.shape)

    def linear_argmax(self, c):
        # maximizer of <c, X> over the spectral ball is the polar factor of c
        u, _, vt = np.linalg.svd(self._mat(c))
        return (u @ vt).reshape(c.shape)

    def random_unit(self, rng, size):
        x = rng.standard_normal((size, self.dim))
        return x / self(x)[:, None]


NormSpec = L1Weighted | LInf | SpectralMatrix


def element_norm(norm, coords):
    coords = np.asarray(coords, dtype=float)
    if coords.shape[-1] != norm.dim:
        raise DimensionMismatch(f"vector of length {coords.shape[-1]} for a norm on R^{norm.dim}")
    return float(norm(coords)) if coords.ndim == 1 else norm(coords)


def extreme_points(norm):
    """Vertices of the closed unit ball, or ``None`` when it is not an enumerable polytope."""
    return norm.extreme_points()


def norm_from_dict(spec, d=None):
    kind = spec["kind"]
    if kind == "l1":
        weights = spec.get("weights")
        if weights is None:
            weights = [1.0] * (d if d is not None else spec["dim"])
        return L1Weighted(tuple(weights))
    if kind == "linf":
        return LInf(int(spec.get("dim", d)))
    if kind == "spectral":
        return SpectralMatrix(int(spec["n"])) if "n" in spec else SpectralMatrix.from_dim(d)
    raise ValueError(f"unknown norm kind {kind!r}")


def norm_to_dict(norm):
    if isinstance(norm, L1Weighted):
        return {"kind": "l1", "weights": list(norm.weights)}
    if isinstance(norm, LInf):
        return {"kind": "linf", "dim": norm.d}
    return {"kind": "spectral", "n": norm.n}


# --------------------------------------------------------------------------
# algebras


@dataclass(frozen=True, eq=False)
class Algebra:
    dim: int
    structure: np.ndarray
    unit: np.ndarray
    norm: NormSpec
    name: str = "algebra"
    # group algebras keep their Cayley table; matrix algebras their order
    cayley: np.ndarray | None = field(default=None, repr=False)
    inverses: np.ndarray | None = field(default=None, repr=False)
    matrix_order: int | None = None

    def mul(self, x, y):
        return multiply(self, x, y)

    def elem_norm(self, x):
        return element_norm(self.norm, x)

    def basis(self, i):
        e = np.zeros(self.dim)
        e[i] = 1.0
        return e

    @property
    def is_group_algebra(self):
        return self.cayley is not None


def associativity_residual(c):
    """Largest ``|(e_i e_j) e_k - e_i (e_j e_k)|`` coefficient and where it occurs."""
    d = c.shape[0]
    worst, where = 0.0, None
    for i in range(d):
        left = np.einsum("jm,mkl->jkl", c[i], c)  # (e_i e_j) e_k
        right = np.einsum("jkm,ml->jkl", c, c[i])  # e_i (e_j e_k)
        diff = np.abs(left - right)
        idx = np.unravel_index(np.argmax(diff), diff.shape)
        if diff[idx] > worst:
            worst, where = float(diff[idx]), (i,) + tuple(int(v) for v in idx)
    return worst, where


def unit_residual(c, unit):
    d = c.shape[0]
    eye = np.eye(d)
    left = np.einsum("i,ijk->jk", unit, c) - eye
    right = np.einsum("j,ijk->ik", unit, c) - eye
    diff = np.maximum(np.abs(left), np.abs(right))
    idx = np.unravel_index(np.argmax(diff), diff.shape)
    return float(diff[idx]), tuple(int(v) for v in idx)


def make_algebra(structure, unit, norm, *, name="algebra", allow_unnormalized=False,
                 budget=10**6, seed=0, **meta):
    """Validate structure constants and return an :class:`Algebra`.

    Raises :class:`AssociativityViolation`, :class:`UnitLawViolation` or
    :class:`NotSubmultiplicative`.  With ``allow_unnormalized`` the last one
    is downgraded to a warning.
    """
    c = np.asarray(structure, dtype=float)
    u = np.asarray(unit, dtype=float)
    if c.ndim != 3 or len(set(c.shape)) != 1:
        raise DimensionMismatch(f"structure tensor must be d x d x d, got {c.shape}")
    d = c.shape[0]
    if d < 1 or d > MAX_DIM:
        raise DimensionMismatch(f"dimension {d} outside 1..{MAX_DIM}")
    if u.shape != (d,):
        raise DimensionMismatch(f"unit has shape {u.shape}, expected ({d},)")
    if norm.dim != d:
        raise DimensionMismatch(f"norm acts on R^{norm.dim}, algebra has dimension {d}")

    res, where = associativity_residual(c)
    if res > ASSOC_TOL:
        raise AssociativityViolation(
            f"associativity residual {res:.3e} at (i,j,k,l)={where}", where, res)
    res, where = unit_residual(c, u)
    if res > UNIT_TOL:
        raise UnitLawViolation(f"unit law residual {res:.3e} at {where}", where, res)
    unorm = float(norm(u))
    if abs(unorm - 1.0) > UNIT_NORM_TOL:
        raise UnitLawViolation(f"||1|| = {unorm!r}, expected 1", None, abs(unorm - 1.0))

    from .defects import tensor_norm

    mult = np.moveaxis(c, 2, 0)
    est = tensor_norm(mult, (norm, norm), norm, budget=budget, seed=seed)
    if est.value > 1.0 + SUBMULT_TOL:
        where = None if est.witness is None else tuple(np.round(w, 12).tolist() for w in est.witness)
        msg = f"multiplication has norm {est.value!r} > 1"
        if not allow_unnormalized:
            raise NotSubmultiplicative(msg, where, est.value - 1.0)
        warnings.warn(msg, stacklevel=2)

    return Algebra(d, _frozen(c), _frozen(u), norm, name=name, **meta)


def multiply(algebra, x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape[-1] != algebra.dim or y.shape[-1] != algebra.dim:
        raise DimensionMismatch(
            f"cannot multiply vectors of length {x.shape[-1]}, {y.shape[-1]} in dimension {algebra.dim}")
    return np.einsum("...i,...j,ijk->...k", x, y, algebra.structure)


# --------------------------------------------------------------------------
# built-in instances


def check_group(cayley, inverses):
    """Return the identity index of a Cayley table, or raise :class:`NotAGroup`."""
    t = np.asarray(cayley)
    inv = np.asarray(inverses)
    if t.ndim != 2 or t.shape[0] != t.shape[1]:
        raise NotAGroup("closure", f"table shape {t.shape}")
    k = t.shape[0]
    if inv.shape != (k,):
        raise NotAGroup("inverses", f"inverse vector shape {inv.shape}")
    if not np.issubdtype(t.dtype, np.integer) or t.min() < 0 or t.max() >= k:
        raise NotAGroup("closure", "entries must be integers in 0..k-1")
    lhs = t[t, :]  # lhs[a, b, c] = (ab)c
    rhs = t[:, t]  # rhs[a, b, c] = a(bc)
    bad = np.argwhere(lhs != rhs)
    if len(bad):
        raise NotAGroup("associativity", f"triple {tuple(int(v) for v in bad[0])}")
    ar = np.arange(k)
    ids = [e for e in range(k) if np.array_equal(t[e], ar) and np.array_equal(t[:, e], ar)]
    if not ids:
        raise NotAGroup("identity")
    e = ids[0]
    for g in range(k):
        h = int(inv[g])
        if not 0 <= h < k or t[g, h] != e or t[h, g] != e:
            raise NotAGroup("inverses", f"element {g}")
    return e


def _group_structure(cayley):
    k = cayley.shape[0]
    c = np.zeros((k, k, k))
    i, j = np.meshgrid(np.arange(k), np.arange(k), indexing="ij")
    c[i, j, cayley] = 1.0
    return c


def group_algebra(cayley, inverses, *, name="group"):
    """l1(G) with convolution for a finite group given by its Cayley table."""
    t = np.asarray(cayley)
    if np.issubdtype(t.dtype, np.floating) and np.all(t == np.round(t)):
        t = t.astype(int)
    inv = np.asarray(inverses)
    if np.issubdtype(inv.dtype, np.floating) and np.all(inv == np.round(inv)):
        inv = inv.astype(int)
    e = check_group(t, inv)
    k = t.shape[0]
    unit = np.zeros(k)
    unit[e] = 1.0
    return make_algebra(_group_structure(t), unit, L1Weighted.ones(k), name=name,
                        cayley=_frozen(t).astype(int), inverses=_frozen(inv).astype(int))


@lru_cache(maxsize=None)
def cyclic_algebra(k):
    if k < 1:
        raise ValueError("k must be positive")
    ar = np.arange(k)
    table = (ar[:, None] + ar[None, :]) % k
    return group_algebra(table, (-ar) % k, name=f"l1(Z_{k})")


def symmetric_group_table(n):
    """Cayley table and inverses of S_n, permutations in lexicographic order.

    The product is composition ``(p q)(i) = p[q[i]]``.
    """
    perms = list(itertools.permutations(range(n)))
    index = {p: i for i, p in enumerate(perms)}
    k = len(perms)
    table = np.empty((k, k), dtype=int)
    inverses = np.empty(k, dtype=int)
    for a, p in enumerate(perms):
        inv = [0] * n
        for i, pi in enumerate(p):
            inv[pi] = i
        inverses[a] = index[tuple(inv)]
        for b, q in enumerate(perms):
            table[a, b] = index[tuple(p[q[i]] for i in range(n))]
    return table, inverses


@lru_cache(maxsize=None)
def symmetric_group_algebra(n):
    table, inverses = symmetric_group_table(n)
    return group_algebra(table, inverses, name=f"l1(S_{n})")


@lru_cache(maxsize=None)
def matrix_algebra(n):
    """M_n with matrix units ``e_{ij}`` at index ``i*n + j`` and the spectral norm."""
    if n < 1:
        raise ValueError("n must be positive")
    d = n * n
    c = np.zeros((d, d, d))
    for i, j, l in itertools.product(range(n), repeat=3):
        c[i * n + j, j * n + l, i * n + l] = 1.0
    return make_algebra(c, np.eye(n).ravel(), SpectralMatrix(n), name=f"M_{n}", matrix_order=n)


@lru_cache(maxsize=None)
def pointwise_algebra(d):
    """l-infinity on d points with the pointwise product."""
    if d < 1:
        raise ValueError("d must be positive")
    c = np.zeros((d, d, d))
    c[np.arange(d), np.arange(d), np.arange(d)] = 1.0
    return make_algebra(c, np.ones(d), LInf(d), name=f"linf({d})")
