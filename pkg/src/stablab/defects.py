"""Multilinear maps between algebras, their norms, and the defect functionals.

Maps are dense coefficient tensors with the output index first:
a k-linear map ``A_1 x ... x A_k -> B`` is an array of shape
``(dim B, dim A_1, ..., dim A_k)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .algebra import Algebra, L1Weighted
from .errors import BudgetExceeded, DimensionMismatch, UnsupportedDegree

DEFAULT_BUDGET = 10**6
DEFAULT_RESTARTS = 32
DEFAULT_ROUNDS = 200
DEFAULT_SAMPLES = 10_000
# bound on floats materialized per enumeration chunk
_CHUNK_FLOATS = 1 << 22

_ARG = "abcdefgh"


@dataclass(frozen=True)
class NormEstimate:
    """A norm value; ``exact`` is False when it is only a lower bound attained at ``witness``."""

    value: float
    exact: bool
    method: str
    witness: tuple | None = None

    def __float__(self):
        return self.value


# --------------------------------------------------------------------------
# maps


@dataclass(frozen=True, eq=False)
class MultilinearMap:
    tensor: np.ndarray
    domains: tuple
    codomain: Algebra

    def __post_init__(self):
        t = np.asarray(self.tensor, dtype=float)
        expected = (self.codomain.dim,) + tuple(a.dim for a in self.domains)
        if t.shape != expected:
            raise DimensionMismatch(f"tensor shape {t.shape}, expected {expected}")
        t.setflags(write=False)
        object.__setattr__(self, "tensor", t)
        object.__setattr__(self, "domains", tuple(self.domains))

    @property
    def arity(self):
        return len(self.domains)

    def __call__(self, *args):
        if len(args) != self.arity:
            raise DimensionMismatch(f"{self.arity}-linear map called with {len(args)} arguments")
        out = self.tensor
        for a, x in zip(self.domains, args):
            x = np.asarray(x, dtype=float)
            if x.shape != (a.dim,):
                raise DimensionMismatch(f"argument of shape {x.shape}, expected ({a.dim},)")
            out = np.tensordot(out, x, axes=([1], [0]))
        return out

    def _like(self, tensor):
        return type(self)(tensor, self.domains, self.codomain)

    def _check_same(self, other):
        if self.tensor.shape != other.tensor.shape:
            raise DimensionMismatch(f"shapes {self.tensor.shape} and {other.tensor.shape}")

    def __add__(self, other):
        self._check_same(other)
        return self._like(self.tensor + other.tensor)

    def __sub__(self, other):
        self._check_same(other)
        return self._like(self.tensor - other.tensor)

    def __neg__(self):
        return self._like(-self.tensor)

    def __mul__(self, s):
        return self._like(float(s) * self.tensor)

    __rmul__ = __mul__

    def norm(self, budget=DEFAULT_BUDGET, seed=0, **kw):
        return multilinear_norm(self, budget=budget, seed=seed, **kw)


class LinearOp(MultilinearMap):
    @property
    def matrix(self):
        return self.tensor

    @property
    def domain(self):
        return self.domains[0]

    def is_unital(self, tol=1e-12):
        return bool(np.max(np.abs(self.tensor @ self.domain.unit - self.codomain.unit)) <= tol)


class BilinearMap(MultilinearMap):
    pass


class TrilinearMap(MultilinearMap):
    pass


def make_map(tensor, domains, codomain):
    cls = {1: LinearOp, 2: BilinearMap, 3: TrilinearMap}.get(len(domains), MultilinearMap)
    return cls(tensor, tuple(domains), codomain)


def linear_op(matrix, domain, codomain):
    return LinearOp(matrix, (domain,), codomain)


def identity_op(algebra):
    return linear_op(np.eye(algebra.dim), algebra, algebra)


def multiplication_map(algebra):
    return BilinearMap(np.moveaxis(algebra.structure, 2, 0), (algebra, algebra), algebra)


def apply_linear(T, x):
    return T(x)


def apply_bilinear(phi, x, y):
    return phi(x, y)


def apply_trilinear(xi, x, y, z):
    return xi(x, y, z)


# --------------------------------------------------------------------------
# norms


def _contract_points(t, points):
    """Evaluate ``t`` (args first, output last) on every tuple of points.

    Returns shape ``(p_1, ..., p_k, dout)``.
    """
    for i, v in enumerate(points):
        t = np.moveaxis(np.tensordot(t, v, axes=([i], [1])), -1, i)
    return t


def _enumerate(tensor, vertex_sets, out_norm):
    t = np.moveaxis(tensor, 0, -1)
    first, rest = vertex_sets[0], vertex_sets[1:]
    per_point = tensor.shape[0] * math.prod(len(v) for v in rest)
    step = max(1, _CHUNK_FLOATS // max(per_point, 1))
    best, where = -1.0, None
    for start in range(0, len(first), step):
        img = _contract_points(t, [first[start:start + step]] + list(rest))
        vals = out_norm(img)
        flat = int(np.argmax(vals))
        if vals.flat[flat] > best:
            best = float(vals.flat[flat])
            idx = np.unravel_index(flat, vals.shape)
            where = (start + int(idx[0]),) + tuple(int(v) for v in idx[1:])
    witness = tuple(v[i] for v, i in zip(vertex_sets, where))
    return best, witness


def _einsum_slice(tensor, xs, skip):
    """Contract all arguments but ``skip`` with batched vectors ``xs[j]`` of shape (R, d_j)."""
    k = tensor.ndim - 1
    if k == 1 and skip is not None:
        return np.broadcast_to(tensor, (len(xs[0]),) + tensor.shape)
    operands = [tensor]
    subs = ["z" + _ARG[:k]]
    for j in range(k):
        if j != skip:
            operands.append(xs[j])
            subs.append("r" + _ARG[j])
    out = "rz" + ("" if skip is None else _ARG[skip])
    return np.einsum(",".join(subs) + "->" + out, *operands)


def _ascent(tensor, arg_norms, out_norm, seed, restarts, rounds, samples):
    rng = np.random.default_rng(seed)
    xs = [n.random_unit(rng, restarts) for n in arg_norms]
    vals = out_norm(_einsum_slice(tensor, xs, None))
    for _ in range(rounds):
        prev = vals
        for i, n in enumerate(arg_norms):
            L = _einsum_slice(tensor, xs, i)  # (R, dout, d_i)
            if isinstance(n, L1Weighted):
                cols = out_norm(np.swapaxes(L, 1, 2)) / n.w
                j = np.argmax(cols, axis=1)
                x = np.zeros_like(xs[i])
                x[np.arange(restarts), j] = 1.0 / n.w[j]
            else:
                y = np.einsum("rzd,rd->rz", L, xs[i])
                g = out_norm.subgradient(y)
                x = n.linear_argmax(np.einsum("rz,rzd->rd", g, L))
            xs[i] = x
        vals = out_norm(_einsum_slice(tensor, xs, None))
        if np.all(vals - prev <= 1e-15 * (1.0 + np.abs(prev))):
            break
    r = int(np.argmax(vals))
    best, witness = float(vals[r]), tuple(x[r] for x in xs)

    if samples:
        ss = [n.random_unit(rng, samples) for n in arg_norms]
        svals = out_norm(_einsum_slice(tensor, ss, None))
        s = int(np.argmax(svals))
        if svals[s] > best:
            best, witness = float(svals[s]), tuple(x[s] for x in ss)
    return best, witness


def tensor_norm(tensor, arg_norms, out_norm, *, budget=DEFAULT_BUDGET, seed=0, exact=None,
                restarts=DEFAULT_RESTARTS, rounds=DEFAULT_ROUNDS, samples=DEFAULT_SAMPLES):
    """Norm of a multilinear map given as a raw tensor (output index first).

    ``exact=None`` enumerates vertices when possible and falls back to
    alternating ascent; ``exact=True`` raises :class:`BudgetExceeded` instead of
    falling back; ``exact=False`` forces the ascent.
    """
    tensor = np.asarray(tensor, dtype=float)
    arg_norms = tuple(arg_norms)
    if tensor.ndim != len(arg_norms) + 1:
        raise DimensionMismatch(f"tensor of rank {tensor.ndim} for {len(arg_norms)} arguments")
    if not arg_norms:
        return NormEstimate(float(out_norm(tensor)), True, "direct", ())

    vertex_sets = None
    if exact is not False:
        vertex_sets = [n.extreme_points() for n in arg_norms]
        if any(v is None for v in vertex_sets):
            vertex_sets = None
        elif math.prod(len(v) for v in vertex_sets) > budget:
            vertex_sets = None
        if vertex_sets is None and exact:
            raise BudgetExceeded("exact norm requested but the vertex grid is unavailable or over budget")

    if vertex_sets is not None:
        value, witness = _enumerate(tensor, vertex_sets, out_norm)
        return NormEstimate(value, True, "extreme-point enumeration", witness)

    value, witness = _ascent(tensor, arg_norms, out_norm, seed, restarts, rounds, samples)
    return NormEstimate(value, False, f"alternating ascent(restarts={restarts}, rounds={rounds})", witness)


def multilinear_norm(phi, arg_norms=None, *, budget=DEFAULT_BUDGET, seed=0, exact=None,
                     out_norm=None, **kw):
    """Sup of ``||phi(x_1, ..., x_k)||`` over the product of unit balls."""
    if arg_norms is None:
        arg_norms = tuple(a.norm for a in phi.domains)
    if out_norm is None:
        out_norm = phi.codomain.norm
    return tensor_norm(phi.tensor, arg_norms, out_norm, budget=budget, seed=seed, exact=exact, **kw)


def op_norm(T, **kw):
    return multilinear_norm(T, **kw)


# --------------------------------------------------------------------------
# defects and coboundaries


def _check_T_psi(T, psi):
    B = T.codomain
    if psi.arity != 2 or psi.codomain.dim != B.dim or any(a.dim != B.dim for a in psi.domains):
        raise DimensionMismatch("psi must be a bilinear map B x B -> B for the codomain B of T")


def vee(T, psi):
    """``T^v(x, y) = T(xy) - psi(T x, T y)``."""
    _check_T_psi(T, psi)
    A = T.domain
    t = (np.einsum("ijm,km->kij", A.structure, T.tensor)
         - np.einsum("kpq,pi,qj->kij", psi.tensor, T.tensor, T.tensor))
    return BilinearMap(t, (A, A), T.codomain)


def mdef(T, psi, *, budget=DEFAULT_BUDGET, seed=0, **kw):
    return multilinear_norm(vee(T, psi), budget=budget, seed=seed, **kw)


def associator(psi):
    """The trilinear map ``(u, v, w) -> psi(u, psi(v, w)) - psi(psi(u, v), w)``."""
    p = psi.tensor
    t = np.einsum("kpq,qvw->kpvw", p, p) - np.einsum("kpq,puv->kuvq", p, p)
    return TrilinearMap(t, psi.domains + (psi.domains[0],), psi.codomain)


def adef(psi, *, budget=DEFAULT_BUDGET, seed=0, **kw):
    return multilinear_norm(associator(psi), budget=budget, seed=seed, **kw)


def coboundary(n, phi, psi):
    """Hochschild-style coboundary of an n-linear ``psi`` with approximate action ``phi``.

    Products are taken in the codomain algebra of ``phi``.  For ``n == 0``,
    ``psi`` may be given as a plain vector ``b`` and the result is
    ``a -> phi(a) b - b phi(a)``.
    """
    if n not in (0, 1, 2, 3):
        raise UnsupportedDegree(f"degree {n} not supported (0..3)")
    A, B = phi.domain, phi.codomain
    if not isinstance(psi, MultilinearMap):
        psi = MultilinearMap(np.asarray(psi, dtype=float), (), B)
    if psi.arity != n or psi.codomain.dim != B.dim or any(a.dim != A.dim for a in psi.domains):
        raise DimensionMismatch(f"psi must be {n}-linear from A to B")
    cB, cA, f, s = B.structure, A.structure, phi.tensor, psi.tensor
    args = _ARG[: n + 1]
    out = "o" + args

    t = np.einsum(f"pqo,p{args[0]},q{args[1:]}->{out}", cB, f, s)
    for j in range(1, n + 1):
        inner = args[: j - 1] + "m" + args[j + 1:]
        t = t + (-1) ** j * np.einsum(f"{args[j-1]}{args[j]}m,o{inner}->{out}", cA, s)
    t = t + (-1) ** (n + 1) * np.einsum(f"pqo,p{args[:n]},q{args[n]}->{out}", cB, s, f)
    return make_map(t, (A,) * (n + 1), B)


def delta2(T, psi, phi):
    """``(x, y, z) -> psi(Tx, phi(y,z)) - phi(xy, z) + phi(x, yz) - psi(phi(x,y), Tz)``."""
    _check_T_psi(T, psi)
    A = T.domain
    if phi.arity != 2 or phi.codomain.dim != T.codomain.dim or any(a.dim != A.dim for a in phi.domains):
        raise DimensionMismatch("phi must be bilinear A x A -> B")
    P, S, f, c = psi.tensor, T.tensor, phi.tensor, A.structure
    t = (np.einsum("kpq,px,qyz->kxyz", P, S, f)
         - np.einsum("xym,kmz->kxyz", c, f)
         + np.einsum("yzm,kxm->kxyz", c, f)
         - np.einsum("kpq,pxy,qz->kxyz", P, f, S))
    return TrilinearMap(t, (A, A, A), T.codomain)


def derivative_apply(T, psi, H):
    """Frechet derivative of ``S -> S^v`` at ``T`` applied to ``H``."""
    _check_T_psi(T, psi)
    if H.tensor.shape != T.tensor.shape:
        raise DimensionMismatch("H must have the shape of T")
    A = T.domain
    P, S, h = psi.tensor, T.tensor, H.tensor
    t = (np.einsum("xym,km->kxy", A.structure, h)
         - np.einsum("kpq,px,qy->kxy", P, S, h)
         - np.einsum("kpq,px,qy->kxy", P, h, S))
    return BilinearMap(t, (A, A), T.codomain)


def remainder(psi, H):
    """``r(H)(x, y) = psi(H x, H y)``, the quadratic part of ``(T+H)^v - T^v``."""
    t = np.einsum("kpq,pi,qj->kij", psi.tensor, H.tensor, H.tensor)
    return BilinearMap(t, (H.domain, H.domain), H.codomain)
