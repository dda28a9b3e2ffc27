"""Trivialized linear configuration spaces ``Q = Sigma x G``.

The symmetry group ``G`` is a real vector space acting on ``Q`` by
translation of the fiber coordinates.  Its Lie algebra is ``G`` itself
and the exponential map is the identity, so group elements, algebra
elements and fiber coordinates all share one representation: a 1-d
float array of length ``dim_g``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class DimensionError(ValueError):
    """Raised when array shapes disagree with the owning space."""


def as_vector(a, n: int | None = None, name: str = "vector") -> np.ndarray:
    """Return ``a`` as a read-only 1-d float array, checking length and finiteness."""
    v = np.array(a, dtype=float, ndmin=1)
    if v.ndim != 1:
        raise DimensionError(f"{name}: expected a 1-d array, got shape {v.shape}")
    if n is not None and v.shape[0] != n:
        raise DimensionError(f"{name}: expected length {n}, got {v.shape[0]}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name}: non-finite entries {v}")
    v.setflags(write=False)
    return v


@dataclass(frozen=True)
class TrivializedSpace:
    dim_sigma: int
    dim_g: int

    def __post_init__(self):
        if self.dim_sigma < 0 or self.dim_g < 0:
            raise DimensionError("dimensions must be nonnegative")

    @property
    def dim_q(self) -> int:
        return self.dim_sigma + self.dim_g

    def point(self, x, g) -> "PointQ":
        return PointQ(as_vector(x, self.dim_sigma, "x"), as_vector(g, self.dim_g, "g"))

    def covector(self, w, r) -> "CovectorQ":
        return CovectorQ(as_vector(w, self.dim_sigma, "w"), as_vector(r, self.dim_g, "r"))

    def point_from_flat(self, u) -> "PointQ":
        u = np.asarray(u, dtype=float)
        if u.shape != (self.dim_q,):
            raise DimensionError(f"expected flat length {self.dim_q}, got {u.shape}")
        return self.point(u[: self.dim_sigma], u[self.dim_sigma:])

    def covector_from_flat(self, u) -> "CovectorQ":
        u = np.asarray(u, dtype=float)
        if u.shape != (self.dim_q,):
            raise DimensionError(f"expected flat length {self.dim_q}, got {u.shape}")
        return self.covector(u[: self.dim_sigma], u[self.dim_sigma:])

    def zero_point(self) -> "PointQ":
        return self.point(np.zeros(self.dim_sigma), np.zeros(self.dim_g))

    def zero_covector(self) -> "CovectorQ":
        return self.covector(np.zeros(self.dim_sigma), np.zeros(self.dim_g))

    def check_point(self, q: "PointQ") -> None:
        if q.x.shape != (self.dim_sigma,) or q.g.shape != (self.dim_g,):
            raise DimensionError(
                f"point dims ({q.x.shape[0]}, {q.g.shape[0]}) do not match "
                f"({self.dim_sigma}, {self.dim_g})"
            )

    def check_covector(self, p: "CovectorQ") -> None:
        if p.w.shape != (self.dim_sigma,) or p.r.shape != (self.dim_g,):
            raise DimensionError(
                f"covector dims ({p.w.shape[0]}, {p.r.shape[0]}) do not match "
                f"({self.dim_sigma}, {self.dim_g})"
            )


@dataclass(frozen=True, eq=False)
class PointQ:
    """A configuration ``q = (x, g)`` with shape part ``x`` and fiber part ``g``."""

    x: np.ndarray
    g: np.ndarray

    @property
    def space(self) -> TrivializedSpace:
        return TrivializedSpace(self.x.shape[0], self.g.shape[0])

    def flat(self) -> np.ndarray:
        return np.concatenate([self.x, self.g])

    def __add__(self, other: "PointQ") -> "PointQ":
        _same(self, other)
        return PointQ(as_vector(self.x + other.x), as_vector(self.g + other.g))

    def __sub__(self, other: "PointQ") -> "PointQ":
        _same(self, other)
        return PointQ(as_vector(self.x - other.x), as_vector(self.g - other.g))

    def __eq__(self, other):
        if not isinstance(other, PointQ):
            return NotImplemented
        return np.array_equal(self.x, other.x) and np.array_equal(self.g, other.g)

    def __repr__(self):
        return f"PointQ(x={self.x.tolist()}, g={self.g.tolist()})"


@dataclass(frozen=True, eq=False)
class CovectorQ:
    """A covector ``p = (w, r)`` in ``Q* = Sigma* x G*``."""

    w: np.ndarray
    r: np.ndarray

    def flat(self) -> np.ndarray:
        return np.concatenate([self.w, self.r])

    def __add__(self, other: "CovectorQ") -> "CovectorQ":
        _same(self, other)
        return CovectorQ(as_vector(self.w + other.w), as_vector(self.r + other.r))

    def __sub__(self, other: "CovectorQ") -> "CovectorQ":
        _same(self, other)
        return CovectorQ(as_vector(self.w - other.w), as_vector(self.r - other.r))

    def __neg__(self) -> "CovectorQ":
        return CovectorQ(as_vector(-self.w), as_vector(-self.r))

    def __mul__(self, s: float) -> "CovectorQ":
        return CovectorQ(as_vector(s * self.w), as_vector(s * self.r))

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, CovectorQ):
            return NotImplemented
        return np.array_equal(self.w, other.w) and np.array_equal(self.r, other.r)

    def __repr__(self):
        return f"CovectorQ(w={self.w.tolist()}, r={self.r.tolist()})"


@dataclass(frozen=True, eq=False)
class TrivializedMomentumPoint:
    """Image ``(q, w, mu)`` of a cotangent vector under the connection trivialization."""

    q: PointQ
    w: np.ndarray
    mu: np.ndarray

    def __eq__(self, other):
        if not isinstance(other, TrivializedMomentumPoint):
            return NotImplemented
        return (
            self.q == other.q
            and np.array_equal(self.w, other.w)
            and np.array_equal(self.mu, other.mu)
        )


def _same(a, b):
    pa = (a.x, a.g) if isinstance(a, PointQ) else (a.w, a.r)
    pb = (b.x, b.g) if isinstance(b, PointQ) else (b.w, b.r)
    if pa[0].shape != pb[0].shape or pa[1].shape != pb[1].shape:
        raise DimensionError("operands live in different spaces")


def pair(p: CovectorQ, v: PointQ) -> float:
    """Euclidean duality pairing ``<p, v> = w.x + r.g``."""
    if p.w.shape != v.x.shape or p.r.shape != v.g.shape:
        raise DimensionError(
            f"cannot pair covector ({p.w.shape[0]}, {p.r.shape[0]}) "
            f"with point ({v.x.shape[0]}, {v.g.shape[0]})"
        )
    return float(p.w @ v.x + p.r @ v.g)


def act(gr, q: PointQ) -> PointQ:
    """Left action of the group element ``gr`` by fiber translation."""
    gr = as_vector(gr, q.g.shape[0], "group element")
    return PointQ(q.x, as_vector(q.g + gr))


def act_cotangent(gr, z: tuple[PointQ, CovectorQ]) -> tuple[PointQ, CovectorQ]:
    """Cotangent lift of :func:`act`; the covector is left untouched."""
    q, p = z
    if p.w.shape != q.x.shape or p.r.shape != q.g.shape:
        raise DimensionError("base point and covector dims differ")
    return act(gr, q), p


def momentum_map(q: PointQ, p: CovectorQ) -> np.ndarray:
    """Momentum map of the translation action: the ``G*`` part of ``p``."""
    if p.w.shape != q.x.shape or p.r.shape != q.g.shape:
        raise DimensionError("base point and covector dims differ")
    return p.r
