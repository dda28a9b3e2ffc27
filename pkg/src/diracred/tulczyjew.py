"""Discrete Tulczyjew triples, their connection trivializations and reductions.

Points of iterated cotangent bundles are plain tuples of :class:`PointQ`
and :class:`CovectorQ`, in the order ``(base..., fiber...)``:

* ``T*(Q x Q)``   : ``(q0, q1, a0, a1)`` with covectors ``a0, a1``
* ``T*(Q x Q*)``  : ``(q0, p1, a0, b1)`` with ``a0`` a covector, ``b1`` a point
* ``T*(Q* x Q)``  : ``(p0, q1, b0, a1)``

The reduced spaces use the section through zero fiber coordinate, so a
class ``[q0]`` is represented by its shape part ``x0``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .connection import DiscreteConnection
from .lagrangian import DiscreteLagrangian
from .spaces import CovectorQ, PointQ, TrivializedMomentumPoint, as_vector


# --------------------------------------------------------------------------
# Tulczyjew maps and discrete Dirac differentials


class CotangentPair(NamedTuple):
    """A point ``(z0, z1)`` of ``T*Q x T*Q``, each ``z = (q, p)``."""

    z0: tuple[PointQ, CovectorQ]
    z1: tuple[PointQ, CovectorQ]


def kappa_d(zp: "CotangentPair"):
    """``T*Q x T*Q -> T*(Q x Q)``: ``((q0, p0), (q1, p1)) -> (q0, q1, -p0, p1)``."""
    (q0, p0), (q1, p1) = zp
    return q0, q1, -p0, p1


def omega_flat_plus(zp: "CotangentPair"):
    """``T*Q x T*Q -> T*(Q x Q*)``: ``-> (q0, p1, p0, q1)``."""
    (q0, p0), (q1, p1) = zp
    return q0, p1, p0, q1


def omega_flat_minus(zp: "CotangentPair"):
    """``T*Q x T*Q -> T*(Q* x Q)``: ``-> (p0, q1, -q0, -p1)``."""
    (q0, p0), (q1, p1) = zp
    return p0, q1, _neg_point(q0), -p1


def gamma_plus(alpha):
    """``T*(Q x Q) -> T*(Q x Q*)``, so that ``gamma_plus o kappa_d = omega_flat_plus``."""
    q0, q1, a0, a1 = alpha
    return q0, a1, -a0, q1


def gamma_minus(alpha):
    """``T*(Q x Q) -> T*(Q* x Q)``, so that ``gamma_minus o kappa_d = omega_flat_minus``."""
    q0, q1, a0, a1 = alpha
    return -a0, q1, _neg_point(q0), -a1


def dirac_diff_plus(L: DiscreteLagrangian, q0: PointQ, q1: PointQ):
    """``(q0, D2 L, -D1 L, q1)``."""
    D1, D2 = L.gradient(q0, q1)
    return gamma_plus((q0, q1, D1, D2))


def dirac_diff_minus(L: DiscreteLagrangian, q0: PointQ, q1: PointQ):
    """``(-D1 L, q1, -q0, -D2 L)``."""
    D1, D2 = L.gradient(q0, q1)
    return gamma_minus((q0, q1, D1, D2))


def _neg_point(q: PointQ) -> PointQ:
    return PointQ(as_vector(-q.x), as_vector(-q.g))


# --------------------------------------------------------------------------
# connection trivializations of Q x Q and T*Q


def lambda_d(c: DiscreteConnection, q0: PointQ, q1: PointQ):
    """``Q x Q -> Q x Sigma x G``: ``(q0, q1) -> (q0, x1, omega_d(q0, q1))``."""
    return q0, q1.x, c.omega_d(q0, q1)


def lambda_d_inv(c: DiscreteConnection, q0: PointQ, x1, g1):
    x1 = as_vector(x1, c.space.dim_sigma, "x1")
    g1 = as_vector(g1, c.space.dim_g, "g1")
    return q0, c.space.point(x1, g1 + c.h_d(q0, x1))


def lambda_d_adj(c: DiscreteConnection, p0: CovectorQ, w1, r1):
    """Pullback of ``(p0, w1, r1)`` on ``Q x Sigma x G`` to a covector on ``Q x Q``."""
    mx, mg = c.h_dQ_adj(r1)
    p_first = c.space.covector(p0.w - mx, p0.r - mg)
    return p_first, c.space.covector(np.asarray(w1) - c.h_dSigma_adj(r1), r1)


def lambda_d_adj_inv(c: DiscreteConnection, p0: CovectorQ, p1: CovectorQ):
    mx, mg = c.h_dQ_adj(p1.r)
    return (
        c.space.covector(p0.w + mx, p0.r + mg),
        as_vector(p1.w + c.h_dSigma_adj(p1.r)),
        p1.r,
    )


def tilde_lambda_d(c: DiscreteConnection, q0: PointQ, q1: PointQ):
    """``Q x Q -> Sigma x G x Q``: ``(q0, q1) -> (x0, omega_d(q1, q0), q1)``."""
    b, x, g = lambda_d(c, q1, q0)
    return x, g, b


def tilde_lambda_d_inv(c: DiscreteConnection, x0, g0, q1: PointQ):
    b, q = lambda_d_inv(c, q1, x0, g0)
    return q, b


def tilde_lambda_d_adj(c: DiscreteConnection, w0, r0, p1: CovectorQ):
    b, a = lambda_d_adj(c, p1, w0, r0)
    return a, b


def tilde_lambda_d_adj_inv(c: DiscreteConnection, p0: CovectorQ, p1: CovectorQ):
    b, w, r = lambda_d_adj_inv(c, p1, p0)
    return w, r, b


def hat_lambda_d(c: DiscreteConnection, q: PointQ, p: CovectorQ) -> TrivializedMomentumPoint:
    """``T*Q -> Q x Sigma* x g*``: ``(q, w, r) -> (q, w + H^T r, r)``."""
    c.space.check_covector(p)
    return TrivializedMomentumPoint(q, as_vector(p.w + c.h_dSigma_adj(p.r)), p.r)


def hat_lambda_d_inv(c: DiscreteConnection, q: PointQ, w, mu) -> tuple[PointQ, CovectorQ]:
    w = as_vector(w, c.space.dim_sigma, "w")
    return q, c.space.covector(w - c.h_dSigma_adj(mu), mu)


def hat_lambda_d_adj(c: DiscreteConnection, p1: CovectorQ, x1, xi1) -> tuple[CovectorQ, PointQ]:
    """Pullback of a covector ``(p1, x1, xi1)`` on ``Q x Sigma* x g*`` to ``T*Q``."""
    x1 = as_vector(x1, c.space.dim_sigma, "x1")
    return p1, c.space.point(x1, c.h_dSigma(x1) + as_vector(xi1, None, "xi1"))


def hat_lambda_d_adj_inv(c: DiscreteConnection, p1: CovectorQ, q1: PointQ):
    return p1, q1.x, as_vector(q1.g - c.h_dSigma(q1.x))


def check_lambda_d(c: DiscreteConnection, p: CovectorQ, q: PointQ):
    """Factor-swapped :func:`hat_lambda_d` on ``Q* x Q``."""
    m = hat_lambda_d(c, q, p)
    return m.w, m.mu, q


def check_lambda_d_inv(c: DiscreteConnection, w, mu, q: PointQ):
    q, p = hat_lambda_d_inv(c, q, w, mu)
    return p, q


def check_lambda_d_adj(c: DiscreteConnection, x1, xi1, p1: CovectorQ):
    p, q = hat_lambda_d_adj(c, p1, x1, xi1)
    return q, p


def check_lambda_d_adj_inv(c: DiscreteConnection, q1: PointQ, p1: CovectorQ):
    p, x, xi = hat_lambda_d_adj_inv(c, p1, q1)
    return x, xi, p


# --------------------------------------------------------------------------
# reduced spaces


@dataclass(frozen=True, eq=False)
class ReducedState:
    """A point ``(x, w, mu)`` of ``(T*Q)/G`` in the trivialization."""

    x: np.ndarray
    w: np.ndarray
    mu: np.ndarray

    def flat(self) -> np.ndarray:
        return np.concatenate([self.x, self.w, self.mu])


@dataclass(frozen=True, eq=False)
class ReducedStepPlus:
    """A reduced ``(+)`` pair: ``[q0]`` with ``(w0, mu0)`` next to ``q1`` with ``(w1, mu1)``."""

    x0: np.ndarray
    w0: np.ndarray
    mu0: np.ndarray
    q1: PointQ
    w1: np.ndarray
    mu1: np.ndarray


@dataclass(frozen=True, eq=False)
class ReducedStepMinus:
    q0: PointQ
    w0: np.ndarray
    mu0: np.ndarray
    x1: np.ndarray
    w1: np.ndarray
    mu1: np.ndarray


@dataclass(frozen=True, eq=False)
class ReducedCovectorPlus:
    """``(x0, w1, mu1; p, x1, xi)``: base point then fiber covector."""

    x0: np.ndarray
    w1: np.ndarray
    mu1: np.ndarray
    p: CovectorQ
    x1: np.ndarray
    xi: np.ndarray

    def flat(self) -> np.ndarray:
        return np.concatenate([self.x0, self.w1, self.mu1, self.p.flat(), self.x1, self.xi])


@dataclass(frozen=True, eq=False)
class ReducedCovectorMinus:
    """``(w0, mu0, x1; y, xi, p)`` where ``y`` pairs with ``w0`` and ``p`` with ``q1``."""

    w0: np.ndarray
    mu0: np.ndarray
    x1: np.ndarray
    y: np.ndarray
    xi: np.ndarray
    p: CovectorQ

    def flat(self) -> np.ndarray:
        return np.concatenate([self.w0, self.mu0, self.x1, self.y, self.xi, self.p.flat()])


def reduced_omega_flat_plus(c: DiscreteConnection, X: ReducedStepPlus) -> ReducedCovectorPlus:
    sp = c.space
    x0 = as_vector(X.x0, sp.dim_sigma, "x0")
    mu0 = as_vector(X.mu0, sp.dim_g, "mu0")
    sp.check_point(X.q1)
    p = sp.covector(np.asarray(X.w0) - c.h_dSigma_adj(mu0), mu0)
    return ReducedCovectorPlus(
        x0,
        as_vector(X.w1, sp.dim_sigma, "w1"),
        as_vector(X.mu1, sp.dim_g, "mu1"),
        p,
        X.q1.x,
        as_vector(X.q1.g - c.h_dSigma(X.q1.x)),
    )


def reduced_omega_flat_minus(c: DiscreteConnection, X: ReducedStepMinus) -> ReducedCovectorMinus:
    sp = c.space
    x1 = as_vector(X.x1, sp.dim_sigma, "x1")
    mu1 = as_vector(X.mu1, sp.dim_g, "mu1")
    sp.check_point(X.q0)
    p = sp.covector(-np.asarray(X.w1) + c.h_dSigma_adj(mu1), -mu1)
    return ReducedCovectorMinus(
        as_vector(X.w0, sp.dim_sigma, "w0"),
        as_vector(X.mu0, sp.dim_g, "mu0"),
        x1,
        as_vector(-X.q0.x),
        as_vector(-X.q0.g + c.h_dSigma(X.q0.x)),
        p,
    )


def reduced_dirac_diff_plus(L: DiscreteLagrangian, c: DiscreteConnection, x0, x1, g1) -> ReducedCovectorPlus:
    """Reduced ``(+)`` Dirac differential at ``(x0, x1, g1)``.

    The partials of ``L_d`` are taken at ``((x0, 0), (x1, g1 + h_d0(x0, x1)))``.
    """
    sp = c.space
    x0 = as_vector(x0, sp.dim_sigma, "x0")
    x1 = as_vector(x1, sp.dim_sigma, "x1")
    g1 = as_vector(g1, sp.dim_g, "g1")
    q0 = sp.point(x0, np.zeros(sp.dim_g))
    D1, D2 = L.gradient(q0, sp.point(x1, g1 + c.h_d0(x0, x1)))
    return ReducedCovectorPlus(
        x0,
        as_vector(D2.w + c.h_dSigma_adj(D2.r)),
        D2.r,
        -D1,
        x1,
        as_vector(g1 + c.h_dQ(q0)),
    )


def reduced_dirac_diff_minus(L: DiscreteLagrangian, c: DiscreteConnection, x0, g0, x1) -> ReducedCovectorMinus:
    """Reduced ``(-)`` Dirac differential; partials at ``((x0, g0 + h_d0(x1, x0)), (x1, 0))``."""
    sp = c.space
    x0 = as_vector(x0, sp.dim_sigma, "x0")
    g0 = as_vector(g0, sp.dim_g, "g0")
    x1 = as_vector(x1, sp.dim_sigma, "x1")
    q1 = sp.point(x1, np.zeros(sp.dim_g))
    D1, D2 = L.gradient(sp.point(x0, g0 + c.h_d0(x1, x0)), q1)
    return ReducedCovectorMinus(
        as_vector(-D1.w - c.h_dSigma_adj(D1.r)),
        as_vector(-D1.r),
        x1,
        as_vector(-x0),
        as_vector(-g0 - c.h_dQ(q1)),
        -D2,
    )


def in_reduced_structure_plus(c: DiscreteConnection, X: ReducedStepPlus, alpha: ReducedCovectorPlus) -> float:
    """Max-norm distance between ``alpha`` and the reduced ``(+)`` structure image of ``X``."""
    return float(np.max(np.abs(alpha.flat() - reduced_omega_flat_plus(c, X).flat()), initial=0.0))


def in_reduced_structure_minus(c: DiscreteConnection, X: ReducedStepMinus, alpha: ReducedCovectorMinus) -> float:
    return float(np.max(np.abs(alpha.flat() - reduced_omega_flat_minus(c, X).flat()), initial=0.0))
