"""Discrete Lagrangians, their symmetry-reduced versions, energies and actions.

Reduced Lagrangians are evaluated in the canonical section: the ``(+)``
version puts the first configuration at zero fiber coordinate, the ``(-)``
version puts the second one there.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .connection import DiscreteConnection
from .spaces import CovectorQ, PointQ, TrivializedSpace, as_vector, pair

FD_STEP = np.cbrt(np.finfo(float).eps)


class GradientError(ArithmeticError):
    """A finite-difference gradient hit a non-finite Lagrangian value."""


class InvarianceError(ValueError):
    """The Lagrangian is not invariant under the fiber translation action."""


def _fd_partials(f: Callable[[np.ndarray], float], u: np.ndarray, label: str) -> np.ndarray:
    # central differences, per-coordinate relative step
    u = np.array(u, dtype=float)
    out = np.empty_like(u)
    for i in range(u.size):
        h = FD_STEP * max(1.0, abs(u[i]))
        up, um = u.copy(), u.copy()
        up[i] += h
        um[i] -= h
        fp, fm = f(up), f(um)
        if not (np.isfinite(fp) and np.isfinite(fm)):
            raise GradientError(f"non-finite value differentiating {label} coordinate {i}")
        out[i] = (fp - fm) / (up[i] - um[i])
    return out


@dataclass(frozen=True)
class DiscreteLagrangian:
    """A scalar ``L_d(q0, q1)`` on ``Q x Q``.

    ``grad`` is optional; when absent the partials come from central
    finite differences (:func:`grad_fd`).  Set ``invariant`` when ``L_d`` is
    unchanged by simultaneous fiber translation of both arguments.
    """

    eval: Callable[[PointQ, PointQ], float]
    space: TrivializedSpace
    grad: Optional[Callable[[PointQ, PointQ], tuple[CovectorQ, CovectorQ]]] = None
    invariant: bool = False
    # optional array-level kernels in increment form: (u0, du) -> value / (D1, D2)
    # at (u0, u0 + du), flat (x, g) layout; the steppers prefer these
    step_eval: Optional[Callable[[np.ndarray, np.ndarray], float]] = None
    step_grad: Optional[Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]] = None
    # (u0, du) -> (dD1/d du, dD2/d du), used as the Newton Jacobian
    step_hess: Optional[Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]] = None

    def __call__(self, q0: PointQ, q1: PointQ) -> float:
        return float(self.eval(q0, q1))

    def gradient(self, q0: PointQ, q1: PointQ) -> tuple[CovectorQ, CovectorQ]:
        """``(D1 L_d, D2 L_d)`` at ``(q0, q1)``."""
        if self.grad is not None:
            return self.grad(q0, q1)
        if self.step_grad is not None:
            sp = self.space
            u0 = q0.flat()
            d0, d1 = self.step_grad(u0, q1.flat() - u0)
            return sp.covector_from_flat(d0), sp.covector_from_flat(d1)
        return grad_fd(self, q0, q1)

    @property
    def has_gradient(self) -> bool:
        return self.grad is not None or self.step_grad is not None

    def value_step(self, u0: np.ndarray, du: np.ndarray) -> float:
        """``L_d(u0, u0 + du)`` on flat arrays."""
        if self.step_eval is not None:
            return float(self.step_eval(u0, du))
        sp = self.space
        return float(self.eval(sp.point_from_flat(u0), sp.point_from_flat(u0 + du)))

    def gradient_step(self, u0: np.ndarray, du: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """``(D1, D2)`` at ``(u0, u0 + du)`` on flat arrays."""
        if self.step_grad is not None:
            return self.step_grad(u0, du)
        sp = self.space
        D1, D2 = self.gradient(sp.point_from_flat(u0), sp.point_from_flat(u0 + du))
        return D1.flat(), D2.flat()


def grad_fd(L: DiscreteLagrangian, q0: PointQ, q1: PointQ) -> tuple[CovectorQ, CovectorQ]:
    sp = L.space
    n = sp.dim_q
    u = np.concatenate([q0.flat(), q1.flat()])

    def f(v):
        return L.eval(sp.point_from_flat(v[:n]), sp.point_from_flat(v[n:]))

    d = _fd_partials(f, u, "L_d")
    return sp.covector_from_flat(d[:n]), sp.covector_from_flat(d[n:])


def check_invariance(L: DiscreteLagrangian, samples: int = 16, seed: int = 0, rtol: float = 1e-10) -> None:
    """Sample random configurations and shifts; raise :class:`InvarianceError` on a mismatch."""
    sp = L.space
    if sp.dim_g == 0:
        return
    rng = np.random.default_rng(seed)
    for _ in range(samples):
        q0 = sp.point(rng.uniform(-1, 1, sp.dim_sigma), rng.uniform(-1, 1, sp.dim_g))
        q1 = sp.point(rng.uniform(-1, 1, sp.dim_sigma), rng.uniform(-1, 1, sp.dim_g))
        gr = rng.uniform(-3, 3, sp.dim_g)
        a = L(q0, q1)
        b = L(sp.point(q0.x, q0.g + gr), sp.point(q1.x, q1.g + gr))
        if not abs(a - b) <= rtol * max(1.0, abs(a)):
            raise InvarianceError(f"L_d changes under a fiber shift: {a!r} vs {b!r}")


def _require_invariant(L: DiscreteLagrangian, audit: bool) -> None:
    if not L.invariant:
        raise InvarianceError("reduction requires a Lagrangian declared invariant")
    if audit:
        check_invariance(L)


# --------------------------------------------------------------------------
# (+) reduced Lagrangian: l(x0, x1, g1) = L_d((x0, 0), (x1, g1 + h_d0(x0, x1)))


@dataclass(frozen=True)
class ReducedLagrangianPlus:
    base: DiscreteLagrangian
    conn: DiscreteConnection
    audit: bool = True

    def __post_init__(self):
        _require_invariant(self.base, self.audit)

    @property
    def space(self) -> TrivializedSpace:
        return self.base.space

    def lift(self, x0, x1, g1) -> tuple[PointQ, PointQ]:
        """Section representatives ``((x0, 0), (x1, g1 + h_d0(x0, x1)))``."""
        sp = self.space
        return (
            sp.point(x0, np.zeros(sp.dim_g)),
            sp.point(x1, as_vector(g1, sp.dim_g) + self.conn.h_d0(x0, x1)),
        )

    def __call__(self, x0, x1, g1) -> float:
        return reduced_eval_plus(self, x0, x1, g1)


@dataclass(frozen=True)
class ReducedLagrangianMinus:
    base: DiscreteLagrangian
    conn: DiscreteConnection
    audit: bool = True

    def __post_init__(self):
        _require_invariant(self.base, self.audit)

    @property
    def space(self) -> TrivializedSpace:
        return self.base.space

    def lift(self, x0, g0, x1) -> tuple[PointQ, PointQ]:
        """Section representatives ``((x0, g0 + h_d0(x1, x0)), (x1, 0))``."""
        sp = self.space
        return (
            sp.point(x0, as_vector(g0, sp.dim_g) + self.conn.h_d0(x1, x0)),
            sp.point(x1, np.zeros(sp.dim_g)),
        )

    def __call__(self, x0, g0, x1) -> float:
        return reduced_eval_minus(self, x0, g0, x1)


def reduced_eval_plus(rl: ReducedLagrangianPlus, x0, x1, g1) -> float:
    return rl.base(*rl.lift(x0, x1, g1))


def reduced_eval_minus(rl: ReducedLagrangianMinus, x0, g0, x1) -> float:
    return rl.base(*rl.lift(x0, g0, x1))


def reduced_grad_plus(rl: ReducedLagrangianPlus, x0, x1, g1) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(dl/dx0, dl/dx1, dl/dg1)``.

    With an analytic base gradient the chain rule through ``h_d0`` is
    applied; otherwise the reduced function is differenced directly.
    """
    sp = rl.space
    ns, ng = sp.dim_sigma, sp.dim_g
    if not rl.base.has_gradient:
        u = np.concatenate([as_vector(x0, ns), as_vector(x1, ns), as_vector(g1, ng)])
        d = _fd_partials(lambda v: reduced_eval_plus(rl, v[:ns], v[ns:2 * ns], v[2 * ns:]), u, "l_d+")
        return d[:ns], d[ns:2 * ns], d[2 * ns:]
    D1, D2 = rl.base.gradient(*rl.lift(x0, x1, g1))
    H = rl.conn.H
    # l = L_d((x0,0),(x1, g1 + H(x1 - x0)))
    return D1.w - H.T @ D2.r, D2.w + H.T @ D2.r, D2.r.copy()


def reduced_grad_minus(rl: ReducedLagrangianMinus, x0, g0, x1) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(dl/dx0, dl/dg0, dl/dx1)`` of the ``(-)`` reduced Lagrangian."""
    sp = rl.space
    ns, ng = sp.dim_sigma, sp.dim_g
    if not rl.base.has_gradient:
        u = np.concatenate([as_vector(x0, ns), as_vector(g0, ng), as_vector(x1, ns)])
        d = _fd_partials(lambda v: reduced_eval_minus(rl, v[:ns], v[ns:ns + ng], v[ns + ng:]), u, "l_d-")
        return d[:ns], d[ns:ns + ng], d[ns + ng:]
    D1, D2 = rl.base.gradient(*rl.lift(x0, g0, x1))
    H = rl.conn.H
    # l = L_d((x0, g0 + H(x0 - x1)), (x1, 0))
    return D1.w + H.T @ D1.r, D1.r.copy(), D2.w - H.T @ D1.r


def unreduced_partials_from_reduced(rl: ReducedLagrangianPlus, x0, x1, g1) -> tuple[CovectorQ, CovectorQ]:
    """Recover ``(D1 L_d, D2 L_d)`` at the lifted point from the reduced partials."""
    c = rl.conn
    lx0, lx1, lg1 = reduced_grad_plus(rl, x0, x1, g1)
    sp = rl.space
    dq0 = sp.covector(lx0 - c.pair_h_d0_first(lg1), -c.pair_h_d_fiber(lg1))
    dq1 = sp.covector(lx1 - c.pair_h_d0_second(lg1), lg1)
    return dq0, dq1


def unreduced_partials_from_reduced_minus(rl: ReducedLagrangianMinus, x0, g0, x1) -> tuple[CovectorQ, CovectorQ]:
    c = rl.conn
    lx0, lg0, lx1 = reduced_grad_minus(rl, x0, g0, x1)
    sp = rl.space
    dq0 = sp.covector(lx0 - c.pair_h_d0_second(lg0), lg0)
    dq1 = sp.covector(lx1 - c.pair_h_d0_first(lg0), -c.pair_h_d_fiber(lg0))
    return dq0, dq1


# --------------------------------------------------------------------------
# generalized energies and Lagrange-Pontryagin actions


def generalized_energy_plus(L: DiscreteLagrangian, q0: PointQ, q0p: PointQ, q1: PointQ, p1: CovectorQ) -> float:
    return L(q0, q0p) + pair(p1, q1 - q0p)


def generalized_energy_minus(L: DiscreteLagrangian, q1m: PointQ, q1: PointQ, p0: CovectorQ, q0: PointQ) -> float:
    return L(q1m, q1) + pair(p0, q0 - q1m)


def reduced_energy_plus(rl: ReducedLagrangianPlus, x0, x0p, g0p, q1: PointQ, w1, mu1) -> float:
    c = rl.conn
    sp = rl.space
    w1 = as_vector(w1, sp.dim_sigma)
    mu1 = as_vector(mu1, sp.dim_g)
    x0p = as_vector(x0p, sp.dim_sigma)
    g0p = as_vector(g0p, sp.dim_g)
    hd = c.h_d(sp.point(x0, np.zeros(sp.dim_g)), x0p)
    return (
        rl(x0, x0p, g0p)
        + float((w1 - c.h_dSigma_adj(mu1)) @ (q1.x - x0p))
        + float(mu1 @ (q1.g - g0p - hd))
    )


def reduced_energy_minus(rl: ReducedLagrangianMinus, x1m, g1m, x1, w0, mu0, q0: PointQ) -> float:
    c = rl.conn
    sp = rl.space
    w0 = as_vector(w0, sp.dim_sigma)
    mu0 = as_vector(mu0, sp.dim_g)
    x1m = as_vector(x1m, sp.dim_sigma)
    g1m = as_vector(g1m, sp.dim_g)
    hd = c.h_d(sp.point(x1, np.zeros(sp.dim_g)), x1m)
    return (
        rl(x1m, g1m, x1)
        + float((w0 - c.h_dSigma_adj(mu0)) @ (q0.x - x1m))
        + float(mu0 @ (q0.g - g1m - hd))
    )


def action_plus(L: DiscreteLagrangian, q: Sequence[PointQ], qp: Sequence[PointQ], p: Sequence[CovectorQ]) -> float:
    """Sum over ``k < N`` of ``L_d(q_k, q_k^+) + <p_{k+1}, q_{k+1} - q_k^+>``.

    ``q`` has ``N + 1`` entries, ``qp`` has ``N`` and ``p[k]`` holds ``p_{k+1}``.
    """
    n = len(qp)
    if len(q) != n + 1 or len(p) != n:
        raise ValueError("need len(q) == len(qp) + 1 == len(p) + 1")
    return sum(generalized_energy_plus(L, q[k], qp[k], q[k + 1], p[k]) for k in range(n))


def action_minus(L: DiscreteLagrangian, q: Sequence[PointQ], qm: Sequence[PointQ], p: Sequence[CovectorQ]) -> float:
    """Sum over ``k < N`` of ``L_d(q_{k+1}^-, q_{k+1}) + <p_k, q_k - q_{k+1}^->``; ``p[k]`` holds ``p_k``."""
    n = len(qm)
    if len(q) != n + 1 or len(p) != n:
        raise ValueError("need len(q) == len(qm) + 1 == len(p) + 1")
    return sum(generalized_energy_minus(L, qm[k], q[k + 1], p[k], q[k]) for k in range(n))


@dataclass(frozen=True)
class ReducedPontryaginPath:
    """Reduced ``(+)`` Pontryagin data with absolute fiber coordinates.

    ``x``, ``g``: ``N + 1`` rows; ``xp``, ``gp``, ``w``, ``mu``: ``N`` rows,
    where ``w[k]``, ``mu[k]`` are the trivialized momenta at step ``k + 1``.
    """

    x: np.ndarray
    g: np.ndarray
    xp: np.ndarray
    gp: np.ndarray
    w: np.ndarray
    mu: np.ndarray

    @property
    def n_steps(self) -> int:
        return self.xp.shape[0]


def reduced_energy_term(rl: ReducedLagrangianPlus, path: ReducedPontryaginPath, k: int) -> float:
    sp = rl.space
    # the quotient representative puts q_k at zero fiber, so q_{k+1} is taken relative to g_k
    q1 = sp.point(path.x[k + 1], path.g[k + 1] - path.g[k])
    return reduced_energy_plus(rl, path.x[k], path.xp[k], path.gp[k], q1, path.w[k], path.mu[k])


def reduced_action_plus(rl: ReducedLagrangianPlus, path: ReducedPontryaginPath) -> float:
    return sum(reduced_energy_term(rl, path, k) for k in range(path.n_steps))
