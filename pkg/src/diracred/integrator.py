"""Newton solver and time steppers for discrete Lagrange-Dirac systems.

Unreduced steppers advance ``(q_k, p_k)`` on ``T*Q``; reduced steppers
advance ``(x_k, w_k, mu_k)`` and a fiber increment used to reconstruct the
absolute group coordinate.  Internally each step solves for the increment
``q_k^+ - q_k`` rather than ``q_k^+`` itself, which keeps the velocity
``(q_k^+ - q_k)/h`` free of cancellation.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .connection import DiscreteConnection
from .lagrangian import (
    DiscreteLagrangian,
    ReducedLagrangianMinus,
    ReducedLagrangianPlus,
    ReducedPontryaginPath,
    _fd_partials,
    reduced_energy_term,
)
from .spaces import CovectorQ, PointQ, as_vector
from .tulczyjew import ReducedState

EPS = np.finfo(float).eps


class SolverError(RuntimeError):
    """Base class for Newton failures; ``step`` is set by the steppers."""

    def __init__(self, msg: str, residual_norm: float = float("nan"), step: Optional[int] = None):
        super().__init__(msg)
        self.residual_norm = residual_norm
        self.step = step

    def __str__(self):
        base = super().__str__()
        return base if self.step is None else f"step {self.step}: {base}"


class SingularJacobian(SolverError):
    pass


class NoConvergence(SolverError):
    pass


@dataclass(frozen=True)
class NewtonConfig:
    """``tol`` is the max-norm residual target.

    Residuals built from large terms cannot always be driven below ``tol``
    in double precision; the solver then also accepts a residual that has
    stopped decreasing once it is within ``floor_factor * eps`` of the
    ``scale`` passed by the caller (the size of the terms being balanced).
    """

    tol: float = 1e-12
    max_iter: int = 50
    fd_jacobian_step: float = float(np.cbrt(EPS))
    floor_factor: float = 64.0
    stall_limit: int = 3

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if not self.fd_jacobian_step > 0:
            raise ValueError("fd_jacobian_step must be positive")
        if self.stall_limit < 1:
            raise ValueError("stall_limit must be at least 1")


@dataclass
class NewtonResult:
    u: np.ndarray
    iterations: int
    residual_norm: float
    residual: np.ndarray


def fd_jacobian(residual: Callable, u: np.ndarray, F: np.ndarray, step: float) -> np.ndarray:
    """Forward-difference Jacobian around ``u`` given ``F = residual(u)``."""
    n = u.size
    J = np.empty((F.size, n))
    for i in range(n):
        du = step * max(1.0, abs(u[i]))
        v = u.copy()
        v[i] += du
        J[:, i] = (residual(v) - F) / (v[i] - u[i])
    return J


def newton(residual, u0, cfg: NewtonConfig | None = None, jacobian=None, scale: float = 1.0) -> NewtonResult:
    """Newton iteration returning the best iterate with diagnostics.

    Full Newton steps are always taken; a step that does not lower the
    residual is kept as the next iterate but the best one seen is returned.
    """
    cfg = cfg or NewtonConfig()
    u = np.array(u0, dtype=float)
    F = np.asarray(residual(u), dtype=float)
    if not np.all(np.isfinite(F)):
        raise SolverError("residual is not finite at the initial guess")
    norm = float(np.max(np.abs(F), initial=0.0))
    best = (u, F, norm)
    floor = cfg.floor_factor * EPS * max(1.0, scale)
    it = 0
    idle = 0
    while best[2] > cfg.tol:
        if it >= cfg.max_iter:
            raise NoConvergence(f"no convergence after {it} iterations, |F| = {best[2]:.3e}", best[2])
        J = jacobian(u) if jacobian is not None else fd_jacobian(residual, u, F, cfg.fd_jacobian_step)
        J = np.atleast_2d(np.asarray(J, dtype=float))
        cond = np.linalg.cond(J) if J.size else 1.0
        if not np.isfinite(cond) or cond > 1.0 / (1e3 * EPS):
            raise SingularJacobian(f"Jacobian condition estimate {cond:.3e}", norm)
        # round-off level of F: the size of the terms J u that cancel in it
        floor = max(floor, cfg.floor_factor * EPS * float(np.max(np.abs(J) @ np.abs(u), initial=0.0)))
        u = u + np.linalg.solve(J, -F)
        F = np.asarray(residual(u), dtype=float)
        if not np.all(np.isfinite(F)):
            raise SolverError("residual became non-finite", best[2])
        new_norm = float(np.max(np.abs(F), initial=0.0))
        it += 1
        contracting = new_norm <= 0.5 * norm
        norm = new_norm
        if new_norm < best[2]:
            best = (u, F, new_norm)
            idle = 0
        else:
            idle += 1
        if not contracting:
            # no more progress: fine at the round-off floor, a failure above it
            if best[2] <= floor:
                break
            if idle >= cfg.stall_limit:
                raise NoConvergence(f"Newton stalled at |F| = {best[2]:.3e} (round-off floor {floor:.1e})", best[2])
    return NewtonResult(best[0], it, best[2], best[1])


def newton_solve(residual, u0, cfg: NewtonConfig | None = None, jacobian=None) -> np.ndarray:
    """Solve ``residual(u) = 0`` from ``u0``; see :func:`newton`."""
    return newton(residual, u0, cfg, jacobian).u


# --------------------------------------------------------------------------
# unreduced (+)/(-) Lagrange-Dirac steps


def _step_ld(L: DiscreteLagrangian, u0, p0, guess, cfg):
    def F(d):
        return p0 + L.gradient_step(u0, d)[0]

    jac = None
    if L.step_hess is not None:
        def jac(d):
            return L.step_hess(u0, d)[0]

    res = newton(F, guess, cfg, jacobian=jac, scale=max(1.0, float(np.max(np.abs(p0), initial=0.0))))
    D1, D2 = L.gradient_step(u0, res.u)
    return res.u, D2, res


def step_ld_plus(L: DiscreteLagrangian, q_k: PointQ, p_k: CovectorQ, cfg: NewtonConfig | None = None, guess=None):
    """``(+)`` step: ``p_k = -D1 L_d(q_k, q_k^+)``, ``q_{k+1} = q_k^+``, ``p_{k+1} = D2 L_d``.

    ``guess`` is an optional increment seed for ``q_{k+1} - q_k``.
    """
    sp = L.space
    u0 = q_k.flat()
    d0 = np.zeros_like(u0) if guess is None else np.asarray(guess, dtype=float)
    d, D2, _ = _step_ld(L, u0, p_k.flat(), d0, cfg)
    return sp.point_from_flat(u0 + d), sp.covector_from_flat(D2)


def step_ld_minus(L: DiscreteLagrangian, q_k: PointQ, p_k: CovectorQ, cfg: NewtonConfig | None = None, guess=None):
    """``(-)`` step: ``q_{k+1}^- = q_k``, ``p_k = -D1 L_d(q_{k+1}^-, q_{k+1})``, ``p_{k+1} = D2 L_d``.

    Without constraints both steppers are the discrete Euler-Lagrange map,
    but the unknown here is ``q_{k+1}`` rather than ``q_k^+``.
    """
    sp = L.space
    qm = q_k.flat()
    d0 = np.zeros_like(qm) if guess is None else np.asarray(guess, dtype=float)
    d, D2, _ = _step_ld(L, qm, p_k.flat(), d0, cfg)
    return sp.point_from_flat(qm + d), sp.covector_from_flat(D2)


# --------------------------------------------------------------------------
# reduced (+)/(-) Lagrange-Poincare-Dirac steps


@dataclass
class StepInfo:
    """Per-step by-products: the solved implicit unknowns and diagnostics."""

    xp: np.ndarray
    gp: np.ndarray
    energy: float
    struct_residual: float
    iterations: int
    cancellation: float = 0.0


def _lift_plus(c: DiscreteConnection, dx, gp):
    # increment from (x0, 0) to (x0 + dx, gp + h_d0(x0, x0 + dx))
    return np.concatenate([dx, gp + c.h_dSigma(dx)])


def _partials_plus(L, c, u0, dx, gp):
    """Reduced partials of l_{d+} at ``(x0, x0 + dx, gp)`` plus the base gradient."""
    ns = c.space.dim_sigma
    D1, D2 = L.gradient_step(u0, _lift_plus(c, dx, gp))
    nu = D2[ns:]
    lx0 = D1[:ns] - c.h_dSigma_adj(nu)
    lx1 = D2[:ns] + c.h_dSigma_adj(nu)
    return lx0, lx1, nu, D1, D2


MOMENTUM_MODES = ("conserved", "evaluated")


def _next_mu(evaluated, mu_k, mode):
    # The implicit block imposes dl/dg = mu_k, so mu_{k+1} = dl/dg = mu_k.
    # "conserved" assigns that value; "evaluated" takes dl/dg at the Newton
    # iterate, which also carries the solver's residual.
    if mode == "conserved":
        return np.array(mu_k, dtype=float)
    if mode == "evaluated":
        return np.array(evaluated, dtype=float)
    raise ValueError(f"momentum must be one of {MOMENTUM_MODES}, got {mode!r}")


def _seed(guess, n):
    return np.zeros(n) if guess is None else np.asarray(guess, dtype=float)


def _lpd_plus(rl: ReducedLagrangianPlus, x_k, w_k, mu_k, cfg, guess=None, momentum="conserved"):
    L, c = rl.base, rl.conn
    sp = c.space
    ns = sp.dim_sigma
    u0 = np.concatenate([x_k, np.zeros(sp.dim_g)])
    target_w = w_k - c.h_dSigma_adj(mu_k)

    def F(u):
        lx0, _, nu, _, _ = _partials_plus(L, c, u0, u[:ns], u[ns:])
        r3 = -lx0 + c.pair_h_d0_first(nu) - target_w
        r4 = c.pair_h_d_fiber(nu) - mu_k
        return np.concatenate([r3, r4])

    jac = None
    if L.step_hess is not None:
        H = c.H
        P = np.block([[np.eye(ns), np.zeros((ns, sp.dim_g))], [H, np.eye(sp.dim_g)]])

        def jac(u):
            J1, J2 = L.step_hess(u0, _lift_plus(c, u[:ns], u[ns:]))
            dnu = J2[ns:] @ P
            dlx0 = J1[:ns] @ P - H.T @ dnu
            return np.vstack([-dlx0 - H.T @ dnu, dnu])

    scale = max(1.0, float(np.max(np.abs(np.concatenate([w_k, mu_k])), initial=0.0)))
    res = newton(F, _seed(guess, sp.dim_q), cfg, jacobian=jac, scale=scale)
    dx, gp = res.u[:ns], res.u[ns:]
    lx0, lx1, nu, D1, D2 = _partials_plus(L, c, u0, dx, gp)
    w1 = lx1 - c.pair_h_d0_second(nu) + c.h_dSigma_adj(nu)
    mu1 = _next_mu(nu, mu_k, momentum)
    x1 = x_k + dx
    g_inc = gp + c.h_dQ(sp.point(x_k, np.zeros(sp.dim_g))) + c.h_dSigma(x1)

    # reduced Dirac-structure residual of ([X^k], [D^+ L](x_k, x_k^+, g_k^+))
    alpha_w1 = D2[:ns] + c.h_dSigma_adj(D2[ns:])
    alpha_xi = gp + c.h_dQ(sp.point(x_k, np.zeros(sp.dim_g)))
    parts = [
        w1 - alpha_w1,
        mu1 - D2[ns:],
        (w_k - c.h_dSigma_adj(mu_k)) + D1[:ns],
        mu_k + D1[ns:],
        (g_inc - c.h_dSigma(x1)) - alpha_xi,
    ]
    sres = float(max(np.max(np.abs(p), initial=0.0) for p in parts))
    info = StepInfo(
        xp=x1,
        gp=gp,
        energy=L.value_step(u0, _lift_plus(c, dx, gp)),
        struct_residual=sres,
        iterations=res.iterations,
        cancellation=float(np.max(np.abs(w1 - lx1), initial=0.0)),
    )
    return x1, g_inc, w1, mu1, info


def step_lpd_plus(rl: ReducedLagrangianPlus, x_k, w_k, mu_k, cfg: NewtonConfig | None = None, guess=None, momentum: str = "conserved"):
    """One reduced ``(+)`` step; returns ``(x_{k+1}, g_inc, w_{k+1}, mu_{k+1})``.

    ``guess`` seeds the unknowns ``(x_k^+ - x_k, g_k^+)``.
    """
    sp = rl.space
    x_k = as_vector(x_k, sp.dim_sigma, "x_k")
    w_k = as_vector(w_k, sp.dim_sigma, "w_k")
    mu_k = as_vector(mu_k, sp.dim_g, "mu_k")
    x1, g_inc, w1, mu1, _ = _lpd_plus(rl, x_k, w_k, mu_k, cfg, guess, momentum)
    return x1, g_inc, w1, mu1


def _lift_minus(c: DiscreteConnection, dx, gm):
    # increment from (x0, gm + h_d0(x1, x0)) to (x1, 0), dx = x1 - x0
    return np.concatenate([dx, -(gm - c.h_dSigma(dx))])


def _partials_minus(L, c, x0, dx, gm):
    ns = c.space.dim_sigma
    u0 = np.concatenate([x0, gm - c.h_dSigma(dx)])
    D1, D2 = L.gradient_step(u0, _lift_minus(c, dx, gm))
    lg0 = D1[ns:]
    lx0 = D1[:ns] + c.h_dSigma_adj(lg0)
    lx1 = D2[:ns] - c.h_dSigma_adj(lg0)
    return lx0, lg0, lx1, D1, D2, u0


def _lpd_minus(rl: ReducedLagrangianMinus, x_k, w_k, mu_k, cfg, guess=None, momentum="conserved"):
    # unknowns (x_{k+1} - x_k, g_{k+1}^-) with x_{k+1}^- = x_k
    L, c = rl.base, rl.conn
    sp = c.space
    ns = sp.dim_sigma

    def F(u):
        lx0, lg0, _, _, _, _ = _partials_minus(L, c, x_k, u[:ns], u[ns:])
        return np.concatenate([-lx0 - w_k, -lg0 - mu_k])

    jac = None
    if L.step_hess is not None:
        H = c.H
        # invariance: the gradient does not see the fiber of the first point
        P = np.block([[np.eye(ns), np.zeros((ns, sp.dim_g))], [H, -np.eye(sp.dim_g)]])

        def jac(u):
            dx, gm = u[:ns], u[ns:]
            J1, _ = L.step_hess(np.concatenate([x_k, gm - c.h_dSigma(dx)]), _lift_minus(c, dx, gm))
            dlg0 = J1[ns:] @ P
            dlx0 = J1[:ns] @ P + H.T @ dlg0
            return np.vstack([-dlx0, -dlg0])

    scale = max(1.0, float(np.max(np.abs(np.concatenate([w_k, mu_k])), initial=0.0)))
    res = newton(F, _seed(guess, sp.dim_q), cfg, jacobian=jac, scale=scale)
    dx, gm = res.u[:ns], res.u[ns:]
    lx0, lg0, lx1, D1, D2, u0 = _partials_minus(L, c, x_k, dx, gm)
    x1 = x_k + dx
    # dL/dx1 = dl/dx1 - <dl/dg0, h_d0(., 0)> and mu_{k+1} = -dl/dg0
    w1 = lx1 - c.pair_h_d0_first(lg0) + c.h_dSigma_adj(-lg0)
    mu1 = _next_mu(-lg0, mu_k, momentum)
    # fiber of q_k seen from q_{k+1} at zero fiber; the absolute increment is its negative
    g_rel = gm + c.h_dQ(sp.point(x1, np.zeros(sp.dim_g))) + c.h_dSigma(x_k)
    g_inc = -g_rel

    # reduced (-) structure residual at the solution
    xi_alpha = -gm - c.h_dQ(sp.point(x1, np.zeros(sp.dim_g)))
    parts = [
        w_k - (-D1[:ns] - c.h_dSigma_adj(D1[ns:])),
        mu_k + D1[ns:],
        (-g_rel + c.h_dSigma(x_k)) - xi_alpha,
        (-w1 + c.h_dSigma_adj(mu1)) + D2[:ns],
        -mu1 + D2[ns:],
    ]
    sres = float(max(np.max(np.abs(p), initial=0.0) for p in parts))
    info = StepInfo(
        xp=x1,
        gp=gm,
        energy=L.value_step(u0, _lift_minus(c, dx, gm)),
        struct_residual=sres,
        iterations=res.iterations,
        cancellation=float(np.max(np.abs(w1 - lx1), initial=0.0)),
    )
    return x1, g_inc, w1, mu1, info


def step_lpd_minus(rl: ReducedLagrangianMinus, x_k, w_k, mu_k, cfg: NewtonConfig | None = None, guess=None, momentum: str = "conserved"):
    """One reduced ``(-)`` step; returns ``(x_{k+1}, g_inc, w_{k+1}, mu_{k+1})``.

    The fiber increment is relative to the absolute coordinate of ``q_k``,
    so :func:`reconstruct` applies to both variants.
    """
    sp = rl.space
    x_k = as_vector(x_k, sp.dim_sigma, "x_k")
    w_k = as_vector(w_k, sp.dim_sigma, "w_k")
    mu_k = as_vector(mu_k, sp.dim_g, "mu_k")
    x1, g_inc, w1, mu1, _ = _lpd_minus(rl, x_k, w_k, mu_k, cfg, guess, momentum)
    return x1, g_inc, w1, mu1


def reconstruct(g_abs_k, g_inc, wrap: Optional[Callable] = None) -> np.ndarray:
    """``g_{k+1} = g_k + g_inc``, optionally passed through a chart normalization."""
    g = np.asarray(g_abs_k, dtype=float) + np.asarray(g_inc, dtype=float)
    return np.asarray(wrap(g), dtype=float) if wrap is not None else g


# --------------------------------------------------------------------------
# trajectories


@dataclass
class ReducedTrajectory:
    """Reduced orbit with absolute fiber coordinates and per-step diagnostics.

    ``x, w, mu, g_abs`` have one row per time; ``xp, gp`` hold the implicit
    unknowns of each step.  ``energy[k]`` is ``L_d(q_k, q_k^+)`` and is NaN
    on the last row, as are the other per-step diagnostics.
    """

    h: float
    x: np.ndarray
    w: np.ndarray
    mu: np.ndarray
    g_abs: np.ndarray
    xp: np.ndarray
    gp: np.ndarray
    energy: np.ndarray
    struct_residual: np.ndarray
    newton_iters: np.ndarray
    variant: str = "plus"
    error: Optional[SolverError] = None
    elapsed: float = 0.0

    @property
    def times(self) -> np.ndarray:
        return self.h * np.arange(self.x.shape[0])

    @property
    def n_steps(self) -> int:
        return self.x.shape[0] - 1

    @property
    def complete(self) -> bool:
        return self.error is None

    @property
    def states(self) -> list[ReducedState]:
        return [ReducedState(self.x[k], self.w[k], self.mu[k]) for k in range(self.x.shape[0])]

    @property
    def group_abs(self) -> np.ndarray:
        return self.g_abs

    def momentum_drift(self) -> float:
        return float(np.max(np.abs(self.mu - self.mu[0]), initial=0.0))


def run(
    rl,
    initial: ReducedState,
    g_abs_0,
    N: int,
    cfg: NewtonConfig | None = None,
    h: float = 1.0,
    variant: str | None = None,
    momentum: str = "conserved",
) -> ReducedTrajectory:
    """Iterate the reduced stepper ``N`` times.

    ``variant`` defaults to the type of ``rl``; ``momentum`` selects how
    ``mu_{k+1}`` is assigned (see :data:`MOMENTUM_MODES`).  A solver failure stops the
    run; the trajectory up to the last accepted step is returned with
    ``error`` set.
    """
    if variant is None:
        variant = "minus" if isinstance(rl, ReducedLagrangianMinus) else "plus"
    if variant not in ("plus", "minus"):
        raise ValueError(f"unknown variant {variant!r}")
    stepper = _lpd_minus if variant == "minus" else _lpd_plus
    sp = rl.space
    ns, ng = sp.dim_sigma, sp.dim_g
    if N < 0:
        raise ValueError("N must be nonnegative")
    x = np.full((N + 1, ns), np.nan)
    w = np.full((N + 1, ns), np.nan)
    mu = np.full((N + 1, ng), np.nan)
    g = np.full((N + 1, ng), np.nan)
    xp = np.full((N, ns), np.nan)
    gp = np.full((N, ng), np.nan)
    energy = np.full(N + 1, np.nan)
    sres = np.full(N + 1, np.nan)
    iters = np.zeros(N + 1, dtype=int)
    x[0] = as_vector(initial.x, ns, "x0")
    w[0] = as_vector(initial.w, ns, "w0")
    mu[0] = as_vector(initial.mu, ng, "mu0")
    g[0] = as_vector(g_abs_0, ng, "g0")

    err = None
    done = 0
    seed = None
    t0 = time.perf_counter()
    for k in range(N):
        try:
            x1, g_inc, w1, mu1, info = stepper(rl, x[k], w[k], mu[k], cfg, seed, momentum)
        except SolverError as e:
            e.step = k
            err = e
            break
        x[k + 1], w[k + 1], mu[k + 1] = x1, w1, mu1
        g[k + 1] = reconstruct(g[k], g_inc)
        xp[k], gp[k] = info.xp, info.gp
        energy[k], sres[k], iters[k] = info.energy, info.struct_residual, info.iterations
        # ballistic seed: repeat the last increment
        seed = np.concatenate([x1 - x[k], info.gp])
        done = k + 1
    elapsed = time.perf_counter() - t0

    sl = slice(0, done + 1)
    return ReducedTrajectory(
        h=float(h),
        x=x[sl],
        w=w[sl],
        mu=mu[sl],
        g_abs=g[sl],
        xp=xp[:done],
        gp=gp[:done],
        energy=energy[sl],
        struct_residual=sres[sl],
        newton_iters=iters[sl],
        variant=variant,
        error=err,
        elapsed=elapsed,
    )


@dataclass
class Trajectory:
    """Unreduced orbit ``(q_k, p_k)`` in flat ``(x, g)`` layout."""

    h: float
    q: np.ndarray
    p: np.ndarray
    energy: np.ndarray
    newton_iters: np.ndarray
    error: Optional[SolverError] = None
    elapsed: float = 0.0

    @property
    def times(self) -> np.ndarray:
        return self.h * np.arange(self.q.shape[0])


def run_unreduced(L: DiscreteLagrangian, q0: PointQ, p0: CovectorQ, N: int, cfg: NewtonConfig | None = None, h: float = 1.0) -> Trajectory:
    """Iterate the unreduced ``(+)`` Lagrange-Dirac step (the discrete Euler-Lagrange map)."""
    n = L.space.dim_q
    q = np.full((N + 1, n), np.nan)
    p = np.full((N + 1, n), np.nan)
    energy = np.full(N + 1, np.nan)
    iters = np.zeros(N + 1, dtype=int)
    q[0], p[0] = q0.flat(), p0.flat()
    seed = np.zeros(n)
    err = None
    done = 0
    t0 = time.perf_counter()
    for k in range(N):
        try:
            d, D2, res = _step_ld(L, q[k], p[k], seed, cfg)
        except SolverError as e:
            e.step = k
            err = e
            break
        q[k + 1] = q[k] + d
        p[k + 1] = D2
        energy[k] = L.value_step(q[k], d)
        iters[k] = res.iterations
        seed = d
        done = k + 1
    elapsed = time.perf_counter() - t0
    sl = slice(0, done + 1)
    return Trajectory(float(h), q[sl], p[sl], energy[sl], iters[sl], err, elapsed)


def project(traj: Trajectory, c: DiscreteConnection) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Section and trivialization of an unreduced orbit: ``(x, g_abs, w, mu)`` rows."""
    ns = c.space.dim_sigma
    x, g = traj.q[:, :ns], traj.q[:, ns:]
    r = traj.p[:, ns:]
    w = traj.p[:, :ns] + r @ c.H
    return x, g, w, r


# --------------------------------------------------------------------------
# variational audit


def path_from_trajectory(traj: ReducedTrajectory, c: DiscreteConnection) -> ReducedPontryaginPath:
    """Reduced Pontryagin data of a ``(+)`` trajectory.

    ``g`` holds absolute fiber values.  The step's ``g_k^+`` is stored
    relative to the section through ``q_k``.
    """
    n = traj.n_steps
    return ReducedPontryaginPath(
        x=traj.x.copy(),
        g=traj.g_abs.copy(),
        xp=traj.xp[:n].copy(),
        gp=traj.gp[:n].copy(),
        w=traj.w[1:].copy(),
        mu=traj.mu[1:].copy(),
    )


def _local_terms(rl, path: ReducedPontryaginPath, k: int) -> float:
    total = 0.0
    for j in (k - 1, k):
        if 0 <= j < path.n_steps:
            total += reduced_energy_term(rl, path, j)
    return total


def _richardson_derivative(f, h: float) -> float:
    # central difference with one Richardson extrapolation: O(h^4)
    d1 = (f(h) - f(-h)) / (2 * h)
    d2 = (f(h / 2) - f(-h / 2)) / h
    return (4 * d2 - d1) / 3


def variational_residual(rl: ReducedLagrangianPlus, traj: ReducedTrajectory, step: float = 1e-5, relative: bool = True) -> float:
    """Largest directional derivative of the reduced ``(+)`` action over interior variations.

    Each free variable (interior ``x_k, g_k``; every ``x_k^+, g_k^+,
    w_{k+1}, mu_{k+1}``) is varied on its own; the action is local, so only
    the one or two energy terms containing it are re-evaluated.  When
    ``relative`` is set the step is scaled by ``max(1, |value|)``.
    """
    if traj.variant != "plus":
        raise ValueError("the reduced action is built from the (+) variables")
    path = path_from_trajectory(traj, rl.conn)
    n = path.n_steps
    worst = 0.0

    def probe(arr, idx, terms):
        nonlocal worst
        base_val = arr[idx]
        hh = step * (max(1.0, abs(base_val)) if relative else 1.0)

        def f(e):
            arr[idx] = base_val + e
            try:
                return sum(reduced_energy_term(rl, path, j) for j in terms)
            finally:
                arr[idx] = base_val

        worst = max(worst, abs(_richardson_derivative(f, hh)))

    for k in range(1, n):
        terms = [k - 1, k]
        for i in range(path.x.shape[1]):
            probe(path.x[k], i, terms)
        for i in range(path.g.shape[1]):
            probe(path.g[k], i, terms)
    for k in range(n):
        for arr in (path.xp[k], path.gp[k], path.w[k], path.mu[k]):
            for i in range(arr.shape[0]):
                probe(arr, i, [k])
    return worst
