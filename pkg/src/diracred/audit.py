"""Invariant and property audit used by ``diracred check``.

Each check yields a :class:`Check` with the measured value and the bound.
The composition oracles below rebuild every reduced map from the
unreduced maps and trivializations, so they share no formula with the
direct local expressions in :mod:`diracred.tulczyjew`.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tulczyjew as tz
from .connection import DiscreteConnection
from .integrator import NewtonConfig, run, variational_residual
from .lagrangian import (
    DiscreteLagrangian,
    ReducedLagrangianPlus,
    generalized_energy_plus,
    grad_fd,
    reduced_energy_plus,
)
from .spaces import CovectorQ, PointQ, TrivializedMomentumPoint, TrivializedSpace, act, pair

MAP_TOL = 1e-12
REDUCED_TOL = 1e-10
STRUCT_TOL = 1e-9
VARIATION_TOL = 1e-6
GRAD_RTOL = 1e-6


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.value) and self.value <= self.tol)

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.value:.3e} (tol {self.tol:.0e})"


def _err(a, b) -> float:
    return float(np.max(np.abs(np.asarray(a, float) - np.asarray(b, float)), initial=0.0))


def _flat(*parts) -> np.ndarray:
    out = []
    for p in parts:
        out.append(p.flat() if isinstance(p, (PointQ, CovectorQ)) else np.atleast_1d(np.asarray(p, float)))
    return np.concatenate(out) if out else np.zeros(0)


def _rand_point(rng, sp: TrivializedSpace) -> PointQ:
    return sp.point(rng.uniform(-1, 1, sp.dim_sigma), rng.uniform(-1, 1, sp.dim_g))


def _rand_cov(rng, sp: TrivializedSpace):
    return sp.covector(rng.uniform(-1, 1, sp.dim_sigma), rng.uniform(-1, 1, sp.dim_g))


# --------------------------------------------------------------------------
# composition oracles


def oracle_reduced_omega_flat_plus(c: DiscreteConnection, X: tz.ReducedStepPlus) -> np.ndarray:
    sp = c.space
    q0 = sp.point(X.x0, np.zeros(sp.dim_g))
    z0 = tz.hat_lambda_d_inv(c, q0, X.w0, X.mu0)
    z1 = tz.hat_lambda_d_inv(c, X.q1, X.w1, X.mu1)
    b0, b1, f0, f1 = tz.omega_flat_plus(tz.CotangentPair(z0, z1))
    base = tz.hat_lambda_d(c, b0, b1)
    p, x1, xi = tz.hat_lambda_d_adj_inv(c, f0, f1)
    return _flat(base.q.x, base.w, base.mu, p, x1, xi)


def oracle_reduced_omega_flat_minus(c: DiscreteConnection, X: tz.ReducedStepMinus) -> np.ndarray:
    sp = c.space
    q1 = sp.point(X.x1, np.zeros(sp.dim_g))
    z0 = tz.hat_lambda_d_inv(c, X.q0, X.w0, X.mu0)
    z1 = tz.hat_lambda_d_inv(c, q1, X.w1, X.mu1)
    b0, b1, f0, f1 = tz.omega_flat_minus(tz.CotangentPair(z0, z1))
    w0, mu0, qq = tz.check_lambda_d(c, b0, b1)
    x, xi, p = tz.check_lambda_d_adj_inv(c, f0, f1)
    return _flat(w0, mu0, qq.x, x, xi, p)


def oracle_reduced_dirac_diff_plus(L: DiscreteLagrangian, c: DiscreteConnection, x0, x1, g1) -> np.ndarray:
    sp = c.space
    q0, q1 = tz.lambda_d_inv(c, sp.point(x0, np.zeros(sp.dim_g)), x1, g1)
    b0, b1, f0, f1 = tz.dirac_diff_plus(L, q0, q1)
    base = tz.hat_lambda_d(c, b0, b1)
    p, xx, xi = tz.hat_lambda_d_adj_inv(c, f0, f1)
    return _flat(base.q.x, base.w, base.mu, p, xx, xi)


def oracle_reduced_dirac_diff_minus(L: DiscreteLagrangian, c: DiscreteConnection, x0, g0, x1) -> np.ndarray:
    sp = c.space
    q0, q1 = tz.tilde_lambda_d_inv(c, x0, g0, sp.point(x1, np.zeros(sp.dim_g)))
    b0, b1, f0, f1 = tz.dirac_diff_minus(L, q0, q1)
    w0, mu0, qq = tz.check_lambda_d(c, b0, b1)
    x, xi, p = tz.check_lambda_d_adj_inv(c, f0, f1)
    return _flat(w0, mu0, qq.x, x, xi, p)


def oracle_reduced_energy_plus(rl: ReducedLagrangianPlus, x0, x0p, g0p, q1: PointQ, w1, mu1) -> float:
    c = rl.conn
    sp = c.space
    q0, q0p = tz.lambda_d_inv(c, sp.point(x0, np.zeros(sp.dim_g)), x0p, g0p)
    _, p1 = tz.hat_lambda_d_inv(c, q1, w1, mu1)
    return generalized_energy_plus(rl.base, q0, q0p, q1, p1)


# --------------------------------------------------------------------------
# checks


def connection_errors(c: DiscreteConnection, rng, samples: int = 8) -> dict[str, float]:
    sp = c.space
    out = {"omega_d(q,q)": 0.0, "equivariance": 0.0, "h_d(q0,x0)": 0.0, "linearity": 0.0}
    for _ in range(samples):
        q0, q1 = _rand_point(rng, sp), _rand_point(rng, sp)
        a, b = rng.uniform(-1, 1, sp.dim_g), rng.uniform(-1, 1, sp.dim_g)
        out["omega_d(q,q)"] = max(out["omega_d(q,q)"], _err(c.omega_d(q0, q0), 0))
        lhs = c.omega_d(sp.point(q0.x, q0.g + a), sp.point(q1.x, q1.g + b))
        out["equivariance"] = max(out["equivariance"], _err(lhs, b + c.omega_d(q0, q1) - a))
        out["h_d(q0,x0)"] = max(out["h_d(q0,x0)"], _err(c.h_d(q0, q0.x), q0.g))
        s = rng.uniform(-2, 2)
        sup = c.h_d(q0 + q1, q0.x + s * q1.x) - c.h_d(q0, q0.x) - c.h_d(q1, s * q1.x)
        out["linearity"] = max(out["linearity"], _err(sup, 0))
    return out


def map_algebra_errors(c: DiscreteConnection, rng, L: DiscreteLagrangian | None = None, samples: int = 4) -> tuple[dict, dict]:
    """Roundtrip/adjoint errors and reduced-map-vs-oracle errors for one connection."""
    sp = c.space
    ns, ng = sp.dim_sigma, sp.dim_g
    rt: dict[str, float] = {}
    red: dict[str, float] = {}

    def note(d, k, v):
        d[k] = max(d.get(k, 0.0), v)

    for _ in range(samples):
        q0, q1 = _rand_point(rng, sp), _rand_point(rng, sp)
        p0, p1 = _rand_cov(rng, sp), _rand_cov(rng, sp)
        x1, g1 = rng.uniform(-1, 1, ns), rng.uniform(-1, 1, ng)
        w1, r1 = rng.uniform(-1, 1, ns), rng.uniform(-1, 1, ng)

        b, q = tz.lambda_d_inv(c, *tz.lambda_d(c, q0, q1))
        note(rt, "lambda_d", _err(_flat(b, q), _flat(q0, q1)))
        a, b2 = tz.lambda_d_adj(c, p0, w1, r1)
        note(rt, "lambda_d adjoint pairing",
             abs(pair(a, q0) + pair(b2, q1) - (pair(p0, q0) + w1 @ q1.x + r1 @ c.omega_d(q0, q1))))
        note(rt, "lambda_d adjoint roundtrip", _err(_flat(*tz.lambda_d_adj_inv(c, a, b2)), _flat(p0, w1, r1)))

        x, g, b = tz.tilde_lambda_d(c, q0, q1)
        note(rt, "tilde_lambda_d", _err(_flat(*tz.tilde_lambda_d_inv(c, x, g, b)), _flat(q0, q1)))
        a, b2 = tz.tilde_lambda_d_adj(c, w1, r1, p1)
        note(rt, "tilde_lambda_d adjoint pairing",
             abs(pair(a, q0) + pair(b2, q1) - (w1 @ x + r1 @ g + pair(p1, q1))))
        note(rt, "tilde_lambda_d adjoint roundtrip", _err(_flat(*tz.tilde_lambda_d_adj_inv(c, a, b2)), _flat(w1, r1, p1)))

        m = tz.hat_lambda_d(c, q0, p0)
        note(rt, "hat_lambda_d", _err(_flat(*tz.hat_lambda_d_inv(c, m.q, m.w, m.mu)), _flat(q0, p0)))
        a, v = tz.hat_lambda_d_adj(c, p1, x1, g1)
        note(rt, "hat_lambda_d adjoint pairing",
             abs(pair(a, q0) + pair(p0, v) - (pair(p1, q0) + x1 @ m.w + g1 @ m.mu)))
        note(rt, "hat_lambda_d adjoint roundtrip", _err(_flat(*tz.hat_lambda_d_adj_inv(c, a, v)), _flat(p1, x1, g1)))

        w, mu, q = tz.check_lambda_d(c, p0, q0)
        note(rt, "check_lambda_d", _err(_flat(*tz.check_lambda_d_inv(c, w, mu, q)), _flat(p0, q0)))
        v, a = tz.check_lambda_d_adj(c, x1, g1, p1)
        note(rt, "check_lambda_d adjoint pairing",
             abs(pair(p0, v) + pair(a, q0) - (x1 @ w + g1 @ mu + pair(p1, q0))))
        note(rt, "check_lambda_d adjoint roundtrip", _err(_flat(*tz.check_lambda_d_adj_inv(c, v, a)), _flat(x1, g1, p1)))

        zp = tz.CotangentPair((q0, p0), (q1, p1))
        note(rt, "gamma_plus o kappa_d", _err(_flat(*tz.gamma_plus(tz.kappa_d(zp))), _flat(*tz.omega_flat_plus(zp))))
        note(rt, "gamma_minus o kappa_d", _err(_flat(*tz.gamma_minus(tz.kappa_d(zp))), _flat(*tz.omega_flat_minus(zp))))
        s = rng.uniform(-1, 1, ng)
        shifted = tz.CotangentPair((act(s, q0), p0), (act(s, q1), p1))
        a0, a1, a2, a3 = tz.omega_flat_plus(zp)
        note(rt, "G-invariance plus", _err(_flat(*tz.omega_flat_plus(shifted)), _flat(act(s, a0), a1, a2, act(s, a3))))
        a0, a1, a2, a3 = tz.omega_flat_minus(zp)
        note(rt, "G-invariance minus", _err(_flat(*tz.omega_flat_minus(shifted)), _flat(a0, act(s, a1), act(-s, a2), a3)))

        Xp = tz.ReducedStepPlus(q0.x, p0.w, p0.r, q1, w1, r1)
        note(red, "reduced omega_flat_plus", _err(tz.reduced_omega_flat_plus(c, Xp).flat(), oracle_reduced_omega_flat_plus(c, Xp)))
        Xm = tz.ReducedStepMinus(q0, p0.w, p0.r, q1.x, w1, r1)
        note(red, "reduced omega_flat_minus", _err(tz.reduced_omega_flat_minus(c, Xm).flat(), oracle_reduced_omega_flat_minus(c, Xm)))
        if L is not None:
            note(red, "reduced dirac_diff_plus",
                 _err(tz.reduced_dirac_diff_plus(L, c, q0.x, x1, g1).flat(), oracle_reduced_dirac_diff_plus(L, c, q0.x, x1, g1)))
            note(red, "reduced dirac_diff_minus",
                 _err(tz.reduced_dirac_diff_minus(L, c, q0.x, g1, x1).flat(), oracle_reduced_dirac_diff_minus(L, c, q0.x, g1, x1)))
    return rt, red


def gradient_rel_error(L: DiscreteLagrangian, q0: PointQ, q1: PointQ) -> float:
    D1, D2 = L.gradient(q0, q1)
    F1, F2 = grad_fd(L, q0, q1)
    a = np.concatenate([D1.flat(), D2.flat()])
    b = np.concatenate([F1.flat(), F2.flat()])
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(a)), 1e-300))


def trajectory_checks(name: str, L, c, ic: TrivializedMomentumPoint, h: float, steps: int, cfg: NewtonConfig | None = None, variation: bool = True) -> list[Check]:
    rl = ReducedLagrangianPlus(L, c)
    tr = run(rl, tz.ReducedState(ic.q.x, ic.w, ic.mu), ic.q.g, steps, cfg, h=h)
    checks = [Check(f"{name}: run completed", 0.0 if tr.complete else np.inf, 0.0)]
    checks.append(Check(f"{name}: momentum drift", tr.momentum_drift(), 1e-10))
    checks.append(Check(f"{name}: structure residual", float(np.nanmax(tr.struct_residual, initial=0.0)), STRUCT_TOL))
    if variation and tr.n_steps >= 2:
        checks.append(Check(f"{name}: variational residual", variational_residual(rl, tr, 1e-5), VARIATION_TOL))
    return checks


def run_audit(L, c, ic, h: float, steps: int = 50, n_random: int = 20, seed: int = 0, cfg: NewtonConfig | None = None, system_name: str = "system") -> list[Check]:
    """Full audit: configured system plus ``n_random`` random quadratic systems."""
    from .systems.quadratic import random_quadratic_system

    rng = np.random.default_rng(seed)
    checks: list[Check] = []

    for k, v in connection_errors(c, rng).items():
        checks.append(Check(f"{system_name}: connection {k}", v, MAP_TOL))
    rt, red = map_algebra_errors(c, rng, L)
    checks += [Check(f"{system_name}: {k}", v, MAP_TOL) for k, v in rt.items()]
    checks += [Check(f"{system_name}: {k}", v, REDUCED_TOL) for k, v in red.items()]

    sp = c.space
    worst = 0.0
    for _ in range(10):
        q0 = sp.point(ic.q.x + 0.1 * rng.uniform(-1, 1, sp.dim_sigma), ic.q.g + rng.uniform(-1, 1, sp.dim_g))
        q1 = sp.point(q0.x + h * rng.uniform(-1, 1, sp.dim_sigma), q0.g + h * rng.uniform(-1, 1, sp.dim_g))
        worst = max(worst, gradient_rel_error(L, q0, q1))
    checks.append(Check(f"{system_name}: gradient vs finite differences", worst, GRAD_RTOL))
    checks += trajectory_checks(system_name, L, c, ic, h, steps, cfg)

    rt_all: dict[str, float] = {}
    red_all: dict[str, float] = {}
    traj_worst: dict[str, float] = {}
    for i in range(n_random):
        system, conn, ric = random_quadratic_system(rng)
        Lr = system.lagrangian()
        for k, v in connection_errors(conn, rng, 2).items():
            rt_all["connection " + k] = max(rt_all.get("connection " + k, 0.0), v)
        rt, red = map_algebra_errors(conn, rng, Lr, 2)
        for k, v in rt.items():
            rt_all[k] = max(rt_all.get(k, 0.0), v)
        for k, v in red.items():
            red_all[k] = max(red_all.get(k, 0.0), v)
        for ch in trajectory_checks("random", Lr, conn, ric, system.h, 10, cfg):
            traj_worst[ch.name] = max(traj_worst.get(ch.name, 0.0), ch.value)
            traj_worst[ch.name + "\0tol"] = ch.tol
    checks += [Check(f"random systems ({n_random}): {k}", v, MAP_TOL) for k, v in rt_all.items()]
    checks += [Check(f"random systems ({n_random}): {k}", v, REDUCED_TOL) for k, v in red_all.items()]
    for k, v in traj_worst.items():
        if not k.endswith("\0tol"):
            checks.append(Check(k.replace("random:", f"random systems ({n_random}):"), v, traj_worst[k + "\0tol"]))
    return checks


def reduced_energy_error(rl: ReducedLagrangianPlus, rng, samples: int = 4) -> float:
    sp = rl.space
    worst = 0.0
    for _ in range(samples):
        x0, x0p = rng.uniform(-1, 1, sp.dim_sigma), rng.uniform(-1, 1, sp.dim_sigma)
        g0p = rng.uniform(-1, 1, sp.dim_g)
        q1 = _rand_point(rng, sp)
        w1, mu1 = rng.uniform(-1, 1, sp.dim_sigma), rng.uniform(-1, 1, sp.dim_g)
        a = reduced_energy_plus(rl, x0, x0p, g0p, q1, w1, mu1)
        b = oracle_reduced_energy_plus(rl, x0, x0p, g0p, q1, w1, mu1)
        worst = max(worst, abs(a - b))
    return worst
