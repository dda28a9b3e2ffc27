"""Invariant quadratic-plus-quartic test systems on ``Sigma x G``.

    L_d(q0, q1) = (1/2h) dq^T M dq - h V((x0 + x1)/2),
    V(x) = 1/2 x^T K x + beta/4 sum(x^4)

with ``M`` symmetric positive definite on all of ``Q`` (so shape and fiber
velocities couple) and a potential on the shape only, which makes ``L_d``
invariant under fiber translation.  Used for randomized property checks
and as the ``custom-linear`` CLI system.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..connection import DiscreteConnection
from ..lagrangian import DiscreteLagrangian
from ..spaces import TrivializedMomentumPoint, TrivializedSpace


@dataclass(frozen=True, eq=False)
class QuadraticSystem:
    space: TrivializedSpace
    M: np.ndarray
    K: np.ndarray
    beta: float = 0.0
    h: float = 0.1

    def __post_init__(self):
        n, ns = self.space.dim_q, self.space.dim_sigma
        M = np.array(self.M, dtype=float).reshape(n, n)
        K = np.array(self.K, dtype=float).reshape(ns, ns)
        if not np.allclose(M, M.T):
            raise ValueError("M must be symmetric")
        if n and np.linalg.eigvalsh(M).min() <= 0:
            raise ValueError("M must be positive definite")
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "K", 0.5 * (K + K.T))

    def _grad_v(self, x):
        return self.K @ x + self.beta * x ** 3

    def _hess_v(self, x):
        return self.K + np.diag(3.0 * self.beta * x ** 2)

    def step_eval(self, u0, du):
        ns = self.space.dim_sigma
        xm = u0[:ns] + 0.5 * du[:ns]
        v = 0.5 * xm @ self.K @ xm + 0.25 * self.beta * np.sum(xm ** 4)
        return 0.5 * du @ self.M @ du / self.h - self.h * v

    def step_grad(self, u0, du):
        ns = self.space.dim_sigma
        xm = u0[:ns] + 0.5 * du[:ns]
        kin = self.M @ du / self.h
        pot = np.zeros_like(du)
        pot[:ns] = 0.5 * self.h * self._grad_v(xm)
        return -kin - pot, kin - pot

    def step_hess(self, u0, du):
        ns = self.space.dim_sigma
        xm = u0[:ns] + 0.5 * du[:ns]
        n = du.size
        P = np.zeros((n, n))
        P[:ns, :ns] = 0.25 * self.h * self._hess_v(xm)
        kin = self.M / self.h
        return -kin - P, kin - P

    def lagrangian(self) -> DiscreteLagrangian:
        sp = self.space

        def ev(q0, q1):
            u0 = q0.flat()
            return self.step_eval(u0, q1.flat() - u0)

        return DiscreteLagrangian(
            ev, sp, invariant=True,
            step_eval=self.step_eval, step_grad=self.step_grad, step_hess=self.step_hess,
        )


def random_spd(rng: np.random.Generator, n: int, cond: float = 10.0) -> np.ndarray:
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    return (Q * np.geomspace(1.0, cond, n)) @ Q.T if n else np.zeros((0, 0))


def random_quadratic_system(rng: np.random.Generator, max_dim: int = 6, h: float = 0.1, beta: float | None = None):
    """Random dims in ``1..max_dim`` each, dense ``H`` in ``[-1, 1]``, random SPD mass.

    Returns ``(system, connection, initial momentum point)``.
    """
    ns = int(rng.integers(1, max_dim + 1))
    ng = int(rng.integers(1, max_dim + 1))
    sp = TrivializedSpace(ns, ng)
    M = random_spd(rng, ns + ng)
    K = random_spd(rng, ns, cond=5.0)
    b = float(rng.uniform(0.0, 0.5)) if beta is None else beta
    system = QuadraticSystem(sp, M, K, b, h)
    conn = DiscreteConnection(sp, rng.uniform(-1.0, 1.0, (ng, ns)))
    ic = TrivializedMomentumPoint(
        sp.point(rng.uniform(-1, 1, ns), rng.uniform(-1, 1, ng)),
        rng.uniform(-1, 1, ns),
        rng.uniform(-1, 1, ng),
    )
    return system, conn, ic
