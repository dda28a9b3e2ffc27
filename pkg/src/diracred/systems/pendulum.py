"""Double spherical pendulum with the rotation about the vertical as symmetry.

Each bob has spherical angles ``(theta_i, phi_i)``, ``phi`` measured from
the upward vertical, so the hanging rest state is ``phi_1 = phi_2 = pi``.
After rotating to ``vtheta1 = (theta1 + theta2)/2``, ``vtheta2 =
(theta2 - theta1)/2`` the Lagrangian no longer depends on ``vtheta1``,
which becomes the fiber coordinate.  Shape coordinates are ``(phi1,
vtheta2, phi2)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..connection import DiscreteConnection
from ..lagrangian import DiscreteLagrangian
from ..spaces import CovectorQ, PointQ, TrivializedMomentumPoint, TrivializedSpace
from . import _kernels as K

SPACE = TrivializedSpace(3, 1)
CHART_TOL = 1e-6


class InvalidChart(ValueError):
    """The configuration sits where the rotation action is not free."""


@dataclass(frozen=True)
class PendulumParams:
    m1: float = 20.0
    m2: float = 35.0
    l1: float = 500.0
    l2: float = 800.0
    g: float = 9.8
    h: float = 0.01
    T: float = 100.0
    coupling: bool = True

    def __post_init__(self):
        for name in ("m1", "m2", "l1", "l2", "g", "h", "T"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    @property
    def n_steps(self) -> int:
        return int(round(self.T / self.h))

    def coefficients(self) -> np.ndarray:
        """Packed ``(A, B, K, G1, G2)`` for the kernels."""
        m1, m2, l1, l2, g = self.m1, self.m2, self.l1, self.l2, self.g
        k = m2 * l1 * l2 if self.coupling else 0.0
        return np.array([(m1 + m2) * l1 * l1, m2 * l2 * l2, k, g * (m1 + m2) * l1, g * m2 * l2])


# default initial data: (vtheta1, phi1, vtheta2, phi2) and conjugate momenta
DEFAULT_Q0 = (0.0, 9.0 / 4.0, 2.0, 3.0)
DEFAULT_MU0 = 0.0
DEFAULT_W0 = (0.0, 1.0, 1.0)


def to_flat(vtheta1, phi1, vtheta2, phi2) -> np.ndarray:
    return np.array([phi1, vtheta2, phi2, vtheta1], dtype=float)


def to_spherical(u) -> np.ndarray:
    """Flat ``(phi1, vtheta2, phi2, vtheta1)`` rows to ``(theta1, phi1, theta2, phi2)``."""
    u = np.asarray(u, dtype=float)
    p1, v2, p2, v1 = u[..., 0], u[..., 1], u[..., 2], u[..., 3]
    return np.stack([v1 - v2, p1, v1 + v2, p2], axis=-1)


def check_chart(x, tol: float = CHART_TOL) -> None:
    x = np.asarray(x, dtype=float)
    for i, phi in ((1, x[0]), (2, x[2])):
        if abs(np.sin(phi)) < tol:
            raise InvalidChart(f"phi{i} = {phi!r} is within {tol} of a multiple of pi")


def continuous_lagrangian(params: PendulumParams, q, v) -> float:
    """``L(q, v)`` at flat position and velocity."""
    return float(K.pendulum_l(np.asarray(q, float), np.asarray(v, float), params.coefficients()))


def pendulum_lagrangian(params: PendulumParams) -> DiscreteLagrangian:
    """Midpoint discrete Lagrangian ``h L((q0 + q1)/2, (q1 - q0)/h)`` with analytic gradient."""
    c = params.coefficients()
    h = float(params.h)

    def step_eval(u0, du):
        return K.midpoint_ld(u0, du, h, c)

    def step_grad(u0, du):
        return K.midpoint_grad(u0, du, h, c)

    def step_hess(u0, du):
        return K.midpoint_hess(u0, du, h, c)

    def ev(q0: PointQ, q1: PointQ) -> float:
        u0 = q0.flat()
        return float(K.midpoint_ld(u0, q1.flat() - u0, h, c))

    def grad(q0: PointQ, q1: PointQ) -> tuple[CovectorQ, CovectorQ]:
        u0 = q0.flat()
        d1, d2 = K.midpoint_grad(u0, q1.flat() - u0, h, c)
        return SPACE.covector_from_flat(d1), SPACE.covector_from_flat(d2)

    return DiscreteLagrangian(ev, SPACE, grad=grad, invariant=True, step_eval=step_eval, step_grad=step_grad, step_hess=step_hess)


def pendulum_system(params: PendulumParams | None = None, q0=DEFAULT_Q0, mu0=DEFAULT_MU0, w0=DEFAULT_W0, chart_guard: bool = True):
    """``(L_d, connection, initial trivialized momentum point)``.

    ``q0`` is ``(vtheta1, phi1, vtheta2, phi2)``; ``w0`` pairs with
    ``(phi1, vtheta2, phi2)`` and ``mu0`` with ``vtheta1``.
    """
    params = params or PendulumParams()
    u = to_flat(*q0)
    if chart_guard:
        check_chart(u[:3])
    L = pendulum_lagrangian(params)
    conn = DiscreteConnection.flat(SPACE)
    ic = TrivializedMomentumPoint(SPACE.point(u[:3], u[3:]), np.asarray(w0, dtype=float), np.atleast_1d(np.asarray(mu0, dtype=float)))
    return L, conn, ic
