"""Charged particle in a constant magnetic field, Kaluza-Klein form.

``Q = R^3 x S^1`` with the particle position as shape and the extra angle
``theta`` as fiber.  With ``A = (B0/2)(-q2, q1, 0)`` the Lagrangian is

    L_K = m/2 |v|^2 + 1/2 (A(q).v + theta_dot)^2

and the conjugate of ``theta`` is the charge.  The connection is flat.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..connection import DiscreteConnection
from ..lagrangian import DiscreteLagrangian
from ..spaces import CovectorQ, PointQ, TrivializedMomentumPoint, TrivializedSpace
from . import _kernels as K

SPACE = TrivializedSpace(3, 1)


@dataclass(frozen=True)
class ChargedParticleParams:
    m: float = 1.0
    e: float = 1.0
    B0: float = 1.0
    h: float = 0.2
    T: float = 20.0

    def __post_init__(self):
        if not (self.m > 0 and self.h > 0 and self.T > 0):
            raise ValueError("m, h and T must be positive")

    @property
    def n_steps(self) -> int:
        return int(round(self.T / self.h))


def potential(q, B0: float = 1.0) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    return 0.5 * B0 * np.array([-q[1], q[0], 0.0])


def charged_particle_lagrangian(params: ChargedParticleParams) -> DiscreteLagrangian:
    c = np.array([params.m, params.B0])
    h = float(params.h)

    def step_eval(u0, du):
        return K.charged_ld(u0, du, h, c)

    def step_grad(u0, du):
        return K.charged_grad(u0, du, h, c)

    def step_hess(u0, du):
        return K.charged_hess(u0, du, h, c)

    def ev(q0: PointQ, q1: PointQ) -> float:
        u0 = q0.flat()
        return float(K.charged_ld(u0, q1.flat() - u0, h, c))

    def grad(q0: PointQ, q1: PointQ) -> tuple[CovectorQ, CovectorQ]:
        u0 = q0.flat()
        d1, d2 = K.charged_grad(u0, q1.flat() - u0, h, c)
        return SPACE.covector_from_flat(d1), SPACE.covector_from_flat(d2)

    return DiscreteLagrangian(ev, SPACE, grad=grad, invariant=True, step_eval=step_eval, step_grad=step_grad, step_hess=step_hess)


def charged_particle_system(params: ChargedParticleParams | None = None):
    """``(L_d, connection, initial trivialized momentum point)``.

    The particle starts at the origin with velocity ``(1, 0, 1)``; since
    ``A(0) = 0`` the shape momentum is ``m (1, 0, 1)`` and the fiber
    momentum is the charge.
    """
    params = params or ChargedParticleParams()
    L = charged_particle_lagrangian(params)
    conn = DiscreteConnection.flat(SPACE)
    ic = TrivializedMomentumPoint(SPACE.zero_point(), np.array([params.m, 0.0, params.m]), np.array([params.e]))
    return L, conn, ic


def charged_particle_exact(t) -> np.ndarray:
    """Exact path ``(sin t, cos t - 1, t)`` for ``m = e = B0 = 1`` from the default data."""
    t = np.asarray(t, dtype=float)
    return np.stack([np.sin(t), np.cos(t) - 1.0, t], axis=-1)


def final_error(traj, exact=charged_particle_exact) -> float:
    """Euclidean distance between the last shape point and ``exact(T)``."""
    return float(np.linalg.norm(np.asarray(traj.x[-1]) - exact(traj.times[-1])))
