"""Small Lagrangians shared by the test modules."""
import numpy as np

from diracred.lagrangian import DiscreteLagrangian


def free_particle(sp, m=2.0, h=0.1, analytic=True):
    """``(m / 2h) |q1 - q0|^2``, invariant under fiber translation."""

    def ev(q0, q1):
        d = q1.flat() - q0.flat()
        return 0.5 * m * (d @ d) / h

    def grad(q0, q1):
        d = (m / h) * (q1.flat() - q0.flat())
        return sp.covector_from_flat(-d), sp.covector_from_flat(d)

    return DiscreteLagrangian(ev, sp, grad=grad if analytic else None, invariant=True)


def quadratic(sp, rng, h=0.1):
    """Invariant quadratic ``L_d`` with a random coupling matrix, through ``QuadraticSystem``."""
    from diracred.systems.quadratic import QuadraticSystem, random_spd

    return QuadraticSystem(sp, random_spd(rng, sp.dim_q), random_spd(rng, sp.dim_sigma), 0.2, h).lagrangian()


def constant(sp, value=3.0):
    return DiscreteLagrangian(lambda q0, q1: value, sp, invariant=True)
