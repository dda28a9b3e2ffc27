"""Example systems: the charged particle and the double spherical pendulum."""
from .angles import normalize_angle
from .charged_particle import (
    ChargedParticleParams,
    charged_particle_exact,
    charged_particle_lagrangian,
    charged_particle_system,
    final_error,
)
from .quadratic import QuadraticSystem, random_quadratic_system
from .pendulum import (
    InvalidChart,
    PendulumParams,
    check_chart,
    pendulum_lagrangian,
    pendulum_system,
    to_spherical,
)

__all__ = [
    "normalize_angle",
    "ChargedParticleParams",
    "charged_particle_exact",
    "charged_particle_lagrangian",
    "charged_particle_system",
    "final_error",
    "InvalidChart",
    "PendulumParams",
    "check_chart",
    "pendulum_lagrangian",
    "pendulum_system",
    "to_spherical",
    "QuadraticSystem",
    "random_quadratic_system",
]
