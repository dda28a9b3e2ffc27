"""Discrete Dirac mechanics with abelian symmetry reduction."""
from .connection import DiscreteConnection
from .integrator import (
    NewtonConfig,
    NoConvergence,
    ReducedTrajectory,
    SingularJacobian,
    SolverError,
    newton_solve,
    reconstruct,
    run,
    run_unreduced,
    step_ld_minus,
    step_ld_plus,
    step_lpd_minus,
    step_lpd_plus,
    variational_residual,
)
from .lagrangian import DiscreteLagrangian, ReducedLagrangianMinus, ReducedLagrangianPlus
from .spaces import CovectorQ, PointQ, TrivializedMomentumPoint, TrivializedSpace, pair
from .tulczyjew import ReducedState

__version__ = "0.1.0"

__all__ = [
    "DiscreteConnection",
    "NewtonConfig",
    "NoConvergence",
    "ReducedTrajectory",
    "SingularJacobian",
    "SolverError",
    "newton_solve",
    "reconstruct",
    "run",
    "run_unreduced",
    "step_ld_minus",
    "step_ld_plus",
    "step_lpd_minus",
    "step_lpd_plus",
    "variational_residual",
    "DiscreteLagrangian",
    "ReducedLagrangianMinus",
    "ReducedLagrangianPlus",
    "CovectorQ",
    "PointQ",
    "TrivializedMomentumPoint",
    "TrivializedSpace",
    "pair",
    "ReducedState",
]
