"""Delay differential equations with Lie-Poisson structure.

Fixed-step RK4 with Hermite history for single-delay systems, the rigid
body and Landau-Lifschitz models with delayed dissipation, and the
spectral and normal-form analysis of the rigid body's Hopf bifurcation.
"""
from .algebra import AlgebraSpec, InvalidAlgebraError, so3
from .diagnostics import CycleEstimate, casimir_drift, decay_ratio, detect_limit_cycle, energy_rate_check
from .history import HistoryRangeError, InitialFunction, Trajectory
from .hopf import EigenData, HopfQuantities, NormalFormData, cubic_coefficients, eigenvectors, hopf_quantities
from .hopf import normalize_adjoint, taylor_oracle
from .integrator import DDEProblem, DivergenceError, IntegratorConfig, adjust_step, integrate, integrate_on_orbit
from .models import (LandauLifschitzParams, RigidBodyParams, equilibrium_state, perturbed_equilibrium,
                     rigid_body_energy, rigid_body_problem)
from .report import SCHEMA_VERSION, analyze
from .spectral import (HopfPoint, HypothesisError, NoCrossingError, coefficients, critical_delay, hopf_point,
                       linearize, transversality)

__version__ = "0.1.0"

__all__ = [
    "AlgebraSpec", "InvalidAlgebraError", "so3",
    "CycleEstimate", "casimir_drift", "decay_ratio", "detect_limit_cycle", "energy_rate_check",
    "HistoryRangeError", "InitialFunction", "Trajectory",
    "EigenData", "HopfQuantities", "NormalFormData", "cubic_coefficients", "eigenvectors", "hopf_quantities",
    "normalize_adjoint", "taylor_oracle",
    "DDEProblem", "DivergenceError", "IntegratorConfig", "adjust_step", "integrate", "integrate_on_orbit",
    "LandauLifschitzParams", "RigidBodyParams", "equilibrium_state", "perturbed_equilibrium",
    "rigid_body_energy", "rigid_body_problem",
    "SCHEMA_VERSION", "analyze",
    "HopfPoint", "HypothesisError", "NoCrossingError", "coefficients", "critical_delay", "hopf_point",
    "linearize", "transversality",
]
