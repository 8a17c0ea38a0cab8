"""Superiorization of feasibility-seeking projection methods.

Subpackages map one-to-one onto the stages of a study:

``geometry``      constraint sets, projections, proximity
``feasibility``   string-averaging projection operators and the basic run loop
``objectives``    target functions and nonascending directions
``superiorize``   perturbed (superiorized) runs and step-size schedules
``evaluation``    ε-outputs, proximity-target curves, Fejér monitoring
``problems``      seeded problem generators
``cli``           command-line harness
"""

from .errors import SuperiorizationError
from .evaluation import better_targeted, build_curve, epsilon_output, fejer_monitor, monotone_subsequence
from .feasibility import BasicAlgorithm, PlanBounds, StringPlan, apply_string, cimmino, dsap_step, kaczmarz, run_basic
from .geometry import Ball, Box, ConstraintFamily, Halfspace, Hyperplane, distance, is_epsilon_compatible, project, proximity
from .objectives import L1Norm, Quadratic, SquaredNorm, BlackBox, evaluate, subgradient_direction, derivative_free_direction
from .superiorize import DerivativeFree, RestartTo, Schedule, Subgradient, SuperiorizerConfig, next_beta, run_superiorized
from .trace import IterateTrace, StopReason, StopRule

__version__ = "0.1.0"
