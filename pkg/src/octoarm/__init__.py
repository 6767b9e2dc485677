"""Open-loop optimal control of a planar elastic rod arm.

Forward rod dynamics, backward costate dynamics, and the iterative
forward-backward control solver, plus the experiment runner and CLI.
"""

from .rod import (
    RodProperties,
    RodState,
    StrainField,
    InternalLoads,
    tapered_properties,
    taper_profile,
    straight_state,
    compute_strains,
    internal_loads,
    energies,
)
from .ops import dtilde, dbar, node_diff
from .forward import (
    BlowupError,
    ControlField,
    Trajectory,
    zero_control,
    forward_rhs,
    verlet_step,
    simulate_forward,
)
from .adjoint import (
    CostateState,
    CostateSequence,
    terminal_costate,
    adjoint_rhs,
    simulate_backward,
)
from .control import (
    CostWeights,
    SolveLog,
    evaluate_cost,
    control_gradient,
    cost_control_gradient,
    update_control,
    solve,
)

__all__ = [
    "RodProperties", "RodState", "StrainField", "InternalLoads",
    "tapered_properties", "taper_profile", "straight_state",
    "compute_strains", "internal_loads", "energies",
    "dtilde", "dbar", "node_diff",
    "BlowupError", "ControlField", "Trajectory", "zero_control",
    "forward_rhs", "verlet_step", "simulate_forward",
    "CostateState", "CostateSequence", "terminal_costate", "adjoint_rhs",
    "simulate_backward",
    "CostWeights", "SolveLog", "evaluate_cost", "control_gradient",
    "cost_control_gradient", "update_control", "solve",
]
