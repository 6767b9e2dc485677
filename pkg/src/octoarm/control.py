"""Cost evaluation and the iterative forward-backward control solver.

One iteration = forward sweep, terminal costate, backward sweep, steepest-
ascent control update u <- u + eta*(gamma - u). The loop stops when the
max-abs control change drops below epsilon or the iteration budget is spent.

Two gradient surfaces are exposed on purpose:

* ``control_gradient`` returns gamma - u, the update direction in the
  normalization the learning rates are calibrated to (the solver uses it).
* ``cost_control_gradient`` returns gamma/ds^2 - u, the exact Fréchet
  gradient of :func:`evaluate_cost` under the dt*ds inner product; finite
  differences of J match -<cost_control_gradient, du> to discretization
  accuracy. The two fields differ by a positive diagonal rescaling only.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .adjoint import CostateSequence, simulate_backward
from .forward import ControlField, Trajectory, simulate_forward, zero_control
from .rod import RodProperties, RodState, potential_energy, strains_of


@dataclass(frozen=True)
class CostWeights:
    """Weights of the running + terminal cost and the update step size."""

    chi1: float   # deformation (potential energy) penalty
    chi2: float   # terminal miss penalty
    eta: float    # learning rate (constant unless a schedule is supplied)
    T: float      # horizon [s]

    def __post_init__(self):
        if self.chi1 < 0 or self.chi2 <= 0 or self.eta <= 0 or self.T <= 0:
            raise ValueError("require chi1 >= 0, chi2 > 0, eta > 0, T > 0")


@dataclass
class SolveLog:
    """Per-iteration records of the forward-backward loop."""

    k: list = field(default_factory=list)
    J: list = field(default_factory=list)
    J_running: list = field(default_factory=list)
    J_terminal: list = field(default_factory=list)
    du_max: list = field(default_factory=list)
    tip_dist: list = field(default_factory=list)

    def append(self, k, J, J_running, J_terminal, du_max, tip_dist):
        self.k.append(int(k))
        self.J.append(float(J))
        self.J_running.append(float(J_running))
        self.J_terminal.append(float(J_terminal))
        self.du_max.append(float(du_max))
        self.tip_dist.append(float(tip_dist))

    def rows(self):
        return list(zip(self.k, self.J, self.J_running, self.J_terminal,
                        self.du_max, self.tip_dist))

    def __len__(self):
        return len(self.k)


def cost_breakdown(trajectory: Trajectory, control: ControlField,
                   weights: CostWeights, target, props: RodProperties):
    """(running, terminal) parts of the cost functional.

    running = sum_k dt * [ 0.5*ds*(sum|uF|^2 + sum uC^2) + chi1 * V(q_k) ]
    terminal = chi2 * 0.5 * |r_tip(T) - target|^2
    """
    dt = control.dt
    ds = props.ds
    effort = 0.5 * ds * (
        np.einsum("kij,kij->", control.uF, control.uF)
        + np.einsum("kj,kj->", control.uC, control.uC)
    )
    pot = 0.0
    if weights.chi1 != 0.0:
        for k in range(control.steps):
            pot += potential_energy(
                strains_of(trajectory.r[k], trajectory.theta[k], props), props)
    running = dt * (effort + weights.chi1 * pot)
    miss = trajectory.r[-1, -1] - np.asarray(target, dtype=float)
    terminal = weights.chi2 * 0.5 * float(miss @ miss)
    return running, terminal


def evaluate_cost(trajectory: Trajectory, control: ControlField,
                  weights: CostWeights, target, props: RodProperties) -> float:
    running, terminal = cost_breakdown(trajectory, control, weights, target, props)
    return running + terminal


def control_gradient(costates: CostateSequence, control: ControlField):
    """Steepest-ascent direction gamma - u, shaped like the control field."""
    if costates.steps != control.steps:
        raise ValueError("costate and control lengths disagree")
    gF = costates.gamma_r[:-1] - control.uF
    gC = costates.gamma_theta[:-1] - control.uC
    return gF, gC


def cost_control_gradient(costates: CostateSequence, control: ControlField,
                          ds: float):
    """Exact gradient of evaluate_cost in the dt*ds metric.

    The control at step k enters the discrete dynamics inside the damped
    momentum kick, so the exact pairing is with the decayed half-level
    costate of that step: gradient_k = gamma_half[k]/ds^2 - u[k].
    """
    if costates.gamma_r_half is None or costates.gamma_r_half.shape[0] != control.steps:
        raise ValueError("costate and control lengths disagree")
    gF = costates.gamma_r_half / ds**2 - control.uF
    gC = costates.gamma_theta_half / ds**2 - control.uC
    return gF, gC


def update_control(control: ControlField, gradient, eta: float) -> ControlField:
    """Return u + eta*gradient without touching the input field."""
    if eta <= 0:
        raise ValueError("eta must be positive")
    gF, gC = gradient
    return ControlField(control.uF + eta * gF, control.uC + eta * gC, control.dt)


def inner_product(a, b, dt: float, ds: float) -> float:
    """dt*ds-weighted inner product of two control-shaped field pairs."""
    aF, aC = a
    bF, bC = b
    return dt * ds * float(np.einsum("kij,kij->", aF, bF)
                           + np.einsum("kj,kj->", aC, bC))


def solve(initial: RodState, props: RodProperties, weights: CostWeights,
          target, max_iters: int, epsilon: float, dt: float = 1e-5,
          eta_schedule=None, on_iteration=None):
    """Run the forward-backward loop from a zero control guess.

    Each iteration simulates forward, logs the cost of the current control,
    integrates the costates backward, and applies the steepest-ascent update.
    Stops on the control-change criterion (max-abs change < epsilon) or after
    max_iters iterations; returns (control, trajectory, log) where trajectory
    belongs to the final forward sweep.

    ``eta_schedule`` may be a callable k -> eta overriding weights.eta;
    ``on_iteration`` receives (k, trajectory, log) after each logged sweep.
    """
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    steps = int(round(weights.T / dt))
    if abs(steps * dt - weights.T) > 1e-9 * weights.T:
        raise ValueError("horizon T must be an integer number of steps")

    control = zero_control(props, dt, steps)
    log = SolveLog()
    target = np.asarray(target, dtype=float)
    trajectory = None
    bad_streak = 0
    warned = False

    for k in range(1, max_iters + 1):
        trajectory = simulate_forward(initial, control, props)
        running, terminal = cost_breakdown(trajectory, control, weights,
                                           target, props)
        tip_dist = float(np.linalg.norm(trajectory.r[-1, -1] - target))

        costates = simulate_backward(trajectory, control, props,
                                     weights.chi1, weights.chi2, target)
        gradient = control_gradient(costates, control)
        eta_k = weights.eta if eta_schedule is None else float(eta_schedule(k))
        new_control = update_control(control, gradient, eta_k)
        du_max = max(
            float(np.abs(new_control.uF - control.uF).max()),
            float(np.abs(new_control.uC - control.uC).max()),
        )

        log.append(k, running + terminal, running, terminal, du_max, tip_dist)
        if on_iteration is not None:
            on_iteration(k, trajectory, log)

        if len(log.J) >= 2 and log.J[-1] >= log.J[-2]:
            bad_streak += 1
            if bad_streak >= 5 and not warned:
                warnings.warn(
                    "cost has not decreased for 5 consecutive iterations; "
                    "the learning rate may be too large", RuntimeWarning)
                warned = True
        else:
            bad_streak = 0

        control = new_control
        if du_max < epsilon:
            break

    return control, trajectory, log
