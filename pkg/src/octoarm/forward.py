"""Forward time integration of the planar rod dynamics under distributed controls.

The conservative part is the symplectic flow of the discrete energy; a
position-Verlet step (half drift, full momentum kick at the half-step
configuration, half drift) integrates it, with the weak viscous term folded
into the kick semi-implicitly. Controls are nodal forces uF [N] and element
couples uC [N*m], additive in the momentum balance.

The base clamp (when props.clamped_base) freezes node 0 and element 0 by
zeroing their momentum rates; their momenta stay pinned at zero, which keeps
the restricted conservative flow exactly symplectic.
"""

from dataclasses import dataclass

import numpy as np

from .ops import dtilde
from .rod import RodProperties, RodState, cross2, rotate, strains_of

BLOWUP_LIMIT = 1e12


class BlowupError(RuntimeError):
    """Raised when the integration produces non-finite or absurd values."""

    def __init__(self, step: int, message: str = ""):
        self.step = step
        super().__init__(message or f"numerical blowup at step {step}")


@dataclass
class ControlField:
    """Distributed controls sampled at every time step of the integration."""

    uF: np.ndarray  # (steps, N+1, 2) nodal forces
    uC: np.ndarray  # (steps, N) element couples
    dt: float

    @property
    def steps(self) -> int:
        return self.uF.shape[0]

    def copy(self) -> "ControlField":
        return ControlField(self.uF.copy(), self.uC.copy(), self.dt)


def zero_control(props: RodProperties, dt: float, steps: int) -> ControlField:
    return ControlField(
        uF=np.zeros((steps, props.N + 1, 2)),
        uC=np.zeros((steps, props.N)),
        dt=dt,
    )


@dataclass
class Trajectory:
    """Full state history, one entry per macro time step (steps+1 states)."""

    r: np.ndarray        # (steps+1, N+1, 2)
    theta: np.ndarray    # (steps+1, N)
    p_r: np.ndarray      # (steps+1, N+1, 2)
    p_theta: np.ndarray  # (steps+1, N)
    dt: float

    @property
    def steps(self) -> int:
        return self.r.shape[0] - 1

    def state(self, k: int) -> RodState:
        return RodState(self.r[k].copy(), self.theta[k].copy(),
                        self.p_r[k].copy(), self.p_theta[k].copy())

    def tip_position(self, k: int = -1) -> np.ndarray:
        return self.r[k, -1].copy()


def _elastic_rates(r, theta, props: RodProperties):
    """Net elastic force on nodes and net elastic couple on elements."""
    st = strains_of(r, theta, props)
    n = props.S * st.sigma
    m = props.B * (st.kappa - props.kappa_intrinsic)
    cos_t = np.cos(theta)
    sin_t = np.sin(theta)
    qn = rotate(cos_t, sin_t, n)
    f_r = dtilde(qn)
    f_th = dtilde(m) + cross2(st.nu, n) * props.ds
    return f_r, f_th


def forward_rhs(state: RodState, uF: np.ndarray, uC: np.ndarray,
                props: RodProperties):
    """Momentum rates (dp_r, dp_theta) for one control slice.

    dp_r = dtilde(Q n) - zeta*dr/dt + uF
    dp_theta = dtilde(m) + (nu x n)*ds - zeta*dtheta/dt + uC

    Dissipation acts on the generalized velocities with one coefficient
    (force -zeta*velocity per node, couple -zeta*angular-velocity per
    element), so the drag rate is zeta over the mass-matrix entry.
    """
    f_r, f_th = _elastic_rates(state.r, state.theta, props)
    dp_r = f_r - props.zeta * state.p_r / props.mass_node[:, None] + uF
    dp_th = f_th - props.zeta * state.p_theta / props.inertia_elem + uC
    if props.clamped_base:
        dp_r[0] = 0.0
        dp_th[0] = 0.0
    if not (np.all(np.isfinite(dp_r)) and np.all(np.isfinite(dp_th))):
        raise BlowupError(-1, "non-finite momentum rates")
    return dp_r, dp_th


class _StepContext:
    """Per-run constants of the Verlet step (mass inverses, damping factors)."""

    def __init__(self, props: RodProperties, dt: float):
        self.props = props
        self.half_dt = 0.5 * dt
        self.dt = dt
        self.drift_r = self.half_dt / props.mass_node[:, None]
        self.drift_th = self.half_dt / props.inertia_elem
        # semi-implicit viscous decay keeps the per-step energy balance dissipative
        self.decay_r = 1.0 / (1.0 + dt * props.zeta / props.mass_node[:, None])
        self.decay_th = 1.0 / (1.0 + dt * props.zeta / props.inertia_elem)
        self.kick_r = dt * self.decay_r
        self.kick_th = dt * self.decay_th


def _step_arrays(r, theta, p_r, p_th, uF, uC, ctx: _StepContext):
    """One position-Verlet step on raw arrays; returns new arrays."""
    props = ctx.props
    r_half = r + ctx.drift_r * p_r
    th_half = theta + ctx.drift_th * p_th

    f_r, f_th = _elastic_rates(r_half, th_half, props)
    f_r += uF
    f_th += uC
    if props.clamped_base:
        f_r[0] = 0.0
        f_th[0] = 0.0

    p_r_new = ctx.decay_r * p_r + ctx.kick_r * f_r
    p_th_new = ctx.decay_th * p_th + ctx.kick_th * f_th
    if props.clamped_base:
        p_r_new[0] = 0.0
        p_th_new[0] = 0.0

    r_new = r_half + ctx.drift_r * p_r_new
    th_new = th_half + ctx.drift_th * p_th_new
    return r_new, th_new, p_r_new, p_th_new


def verlet_step(state: RodState, uF: np.ndarray, uC: np.ndarray,
                props: RodProperties, dt: float) -> RodState:
    """Advance one macro step; the input state is left untouched."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    ctx = _StepContext(props, dt)
    r, th, pr, pth = _step_arrays(state.r, state.theta, state.p_r,
                                  state.p_theta, uF, uC, ctx)
    return RodState(r, th, pr, pth)


def _check_finite(step, p_r, p_th):
    # Verlet positions integrate momenta, so divergence always shows in p first
    m = max(np.abs(p_r).max(), np.abs(p_th).max())
    if not np.isfinite(m) or m > BLOWUP_LIMIT:
        raise BlowupError(step)


def simulate_forward(initial: RodState, control: ControlField,
                     props: RodProperties) -> Trajectory:
    """Integrate the full horizon, storing every macro step for the adjoint pass."""
    initial.validate(props.N)
    K = control.steps
    N = props.N
    r_hist = np.empty((K + 1, N + 1, 2))
    th_hist = np.empty((K + 1, N))
    pr_hist = np.empty((K + 1, N + 1, 2))
    pth_hist = np.empty((K + 1, N))

    r, th = initial.r.copy(), initial.theta.copy()
    pr, pth = initial.p_r.copy(), initial.p_theta.copy()
    if props.clamped_base:
        pr[0] = 0.0
        pth[0] = 0.0
    r_hist[0], th_hist[0], pr_hist[0], pth_hist[0] = r, th, pr, pth

    ctx = _StepContext(props, control.dt)
    uF, uC = control.uF, control.uC
    for k in range(K):
        r, th, pr, pth = _step_arrays(r, th, pr, pth, uF[k], uC[k], ctx)
        _check_finite(k + 1, pr, pth)
        r_hist[k + 1], th_hist[k + 1] = r, th
        pr_hist[k + 1], pth_hist[k + 1] = pr, pth

    return Trajectory(r_hist, th_hist, pr_hist, pth_hist, control.dt)
