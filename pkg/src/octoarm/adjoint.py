"""Backward integration of the costate fields along a stored forward trajectory.

The costate pairs (mu_r, mu_theta) and (gamma_r, gamma_theta) are dual to
(r, theta) and (p_r, p_theta). The terminal condition kicks mu_r at the tip
node with the terminal-miss gradient; gamma then plays the role of the
control sensitivity: the pointwise optimality condition is uF = gamma_r,
uC = gamma_theta.

The rates are the transpose of the forward linearization, expressed in the
normalization where gamma carries force/couple units (gamma-dot =
-mu/(rho A) + drag, terminal mu with no grid factor). In that normalization
the stiffness and coupling terms of the mu rates carry 1/ds density factors
relative to the gamma fields; the cross-coupling matrix Q(M2 n - S M2 nu)
appears (transposed) in both mu rates.

simulate_backward steps with the exact algebraic transpose of the forward
position-Verlet step: gamma half-update from mu, mu full update against the
stiffness evaluated at the same half-step configuration the forward kick
used (reconstructed from the stored state), viscous decay transposed from
the forward's semi-implicit kick, then the second gamma half-update. This
makes the backward sweep the exact adjoint of the time-discrete forward map
up to the running-cost quadrature, which is what makes finite differences of
the cost agree with the adjoint gradient to discretization accuracy.
"""

from dataclasses import dataclass

import numpy as np

from .forward import BLOWUP_LIMIT, BlowupError, ControlField, Trajectory
from .ops import dbar, dtilde
from .rod import RodProperties, RodState, cross2, rotate, rotate_t, strains_of


@dataclass
class CostateState:
    mu_r: np.ndarray         # (N+1, 2)
    mu_theta: np.ndarray     # (N,)
    gamma_r: np.ndarray      # (N+1, 2)
    gamma_theta: np.ndarray  # (N,)

    def copy(self) -> "CostateState":
        return CostateState(self.mu_r.copy(), self.mu_theta.copy(),
                            self.gamma_r.copy(), self.gamma_theta.copy())


def zero_costate(N: int) -> CostateState:
    return CostateState(np.zeros((N + 1, 2)), np.zeros(N),
                        np.zeros((N + 1, 2)), np.zeros(N))


@dataclass
class CostateSequence:
    """Costates at every macro step, index-aligned with the Trajectory.

    gamma_r_half / gamma_theta_half hold the decayed half-level gamma of each
    backward step; entry k is the field the control slice u_k pairs with in
    the exact discrete gradient of the cost.
    """

    mu_r: np.ndarray         # (steps+1, N+1, 2)
    mu_theta: np.ndarray     # (steps+1, N)
    gamma_r: np.ndarray      # (steps+1, N+1, 2)
    gamma_theta: np.ndarray  # (steps+1, N)
    dt: float
    gamma_r_half: np.ndarray = None      # (steps, N+1, 2)
    gamma_theta_half: np.ndarray = None  # (steps, N)

    @property
    def steps(self) -> int:
        return self.mu_r.shape[0] - 1

    def state(self, k: int) -> CostateState:
        return CostateState(self.mu_r[k].copy(), self.mu_theta[k].copy(),
                            self.gamma_r[k].copy(), self.gamma_theta[k].copy())


@dataclass
class ForwardSlice:
    """Forward quantities the costate rates need at one time level."""

    cos_t: np.ndarray  # (N,)
    sin_t: np.ndarray  # (N,)
    nu: np.ndarray     # (N, 2)
    sigma: np.ndarray  # (N, 2)
    n: np.ndarray      # (N, 2)
    m: np.ndarray      # (N-1,)


def forward_slice(r: np.ndarray, theta: np.ndarray,
                  props: RodProperties) -> ForwardSlice:
    st = strains_of(r, theta, props)
    n = props.S * st.sigma
    m = props.B * (st.kappa - props.kappa_intrinsic)
    return ForwardSlice(cos_t=np.cos(theta), sin_t=np.sin(theta),
                        nu=st.nu, sigma=st.sigma, n=n, m=m)


def terminal_costate(final_state: RodState, target, chi2: float) -> CostateState:
    """Transversality: mu_r = -chi2*(r_tip - target) at the tip node, rest zero."""
    N = final_state.theta.shape[0]
    cs = zero_costate(N)
    cs.mu_r[-1] = -chi2 * (final_state.r[-1] - np.asarray(target, dtype=float))
    return cs


class _BackContext:
    """Per-run constants of the costate recursion."""

    def __init__(self, props: RodProperties, chi1: float, dt: float = 0.0):
        self.props = props
        self.chi1 = chi1
        ds = props.ds
        self.S_ds2 = props.S / ds**2
        self.B_ds2 = props.B / ds**2
        self.inv_ds = 1.0 / ds
        self.ds = ds
        self.inv_rhoA = 1.0 / (props.rho * props.A_node[:, None])
        self.inv_rhoI = 1.0 / (props.rho * props.I)
        self.inv_mass = 1.0 / props.mass_node[:, None]
        if dt > 0.0:
            # viscous decay factors transposed from the forward kick
            self.decay_r = 1.0 / (1.0 + dt * props.zeta / props.mass_node[:, None])
            self.decay_th = 1.0 / (1.0 + dt * props.zeta / props.inertia_elem)


def _coupling_vector(sl: ForwardSlice, S: np.ndarray) -> np.ndarray:
    """c_j = Q_j (M2 n_j - S_j M2 nu_j), the strain/rotation cross block."""
    d = np.empty_like(sl.n)
    d[:, 0] = -sl.n[:, 1] + S[:, 0] * sl.nu[:, 1]
    d[:, 1] = sl.n[:, 0] - S[:, 1] * sl.nu[:, 0]
    return rotate(sl.cos_t, sl.sin_t, d)


def _mu_dyn_rates(g_r, g_th, sl: ForwardSlice, ctx: _BackContext):
    """Gamma-dependent part of the mu rates (transposed stiffness blocks)."""
    props = ctx.props
    gr_diff = dbar(g_r)                      # element field
    w = rotate_t(sl.cos_t, sl.sin_t, gr_diff)
    w *= ctx.S_ds2
    qsq = rotate(sl.cos_t, sl.sin_t, w)
    c = _coupling_vector(sl, props.S)
    dmu_r = -dtilde(qsq + c * (ctx.inv_ds * g_th)[:, None])

    gth_diff = dbar(g_th)                    # interior-node field
    # (M2 nu) x n + nu x (S M2 nu) = GA nu1^2 + EA nu2^2 - nu.n
    diag = (props.S[:, 1] * sl.nu[:, 0] ** 2 + props.S[:, 0] * sl.nu[:, 1] ** 2
            - (sl.nu * sl.n).sum(axis=1))
    dmu_th = -dtilde(ctx.B_ds2 * gth_diff) \
        + (c * gr_diff).sum(axis=1) * ctx.inv_ds \
        + diag * g_th
    if props.clamped_base:
        dmu_r[0] = 0.0
        dmu_th[0] = 0.0
    return dmu_r, dmu_th


def _chi1_sources(sl: ForwardSlice, ctx: _BackContext):
    """Deformation-penalty forcing of the mu rates: -chi1 * elastic loads."""
    qn = rotate(sl.cos_t, sl.sin_t, sl.n)
    src_r = -ctx.chi1 * dtilde(qn)
    src_th = -ctx.chi1 * (dtilde(sl.m) + cross2(sl.nu, sl.n) * ctx.ds)
    if ctx.props.clamped_base:
        src_r[0] = 0.0
        src_th[0] = 0.0
    return src_r, src_th


def _gamma_rates(mu_r, mu_th, g_r, g_th, ctx: _BackContext):
    props = ctx.props
    dg_r = -mu_r * ctx.inv_rhoA + props.zeta * g_r * ctx.inv_mass
    dg_th = (-mu_th + props.zeta * g_th / ctx.props.ds) * ctx.inv_rhoI
    if props.clamped_base:
        dg_r[0] = 0.0
        dg_th[0] = 0.0
    return dg_r, dg_th


def adjoint_rhs(costate: CostateState, sl: ForwardSlice,
                props: RodProperties, chi1: float):
    """Costate rates (dmu_r, dmu_theta, dgamma_r, dgamma_theta).

    dmu_r      = -dtilde(Q S Q^T dbar(gamma_r)/ds^2)
                 - dtilde(Q (M2 n - S M2 nu) gamma_theta)/ds - chi1*dtilde(Q n)
    dmu_theta  = -dtilde(B dbar(gamma_theta)/ds^2)
                 + [Q (M2 n - S M2 nu)].dbar(gamma_r)/ds
                 + [(M2 nu) x n + nu x (S M2 nu)] gamma_theta
                 - chi1*(dtilde(m) + (nu x n) ds)
    dgamma_r   = -mu_r/(rho A) + zeta*gamma_r/(rho A ds)
    dgamma_th  = -mu_theta/(rho I) + zeta*gamma_theta/(rho I ds)
    """
    ctx = _BackContext(props, chi1)
    dmu_r, dmu_th = _mu_dyn_rates(costate.gamma_r, costate.gamma_theta, sl, ctx)
    if chi1 != 0.0:
        src_r, src_th = _chi1_sources(sl, ctx)
        dmu_r += src_r
        dmu_th += src_th
    dg_r, dg_th = _gamma_rates(costate.mu_r, costate.mu_theta,
                               costate.gamma_r, costate.gamma_theta, ctx)
    if not (np.all(np.isfinite(dmu_r)) and np.all(np.isfinite(dmu_th))):
        raise BlowupError(-1, "non-finite costate rates")
    return dmu_r, dmu_th, dg_r, dg_th


def simulate_backward(trajectory: Trajectory, control: ControlField,
                      props: RodProperties, chi1: float, chi2: float,
                      target) -> CostateSequence:
    """Integrate the costates from T back to 0 along the stored trajectory."""
    K = trajectory.steps
    if control.steps != K:
        raise ValueError("control and trajectory lengths disagree")
    N = props.N
    dt = trajectory.dt
    ctx = _BackContext(props, chi1, dt=dt)
    half = 0.5 * dt
    drift_r = half / (props.rho * props.A_node[:, None])
    drift_th = half / (props.rho * props.I)
    vel_r = half * ctx.inv_mass            # forward half-drift coefficients
    vel_th = half / props.inertia_elem

    mu_r_hist = np.empty((K + 1, N + 1, 2))
    mu_th_hist = np.empty((K + 1, N))
    g_r_hist = np.empty((K + 1, N + 1, 2))
    g_th_hist = np.empty((K + 1, N))
    gh_r_hist = np.empty((K, N + 1, 2))
    gh_th_hist = np.empty((K, N))

    term = terminal_costate(trajectory.state(K), target, chi2)
    mu_r, mu_th = term.mu_r, term.mu_theta
    g_r, g_th = term.gamma_r, term.gamma_theta
    if props.clamped_base:
        mu_r[0] = 0.0
        mu_th[0] = 0.0
    mu_r_hist[K], mu_th_hist[K] = mu_r, mu_th
    g_r_hist[K], g_th_hist[K] = g_r, g_th

    for k in range(K, 0, -1):
        # transpose of forward step k-1, which kicked at the half-step
        # configuration reconstructed here from the stored level k-1 state
        gh_r = g_r + drift_r * mu_r
        gh_th = g_th + drift_th * mu_th
        w_r = ctx.decay_r * gh_r
        w_th = ctx.decay_th * gh_th
        if props.clamped_base:
            w_r[0] = 0.0
            w_th[0] = 0.0
        gh_r_hist[k - 1] = w_r
        gh_th_hist[k - 1] = w_th

        r_h = trajectory.r[k - 1] + vel_r * trajectory.p_r[k - 1]
        th_h = trajectory.theta[k - 1] + vel_th * trajectory.p_theta[k - 1]
        sl_h = forward_slice(r_h, th_h, props)
        dmu_r, dmu_th = _mu_dyn_rates(w_r, w_th, sl_h, ctx)
        if chi1 != 0.0:
            sl_k = forward_slice(trajectory.r[k - 1], trajectory.theta[k - 1],
                                 props)
            src_r, src_th = _chi1_sources(sl_k, ctx)
            dmu_r += src_r
            dmu_th += src_th
        mu_r = mu_r - dt * dmu_r
        mu_th = mu_th - dt * dmu_th

        g_r = w_r + drift_r * mu_r
        g_th = w_th + drift_th * mu_th

        if props.clamped_base:
            mu_r[0] = 0.0
            mu_th[0] = 0.0
            g_r[0] = 0.0
            g_th[0] = 0.0

        m = max(np.abs(mu_r).max(), np.abs(g_r).max())
        if not np.isfinite(m) or m > BLOWUP_LIMIT:
            raise BlowupError(k - 1)
        mu_r_hist[k - 1], mu_th_hist[k - 1] = mu_r, mu_th
        g_r_hist[k - 1], g_th_hist[k - 1] = g_r, g_th

    return CostateSequence(mu_r_hist, mu_th_hist, g_r_hist, g_th_hist, dt,
                           gamma_r_half=gh_r_hist, gamma_theta_half=gh_th_hist)
