"""Planar elastic rod model: tapered geometry, linear material law, strains, energies.

The rod is discretized on a staggered grid with N+1 nodes (positions r),
N elements (angles theta, stretch/shear nu) and N-1 interior nodes
(curvature kappa). Cross-section properties follow a linearly tapered
diameter profile; the stored energy is quadratic in the strain deviations,
so internal loads are linear in them.

Units are strict SI throughout. Momenta are grid-integrated quantities:
p_r[i] = rho*A_node[i]*ds * dr[i]/dt and p_theta[j] = rho*I[j]*ds * dtheta[j]/dt,
so the diagonal mass matrix entries are mass_node and inertia_elem below.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .ops import dbar, node_diff


@dataclass(frozen=True)
class RodProperties:
    """Geometry, material constants and per-location rigidities of one rod.

    Per-element arrays (A, I, S) are evaluated at element midpoints; B and
    kappa_intrinsic live on interior nodes; A_node at the nodes feeds the
    mass matrix. Use :func:`tapered_properties` to build a consistent set.
    """

    L0: float
    N: int
    phi_base: float
    phi_tip: float
    rho: float
    E: float
    G: float
    zeta: float
    ds: float
    A: np.ndarray            # (N,) element cross-section area
    I: np.ndarray            # (N,) element second moment of area
    S: np.ndarray            # (N, 2) stretch-shear rigidity diagonal (EA, GA)
    B: np.ndarray            # (N-1,) bending rigidity EI at interior nodes
    nu_intrinsic: np.ndarray      # (N, 2)
    kappa_intrinsic: np.ndarray   # (N-1,)
    A_node: np.ndarray       # (N+1,) node cross-section area
    clamped_base: bool = True
    mass_node: np.ndarray = field(default=None, repr=False)     # (N+1,) rho*A_node*ds
    inertia_elem: np.ndarray = field(default=None, repr=False)  # (N,) rho*I*ds

    def __post_init__(self):
        if self.mass_node is None:
            object.__setattr__(self, "mass_node", self.rho * self.A_node * self.ds)
        if self.inertia_elem is None:
            object.__setattr__(self, "inertia_elem", self.rho * self.I * self.ds)

    def with_clamp(self, clamped: bool) -> "RodProperties":
        return replace(self, clamped_base=clamped)


def taper_profile(props: RodProperties, s) -> np.ndarray:
    """Diameter at arc length s: linear from phi_base (s=0) to phi_tip (s=L0)."""
    s = np.asarray(s, dtype=float)
    if np.any(s < 0.0) or np.any(s > props.L0):
        raise ValueError(f"arc length outside [0, {props.L0}]")
    return props.phi_base * (props.L0 - s) / props.L0 + props.phi_tip * s / props.L0


def tapered_properties(
    L0: float,
    N: int,
    phi_base: float,
    phi_tip: float,
    rho: float,
    E: float,
    zeta: float,
    nu_intrinsic=(1.0, 0.0),
    kappa_intrinsic=0.0,
    clamped_base: bool = True,
) -> RodProperties:
    """Build RodProperties for a linearly tapered rod.

    A = pi*phi^2/4 and I = A^2/(4*pi) from the taper diameter; the effective
    shear modulus is G = (4/3)*E/(2*(1+0.5)) = 4E/9 (incompressible isotropic
    material with the Timoshenko shear correction).
    """
    if L0 <= 0 or N < 2:
        raise ValueError("need L0 > 0 and N >= 2")
    if not (phi_base >= phi_tip > 0):
        raise ValueError("need phi_base >= phi_tip > 0")
    if rho <= 0 or E <= 0 or zeta < 0:
        raise ValueError("need rho > 0, E > 0, zeta >= 0")

    G = 4.0 * E / 9.0
    ds = L0 / N

    def area(s):
        phi = phi_base * (L0 - s) / L0 + phi_tip * s / L0
        return np.pi * phi**2 / 4.0

    s_mid = (np.arange(N) + 0.5) * ds
    s_int = np.arange(1, N) * ds
    s_node = np.arange(N + 1) * ds

    A = area(s_mid)
    I = A**2 / (4.0 * np.pi)
    S = np.column_stack([E * A, G * A])
    A_int = area(s_int)
    B = E * A_int**2 / (4.0 * np.pi)
    A_node = area(s_node)

    nu0 = np.broadcast_to(np.asarray(nu_intrinsic, dtype=float), (N, 2)).copy()
    kappa0 = np.broadcast_to(np.asarray(kappa_intrinsic, dtype=float), (N - 1,)).copy()

    return RodProperties(
        L0=L0, N=N, phi_base=phi_base, phi_tip=phi_tip, rho=rho, E=E, G=G,
        zeta=zeta, ds=ds, A=A, I=I, S=S, B=B,
        nu_intrinsic=nu0, kappa_intrinsic=kappa0, A_node=A_node,
        clamped_base=clamped_base,
    )


@dataclass
class RodState:
    """Positions/angles and their conjugate momenta at one time instant."""

    r: np.ndarray        # (N+1, 2)
    theta: np.ndarray    # (N,)
    p_r: np.ndarray      # (N+1, 2)
    p_theta: np.ndarray  # (N,)

    def validate(self, N: int):
        if self.r.shape != (N + 1, 2) or self.theta.shape != (N,):
            raise ValueError("state arrays do not match the grid")
        if self.p_r.shape != (N + 1, 2) or self.p_theta.shape != (N,):
            raise ValueError("momentum arrays do not match the grid")
        for a in (self.r, self.theta, self.p_r, self.p_theta):
            if not np.all(np.isfinite(a)):
                raise ValueError("non-finite entries in rod state")

    def copy(self) -> "RodState":
        return RodState(self.r.copy(), self.theta.copy(),
                        self.p_r.copy(), self.p_theta.copy())


def straight_state(props: RodProperties) -> RodState:
    """Undeformed rod along +x, anchored at the origin, at rest."""
    N = props.N
    r = np.zeros((N + 1, 2))
    r[:, 0] = np.arange(N + 1) * props.ds
    return RodState(r=r, theta=np.zeros(N), p_r=np.zeros((N + 1, 2)),
                    p_theta=np.zeros(N))


@dataclass
class StrainField:
    nu: np.ndarray      # (N, 2) stretch/shear per element
    kappa: np.ndarray   # (N-1,) curvature at interior nodes
    sigma: np.ndarray   # (N, 2) nu - nu_intrinsic


@dataclass
class InternalLoads:
    n: np.ndarray   # (N, 2) material-frame force per element
    m: np.ndarray   # (N-1,) couple at interior nodes


def rotate(cos_t, sin_t, v):
    """Apply the planar rotation Q(theta) elementwise to 2-vectors v."""
    out = np.empty_like(v)
    out[..., 0] = cos_t * v[..., 0] - sin_t * v[..., 1]
    out[..., 1] = sin_t * v[..., 0] + cos_t * v[..., 1]
    return out


def rotate_t(cos_t, sin_t, v):
    """Apply the transposed rotation Q(theta)^T elementwise to 2-vectors v."""
    out = np.empty_like(v)
    out[..., 0] = cos_t * v[..., 0] + sin_t * v[..., 1]
    out[..., 1] = -sin_t * v[..., 0] + cos_t * v[..., 1]
    return out


def cross2(x, y):
    """Planar cross product x1*y2 - x2*y1."""
    return x[..., 0] * y[..., 1] - x[..., 1] * y[..., 0]


def compute_strains(state: RodState, props: RodProperties) -> StrainField:
    """Material-frame stretch/shear per element and curvature at interior nodes."""
    return strains_of(state.r, state.theta, props)


def strains_of(r: np.ndarray, theta: np.ndarray, props: RodProperties) -> StrainField:
    cos_t = np.cos(theta)
    sin_t = np.sin(theta)
    tangent = node_diff(r) / props.ds
    nu = rotate_t(cos_t, sin_t, tangent)
    kappa = dbar(theta) / props.ds
    sigma = nu - props.nu_intrinsic
    return StrainField(nu=nu, kappa=kappa, sigma=sigma)


def internal_loads(strains: StrainField, props: RodProperties) -> InternalLoads:
    """Linear law: n = S sigma per element, m = B (kappa - kappa0) per interior node."""
    n = props.S * strains.sigma
    m = props.B * (strains.kappa - props.kappa_intrinsic)
    return InternalLoads(n=n, m=m)


def potential_energy(strains: StrainField, props: RodProperties) -> float:
    sig = strains.sigma
    dk = strains.kappa - props.kappa_intrinsic
    w_elem = 0.5 * (props.S[:, 0] * sig[:, 0] ** 2 + props.S[:, 1] * sig[:, 1] ** 2)
    w_bend = 0.5 * props.B * dk**2
    return float((w_elem.sum() + w_bend.sum()) * props.ds)


def energies(state: RodState, props: RodProperties):
    """Kinetic, potential and total mechanical energy of a state."""
    kin = float(
        (state.p_r**2).sum(axis=1) @ (0.5 / props.mass_node)
        + state.p_theta**2 @ (0.5 / props.inertia_elem)
    )
    pot = potential_energy(strains_of(state.r, state.theta, props), props)
    return kin, pot, kin + pot
