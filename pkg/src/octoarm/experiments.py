"""Experiment configurations, runners and data export.

Three preset cases (reach, fetch, shoot) bundle the arm geometry, cost
weights and targets of the reference experiments; `custom` starts from the
same rod defaults and takes everything else from the file. Configs are JSON;
an optional "units" block admits cm/kPa inputs which are converted to SI at
parse time. Two resolution profiles are offered: "desk" (N=50, dt=2e-5, the
CI default) and "paper" (N=100, dt=1e-5).

Emitted files (comma-separated, header row first):
  log.csv           k, J, J_running, J_terminal, du_max, tip_dist
  snapshots.csv     iter, t, node, x, y
  theta.csv         iter, t, element, theta
  control_final.csv t, index, kind, value        (kind in {Fx, Fy, C})
  wavespeed.csv     E, rho, c, coeff, r2, direction
"""

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .control import CostWeights, SolveLog, solve
from .forward import ControlField, Trajectory, simulate_forward
from .rod import RodProperties, RodState, straight_state, tapered_properties

PROFILES = {"desk": dict(N=50, dt=2e-5), "paper": dict(N=100, dt=1e-5)}

ROD_DEFAULTS = dict(L0=0.2, phi_base=0.02, phi_tip=0.008, rho=1042.0,
                    E=1e4, zeta=0.01)

CASE_PRESETS = {
    "reach": dict(T=0.5, chi1=10.0, chi2=2e4, eta=3e-5, iterations=20,
                  target=(0.09, 0.09)),
    "fetch": dict(T=0.6, chi1=10.0, chi2=2e4, eta=4e-5, iterations=40,
                  target=(0.0, -0.02)),
    "shoot": dict(T=0.8, chi1=100.0, chi2=2e4, eta=3e-5, iterations=20,
                  target=(0.16, 0.10),
                  bump_magnitudes=(20.0, 78.0, 10.0, -30.0),
                  bump_centers=(0.0, 0.06, 0.14, 0.17),
                  bump_widths=(0.015, 0.015, 0.012, 0.008)),
    "custom": dict(),
}

_LENGTH_FACTORS = {"m": 1.0, "cm": 0.01}
_MODULUS_FACTORS = {"Pa": 1.0, "kPa": 1e3}

_KNOWN_KEYS = {
    "case", "profile", "units", "L0", "N", "dt", "phi_base", "phi_tip",
    "rho", "E", "zeta", "chi1", "chi2", "eta", "T", "iterations", "epsilon",
    "target", "bump_magnitudes", "bump_centers", "bump_widths",
    "output_dir", "snapshot_stride", "sweep",
}
_SWEEP_KEYS = {"E", "rho", "pairs", "chi1"}


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    """Fully resolved experiment description in SI units."""

    case: str = "reach"
    profile: str = "desk"
    L0: float = ROD_DEFAULTS["L0"]
    N: int = 50
    dt: float = 2e-5
    phi_base: float = ROD_DEFAULTS["phi_base"]
    phi_tip: float = ROD_DEFAULTS["phi_tip"]
    rho: float = ROD_DEFAULTS["rho"]
    E: float = ROD_DEFAULTS["E"]
    zeta: float = ROD_DEFAULTS["zeta"]
    chi1: float = 10.0
    chi2: float = 2e4
    eta: float = 3e-5
    T: float = 0.5
    iterations: int = 20
    epsilon: float = 1e-8
    target: tuple = (0.09, 0.09)
    bump_magnitudes: tuple = ()
    bump_centers: tuple = ()
    bump_widths: tuple = ()
    output_dir: str = "out"
    snapshot_stride: int = 5
    sweep: dict = field(default_factory=dict)

    def rod_properties(self) -> RodProperties:
        return tapered_properties(self.L0, self.N, self.phi_base, self.phi_tip,
                                  self.rho, self.E, self.zeta)

    def weights(self) -> CostWeights:
        return CostWeights(chi1=self.chi1, chi2=self.chi2, eta=self.eta, T=self.T)


def _apply_units(data: dict) -> dict:
    units = data.pop("units", {})
    if not isinstance(units, dict):
        raise ConfigError("'units' must be an object")
    bad = set(units) - {"length", "modulus"}
    if bad:
        raise ConfigError(f"unknown units keys: {sorted(bad)}")
    lf = _LENGTH_FACTORS.get(units.get("length", "m"))
    mf = _MODULUS_FACTORS.get(units.get("modulus", "Pa"))
    if lf is None or mf is None:
        raise ConfigError("units.length must be m|cm, units.modulus Pa|kPa")
    for key in ("L0", "phi_base", "phi_tip"):
        if key in data:
            data[key] = data[key] * lf
    if "target" in data:
        data["target"] = tuple(x * lf for x in data["target"])
    for key in ("bump_centers", "bump_widths"):
        if key in data:
            data[key] = tuple(x * lf for x in data[key])
    if "bump_magnitudes" in data:
        data["bump_magnitudes"] = tuple(x / lf for x in data["bump_magnitudes"])
    if "E" in data:
        data["E"] = data["E"] * mf
    return data


def config_from_dict(raw: dict) -> ExperimentConfig:
    data = dict(raw)
    unknown = set(data) - _KNOWN_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    case = data.get("case", "reach")
    if case not in CASE_PRESETS:
        raise ConfigError(f"unknown case '{case}' "
                          f"(expected one of {sorted(CASE_PRESETS)})")
    profile = data.get("profile", "desk")
    if profile not in PROFILES:
        raise ConfigError(f"unknown profile '{profile}' (expected desk|paper)")
    data = _apply_units(data)

    merged = dict(case=case, profile=profile, **PROFILES[profile])
    merged.update(CASE_PRESETS[case])
    for k, v in data.items():
        if k in ("case", "profile"):
            continue
        merged[k] = v

    if "sweep" in merged:
        sweep = merged["sweep"]
        if not isinstance(sweep, dict):
            raise ConfigError("'sweep' must be an object")
        bad = set(sweep) - _SWEEP_KEYS
        if bad:
            raise ConfigError(f"unknown sweep keys: {sorted(bad)}")

    cfg = ExperimentConfig(**{k: _coerce(k, v) for k, v in merged.items()})
    _validate(cfg)
    return cfg


def _coerce(key, value):
    if key in ("target", "bump_magnitudes", "bump_centers", "bump_widths"):
        return tuple(float(x) for x in value)
    if key in ("N", "iterations", "snapshot_stride"):
        return int(value)
    if key in ("case", "profile", "output_dir"):
        return str(value)
    if key == "sweep":
        return dict(value)
    return float(value)


def _validate(cfg: ExperimentConfig):
    if cfg.L0 <= 0 or cfg.phi_tip <= 0 or cfg.phi_base < cfg.phi_tip:
        raise ConfigError("rod geometry invalid (L0, phi_base >= phi_tip > 0)")
    if cfg.rho <= 0 or cfg.E <= 0 or cfg.zeta < 0:
        raise ConfigError("material constants invalid")
    if cfg.N < 2 or cfg.dt <= 0 or cfg.T <= 0 or cfg.iterations < 1:
        raise ConfigError("numerics invalid (N >= 2, dt > 0, T > 0, iterations >= 1)")
    if cfg.chi1 < 0 or cfg.chi2 <= 0 or cfg.eta <= 0 or cfg.epsilon <= 0:
        raise ConfigError("weights invalid (chi1 >= 0, chi2 > 0, eta > 0, epsilon > 0)")
    if len(cfg.target) != 2:
        raise ConfigError("target must be a 2-vector")
    nb = len(cfg.bump_magnitudes)
    if not (nb == len(cfg.bump_centers) == len(cfg.bump_widths)):
        raise ConfigError("bump lists must have equal lengths")
    if any(w <= 0 for w in cfg.bump_widths):
        raise ConfigError("bump widths must be positive")
    if cfg.snapshot_stride < 1:
        raise ConfigError("snapshot_stride must be >= 1")


def parse_config(path) -> ExperimentConfig:
    """Read and validate a JSON experiment config (SI after conversion)."""
    text = Path(path).read_text()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: line {e.lineno}, column {e.colno}: {e.msg}") from e
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be an object")
    try:
        return config_from_dict(raw)
    except ConfigError as e:
        raise ConfigError(f"{path}: {e}") from e


def serialize_config(cfg: ExperimentConfig) -> dict:
    """SI-unit dict whose parse round-trips to an identical config."""
    d = asdict(cfg)
    d["target"] = list(cfg.target)
    for key in ("bump_magnitudes", "bump_centers", "bump_widths"):
        d[key] = list(d[key])
    return d


def write_config(cfg: ExperimentConfig, path):
    Path(path).write_text(json.dumps(serialize_config(cfg), indent=2) + "\n")


def initial_bent_state(cfg: ExperimentConfig,
                       props: RodProperties = None) -> RodState:
    """Rod bent by the configured curvature bumps, at rest.

    kappa(s) = sum_i M_i exp(-(s - s_i)^2 / (2 w_i^2)); the angle field is the
    arc-length integral of kappa sampled at element midpoints, and positions
    chain the element angles so the stretch/shear strain is exactly intrinsic.
    """
    if props is None:
        props = cfg.rod_properties()
    N = props.N
    ds = props.ds
    if not cfg.bump_magnitudes:
        return straight_state(props)

    mags = np.asarray(cfg.bump_magnitudes)
    ctrs = np.asarray(cfg.bump_centers)
    wids = np.asarray(cfg.bump_widths)

    def kappa(s):
        return float((mags * np.exp(-((s - ctrs) ** 2) / (2.0 * wids**2))).sum())

    # theta at element midpoints: midpoint-rule integral of kappa from 0
    theta = np.empty(N)
    acc = kappa(0.25 * ds) * 0.5 * ds
    theta[0] = acc
    for j in range(1, N):
        acc += kappa(j * ds) * ds
        theta[j] = acc
    r = np.zeros((N + 1, 2))
    for j in range(N):
        r[j + 1, 0] = r[j, 0] + ds * math.cos(theta[j])
        r[j + 1, 1] = r[j, 1] + ds * math.sin(theta[j])
    return RodState(r=r, theta=theta, p_r=np.zeros((N + 1, 2)),
                    p_theta=np.zeros(N))


@dataclass
class WaveSpeedRow:
    E: float
    rho: float
    c: float        # signed speed, base-to-tip positive [m/s]
    coeff: float    # |c| / sqrt(E/rho)
    r2: float
    direction: str  # base_to_tip | tip_to_base | both | unreliable


FRONT_LEVEL = 0.02  # wave-arrival threshold, fraction of the per-step max


def _fit_track(times, locs):
    """Least-squares line through (t, location); returns (slope, r2)."""
    t = np.asarray(times, dtype=float)
    x = np.asarray(locs, dtype=float)
    if len(t) < 3 or np.ptp(x) == 0.0:
        return 0.0, 0.0
    A = np.column_stack([t - t.mean(), np.ones_like(t)])
    coefs, *_ = np.linalg.lstsq(A, x, rcond=None)
    fit = A @ coefs
    ss_res = float(((x - fit) ** 2).sum())
    ss_tot = float(((x - x.mean()) ** 2).sum())
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
    return float(coefs[0]), r2


def _wave_tracks(mag: np.ndarray):
    """Candidate wave-position signals per step: leading edge, trailing
    edge (first/last crossing of FRONT_LEVEL x per-step max) and argmax.

    For a translating pulse all three move at the pulse speed; on the
    tip-anchored ramps of converged control fields only the edges move.
    Positions are in element-index units. Each track carries a validity
    mask: edge samples pinned at the domain boundary (the wave has already
    arrived everywhere) carry no speed information and are dropped.
    """
    n = mag.shape[1]
    peak = np.argmax(mag, axis=1).astype(float)
    lead = np.empty(mag.shape[0])
    trail = np.empty(mag.shape[0])
    thresh = FRONT_LEVEL * mag.max(axis=1)
    for i in range(mag.shape[0]):
        idx = np.nonzero(mag[i] >= thresh[i])[0]
        if len(idx) == 0:
            lead[i] = peak[i]
            trail[i] = peak[i]
        else:
            lead[i] = idx[0]
            trail[i] = idx[-1]
    ones = np.ones(mag.shape[0], dtype=bool)
    return [
        (lead, lead > 0),
        (trail, trail < n - 1),
        (peak, ones),
    ]


def _best_track(mag, times, ds):
    """Best linear fit over the candidate tracks.

    Besides the full window, each track is also fit on the suffix starting
    at its last extremum: when the wave crosses the whole domain before the
    window ends, the early samples sit pinned at a boundary and only the
    final crossing carries the speed.
    """
    min_len = max(3, int(0.2 * len(times)))
    best = (0.0, 0.0)
    for locs, valid in _wave_tracks(mag):
        idx = np.nonzero(valid)[0]
        if len(idx) < min_len:
            continue
        l_val = locs[idx]
        starts = {0}
        starts.add(int(np.nonzero(l_val == l_val.min())[0][-1]))
        starts.add(int(np.nonzero(l_val == l_val.max())[0][-1]))
        for s0 in starts:
            sel = idx[s0:]
            if len(sel) < min_len:
                continue
            slope, r2 = _fit_track(times[sel], (locs[sel] + 0.5) * ds)
            if r2 > best[1]:
                best = (slope, r2)
    return best


def _window_steps(control: ControlField, window):
    t_a, t_b = window
    dt = control.dt
    T = control.steps * dt
    if not (0.0 <= t_a < t_b <= T + 1e-9):
        raise ValueError("window must lie inside [0, T]")
    k_a = int(round(t_a / dt))
    k_b = min(int(round(t_b / dt)), control.steps - 1)
    return np.arange(k_a, k_b + 1)


def estimate_wave_speed(control: ControlField, window, props: RodProperties,
                        E: float = None, rho: float = None,
                        use_force: bool = False) -> WaveSpeedRow:
    """Fit the propagation speed of |uC| (or |uF|) over the window.

    The wave position per step is tracked by the level-set signals of
    ``_wave_tracks``; the best-fitting linear track gives the signed speed
    (positive = base to tip). Rows with R^2 < 0.5 are flagged unreliable
    rather than rejected.
    """
    ks = _window_steps(control, window)
    if use_force:
        mag = np.linalg.norm(control.uF[ks], axis=2)
    else:
        mag = np.abs(control.uC[ks])
    slope, r2 = _best_track(mag, ks * control.dt, props.ds)
    E = props.E if E is None else E
    rho = props.rho if rho is None else rho
    coeff = abs(slope) / math.sqrt(E / rho)
    if r2 < 0.5:
        direction = "unreliable"
    else:
        direction = "base_to_tip" if slope > 0 else "tip_to_base"
    return WaveSpeedRow(E=E, rho=rho, c=slope, coeff=coeff, r2=r2,
                        direction=direction)


def dominant_direction(control: ControlField, window,
                       props: RodProperties) -> WaveSpeedRow:
    """Direction of the dominant late-window wave; detects counter-waves.

    Also fits the wave track on each spatial half; strong opposite motion on
    the two halves is labeled "both" (two waves meeting mid-arm).
    """
    row = estimate_wave_speed(control, window, props)
    ks = _window_steps(control, window)
    mag = np.abs(control.uC[ks])
    half = mag.shape[1] // 2
    times = ks * control.dt
    s_lo, r2_lo = _best_track(mag[:, :half], times, props.ds)
    s_hi, r2_hi = _best_track(mag[:, half:], times, props.ds)
    amp_lo = mag[:, :half].max()
    amp_hi = mag[:, half:].max()
    comparable = (min(amp_lo, amp_hi) > 0.2 * max(amp_lo, amp_hi)
                  and 0.3 < abs(s_lo) / max(abs(s_hi), 1e-30) < 3.0)
    if r2_lo > 0.5 and r2_hi > 0.5 and s_lo * s_hi < 0 and comparable:
        row.direction = "both"
    return row


@dataclass
class RunArtifacts:
    out_dir: Path
    control: ControlField
    trajectory: Trajectory
    log: SolveLog
    props: RodProperties


SNAPSHOT_COUNT = 6


def _snapshot_steps(steps: int):
    return [round(i * steps / (SNAPSHOT_COUNT - 1)) for i in range(SNAPSHOT_COUNT)]


def _write_snapshot_rows(snap_writer, theta_writer, it, trajectory):
    dt = trajectory.dt
    for k in _snapshot_steps(trajectory.steps):
        t = k * dt
        for i, (x, y) in enumerate(trajectory.r[k]):
            snap_writer.writerow([it, f"{t:.9g}", i, f"{x:.9g}", f"{y:.9g}"])
        for j, th in enumerate(trajectory.theta[k]):
            theta_writer.writerow([it, f"{t:.9g}", j, f"{th:.9g}"])


def run_case(cfg: ExperimentConfig, out_dir=None) -> RunArtifacts:
    """Solve the configured case and write log/snapshot/control files."""
    out = Path(out_dir if out_dir is not None else cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_config(cfg, out / "config.json")

    props = cfg.rod_properties()
    initial = initial_bent_state(cfg, props)
    weights = cfg.weights()
    target = np.asarray(cfg.target)

    snapshot_iters = set(range(1, cfg.iterations + 1, cfg.snapshot_stride))
    snapshot_iters.add(cfg.iterations)

    with open(out / "log.csv", "w", newline="") as log_f, \
         open(out / "snapshots.csv", "w", newline="") as snap_f, \
         open(out / "theta.csv", "w", newline="") as theta_f:
        log_writer = csv.writer(log_f, lineterminator="\n")
        log_writer.writerow(["k", "J", "J_running", "J_terminal", "du_max",
                             "tip_dist"])
        snap_writer = csv.writer(snap_f, lineterminator="\n")
        snap_writer.writerow(["iter", "t", "node", "x", "y"])
        theta_writer = csv.writer(theta_f, lineterminator="\n")
        theta_writer.writerow(["iter", "t", "element", "theta"])

        def on_iteration(k, trajectory, log):
            log_writer.writerow([k, f"{log.J[-1]:.12g}",
                                 f"{log.J_running[-1]:.12g}",
                                 f"{log.J_terminal[-1]:.12g}",
                                 f"{log.du_max[-1]:.12g}",
                                 f"{log.tip_dist[-1]:.12g}"])
            log_f.flush()
            if k in snapshot_iters:
                _write_snapshot_rows(snap_writer, theta_writer, k, trajectory)
                snap_f.flush()
                theta_f.flush()

        control, trajectory, log = solve(
            initial, props, weights, target, cfg.iterations, cfg.epsilon,
            dt=cfg.dt, on_iteration=on_iteration)

    # final control, re-simulated so dumped artifacts are self-consistent
    trajectory = simulate_forward(initial, control, props)
    write_control(control, out / "control_final.csv")
    return RunArtifacts(out_dir=out, control=control, trajectory=trajectory,
                        log=log, props=props)


def write_control(control: ControlField, path):
    steps = control.steps
    n_nodes = control.uF.shape[1]
    n_elems = control.uC.shape[1]
    dt = control.dt
    with open(path, "w", newline="") as f:
        f.write("t,index,kind,value\n")
        for k in range(steps):
            t = f"{k * dt:.9g}"
            uF = control.uF[k]
            uC = control.uC[k]
            rows = []
            for i in range(n_nodes):
                rows.append(f"{t},{i},Fx,{uF[i, 0]:.9g}")
                rows.append(f"{t},{i},Fy,{uF[i, 1]:.9g}")
            for j in range(n_elems):
                rows.append(f"{t},{j},C,{uC[j]:.9g}")
            f.write("\n".join(rows) + "\n")


def read_control(path, props: RodProperties) -> ControlField:
    """Load a control_final.csv back into a ControlField."""
    times = []
    by_time = {}
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        for row in reader:
            t = float(row["t"])
            if t not in by_time:
                by_time[t] = {"Fx": {}, "Fy": {}, "C": {}}
                times.append(t)
            by_time[t][row["kind"]][int(row["index"])] = float(row["value"])
    steps = len(times)
    if steps < 2:
        raise ValueError("control file has fewer than two time levels")
    dt = times[1] - times[0]
    uF = np.zeros((steps, props.N + 1, 2))
    uC = np.zeros((steps, props.N))
    for k, t in enumerate(times):
        for i, v in by_time[t]["Fx"].items():
            uF[k, i, 0] = v
        for i, v in by_time[t]["Fy"].items():
            uF[k, i, 1] = v
        for j, v in by_time[t]["C"].items():
            uC[k, j] = v
    return ControlField(uF=uF, uC=uC, dt=dt)


def _sweep_rows(cfg: ExperimentConfig):
    sweep = cfg.sweep or {}
    if "chi1" in sweep:
        return [("chi1", float(x)) for x in sweep["chi1"]]
    if "pairs" in sweep:
        return [("pair", (float(E), float(rho))) for E, rho in sweep["pairs"]]
    if "E" in sweep or "rho" in sweep:
        Es = [float(x) for x in sweep.get("E", [cfg.E])]
        rhos = [float(x) for x in sweep.get("rho", [cfg.rho])]
        return [("pair", (E, rho)) for E in Es for rho in rhos]
    raise ConfigError("sweep block is empty")


def _row_config(cfg: ExperimentConfig, kind, value) -> ExperimentConfig:
    d = serialize_config(cfg)
    d["sweep"] = {}
    if kind == "chi1":
        d["chi1"] = value
        d["output_dir"] = str(Path(cfg.output_dir) / f"chi1_{value:g}")
    else:
        E, rho = value
        d["E"] = E
        d["rho"] = rho
        d["output_dir"] = str(Path(cfg.output_dir) / f"E{E:g}_rho{rho:g}")
    return config_from_dict(d)


def _run_sweep_row(args):
    cfg_dict, kind, value, window = args
    cfg = config_from_dict(cfg_dict)
    row_cfg = _row_config(cfg, kind, value)
    art = run_case(row_cfg)
    if kind == "chi1":
        row = dominant_direction(art.control, window, art.props)
    else:
        row = estimate_wave_speed(art.control, window, art.props)
    return kind, value, row


def chi1_sweep(cfg: ExperimentConfig, workers: int = 1, window=None):
    """Run the reach task per chi1 value and report the dominant late-window
    wave direction of each converged control (see dominant_direction)."""
    if "chi1" not in (cfg.sweep or {}):
        raise ConfigError("chi1_sweep needs a sweep block with a chi1 list")
    if window is None:
        window = (0.9 * cfg.T, cfg.T)
    return run_sweep(cfg, workers=workers, window=window)


def run_sweep(cfg: ExperimentConfig, workers: int = 1, window=None):
    """Run all sweep rows (optionally in parallel) and write wavespeed.csv.

    The tracking window defaults to the last fifth of the horizon, the
    late-time interval where the traveling wave dominates the control.
    """
    rows = _sweep_rows(cfg)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    if window is None:
        window = (0.8 * cfg.T, cfg.T)
    args = [(serialize_config(cfg), kind, value, window) for kind, value in rows]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_sweep_row, args))
    else:
        results = [_run_sweep_row(a) for a in args]

    with open(out / "wavespeed.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["E", "rho", "c", "coeff", "r2", "direction"])
        for kind, value, row in results:
            w.writerow([f"{row.E:.9g}", f"{row.rho:.9g}", f"{row.c:.9g}",
                        f"{row.coeff:.9g}", f"{row.r2:.9g}", row.direction])
    return results
