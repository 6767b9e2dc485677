"""Command-line entry point: run cases, sweeps, and wave-speed estimation."""

import argparse
import csv
import json
import sys
from pathlib import Path


from .experiments import (
    ConfigError,
    config_from_dict,
    estimate_wave_speed,
    parse_config,
    read_control,
    run_case,
    run_sweep,
    serialize_config,
)


def _load(args) -> "ExperimentConfig":
    cfg = parse_config(args.config)
    over = serialize_config(cfg)
    if args.profile:
        from .experiments import PROFILES
        over["profile"] = args.profile
        over.update(PROFILES[args.profile])
    if args.out:
        over["output_dir"] = args.out
    return config_from_dict(over)


def cmd_run(args):
    cfg = _load(args)
    art = run_case(cfg)
    tip = art.log.tip_dist[-1]
    print(f"case={cfg.case} iterations={len(art.log)} "
          f"J={art.log.J[-1]:.6g} tip_dist={tip:.6g} m -> {art.out_dir}")
    return 0


def cmd_sweep(args):
    cfg = _load(args)
    results = run_sweep(cfg, workers=args.workers)
    for kind, value, row in results:
        print(f"{kind}={value} c={row.c:.4g} m/s coeff={row.coeff:.4g} "
              f"r2={row.r2:.3f} direction={row.direction}")
    print(f"-> {Path(cfg.output_dir) / 'wavespeed.csv'}")
    return 0


def cmd_wavespeed(args):
    run_dir = Path(args.run_dir)
    cfg_path = run_dir / "config.json"
    ctl_path = run_dir / "control_final.csv"
    if not cfg_path.exists() or not ctl_path.exists():
        print(f"error: {run_dir} does not look like a run directory "
              f"(missing config.json or control_final.csv)", file=sys.stderr)
        return 2
    cfg = config_from_dict(json.loads(cfg_path.read_text()))
    props = cfg.rod_properties()
    control = read_control(ctl_path, props)
    window = (args.t_from if args.t_from is not None else 0.8 * cfg.T,
              args.t_to if args.t_to is not None else cfg.T)
    row = estimate_wave_speed(control, window, props, use_force=args.force)
    out = run_dir / "wavespeed.csv"
    with open(out, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["E", "rho", "c", "coeff", "r2", "direction"])
        w.writerow([f"{row.E:.9g}", f"{row.rho:.9g}", f"{row.c:.9g}",
                    f"{row.coeff:.9g}", f"{row.r2:.9g}", row.direction])
    print(f"c={row.c:.4g} m/s coeff={row.coeff:.4g} r2={row.r2:.3f} "
          f"direction={row.direction} -> {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="octoarm",
        description="Optimal-control experiments for a planar elastic arm")
    sub = p.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="solve one case and write artifacts")
    run_p.add_argument("config", help="JSON config file")
    run_p.add_argument("--profile", choices=["desk", "paper"],
                       help="resolution profile override")
    run_p.add_argument("--out", help="output directory override")
    run_p.set_defaults(func=cmd_run)

    sweep_p = sub.add_parser("sweep", help="run the config's sweep block")
    sweep_p.add_argument("config", help="JSON config file with a sweep block")
    sweep_p.add_argument("--profile", choices=["desk", "paper"])
    sweep_p.add_argument("--out", help="output directory override")
    sweep_p.add_argument("--workers", type=int, default=1,
                         help="parallel sweep rows (default 1)")
    sweep_p.set_defaults(func=cmd_sweep)

    ws_p = sub.add_parser("wavespeed",
                          help="estimate wave speed from a run directory")
    ws_p.add_argument("run_dir", help="directory produced by `octoarm run`")
    ws_p.add_argument("--t-from", type=float, default=None,
                      help="window start [s] (default 0.8*T)")
    ws_p.add_argument("--t-to", type=float, default=None,
                      help="window end [s] (default T)")
    ws_p.add_argument("--force", action="store_true",
                      help="track |uF| instead of |uC|")
    ws_p.set_defaults(func=cmd_wavespeed)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
