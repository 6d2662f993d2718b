"""Command-line front end.

Subcommands: sweep, optimize, hybrid-curve, boundary, adaptive, and
oracle dump. A flat key-value config file (--config) mirrors the sweep
flags; explicit flags override it. Every run writes a manifest (resolved
config + seed + version) beside its outputs.

Exit codes: 0 success, 2 configuration/usage errors, 1 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__, hybrid, oracle, protocols, sweep
from .noise import RdgInstance, make_rng
from .optimize import OptimizeConfig, optimize_qsp


class ConfigError(Exception):
    pass


def _load_config(path: str) -> dict:
    """Parse `key = value` lines; '#' starts a comment."""
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    cfg = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            key, value = (part.strip() for part in line.split("=", 1))
            cfg[key.replace("_", "-")] = value
    return cfg


def _merged(args, cfg: dict, key: str, default, cast):
    """Flag value if given, else config file value, else default."""
    flag = getattr(args, key.replace("-", "_"), None)
    if flag is not None:
        return flag
    if key in cfg:
        try:
            return cast(cfg[key])
        except ValueError as exc:
            raise ConfigError(f"bad config value for {key}: {cfg[key]}") from exc
    return default


def _write_manifest(out_dir: str, subcommand: str, config: dict, outputs: list):
    manifest = {
        "version": __version__,
        "subcommand": subcommand,
        "config": config,
        "outputs": outputs,
    }
    path = os.path.join(out_dir, "manifest.json")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _cmd_sweep(args) -> int:
    cfg = _load_config(args.config) if args.config else {}
    resolved = {
        "delta-min": _merged(args, cfg, "delta-min", 0.0, float),
        "delta-max": _merged(args, cfg, "delta-max", math.pi / 2, float),
        "delta-steps": _merged(args, cfg, "delta-steps", 200, int),
        "sigma-min": _merged(args, cfg, "sigma-min", 0.0, float),
        "sigma-max": _merged(args, cfg, "sigma-max", 1.2, float),
        "sigma-steps": _merged(args, cfg, "sigma-steps", 200, int),
        "protocols": _merged(args, cfg, "protocols", "maj,qsp-simple", str),
        "n-queries": _merged(args, cfg, "n-queries", 3, int),
        "trials": _merged(args, cfg, "trials", 100_000, int),
        "seed": _merged(args, cfg, "seed", 0, int),
        "threads": _merged(args, cfg, "threads", 1, int),
    }
    try:
        spec = sweep.SweepSpec(
            delta_range=(
                resolved["delta-min"],
                resolved["delta-max"],
                resolved["delta-steps"],
            ),
            sigma_range=(
                resolved["sigma-min"],
                resolved["sigma-max"],
                resolved["sigma-steps"],
            ),
            protocols=tuple(p.strip() for p in resolved["protocols"].split(",")),
            n_queries=resolved["n-queries"],
            seed=resolved["seed"],
            n_trials=resolved["trials"],
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    surface = sweep.run_sweep(spec, threads=resolved["threads"])
    os.makedirs(args.out_dir, exist_ok=True)
    csv_path = os.path.join(args.out_dir, "sweep.csv")
    sweep.emit_csv(surface, csv_path)
    outputs = ["sweep.csv"]
    for p in spec.protocols:
        svg = f"sweep_{p}.svg"
        sweep.emit_svg_heatmap(
            surface.values[p][0],
            surface.deltas,
            surface.sigmas,
            os.path.join(args.out_dir, svg),
            title=f"error probability: {p}",
        )
        outputs.append(svg)
    _write_manifest(args.out_dir, "sweep", resolved, outputs)
    return 0


def _cmd_optimize(args) -> int:
    rdg = RdgInstance.from_delta_sigma(args.delta, args.sigma)
    cfg = OptimizeConfig(
        n_starts=args.starts,
        n_trials_per_eval=args.trials,
        seed=args.seed or 0,
        objective_mode=args.mode,
    )
    report = optimize_qsp(rdg, args.n_queries, cfg)
    os.makedirs(args.out_dir, exist_ok=True)
    phases, prep, meas = report.best_protocol.segments[0]
    payload = {
        "delta": args.delta,
        "sigma": args.sigma,
        "n_queries": args.n_queries,
        "best_error": report.best_error,
        "refreshed_error": report.refreshed_error,
        "refreshed_std": report.refreshed_std,
        "per_start_errors": list(report.per_start_errors),
        "evaluations_used": report.evaluations_used,
        "budget_exhausted": report.budget_exhausted,
        "phases": [float(p) for p in phases],
        "prep": [[z.real, z.imag] for z in prep],
        "meas": [[z.real, z.imag] for z in meas],
    }
    path = os.path.join(args.out_dir, "optimize.json")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    _write_manifest(
        args.out_dir,
        "optimize",
        {k: getattr(args, k) for k in ("delta", "sigma", "n_queries", "starts",
                                       "trials", "mode", "seed")},
        ["optimize.json"],
    )
    print(f"best error {report.best_error:.6g} -> {path}")
    return 0


def _cmd_hybrid_curve(args) -> int:
    sigmas = np.geomspace(args.sigma_min, args.sigma_max, args.steps)
    curve = hybrid.coherence_curve(args.n, sigmas)
    os.makedirs(args.out_dir, exist_ok=True)
    path = os.path.join(args.out_dir, "hybrid_curve.csv")
    lines = ["sigma,sigma_over_pi,xi_min,regime"]
    for s, xi, flag in zip(curve.sigma_grid, curve.xi_min, curve.regime_flags):
        lines.append(f"{s:.17g},{s / math.pi:.17g},{xi:.17g},{flag}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    _write_manifest(
        args.out_dir,
        "hybrid-curve",
        {"n": args.n, "sigma-min": args.sigma_min, "sigma-max": args.sigma_max,
         "steps": args.steps},
        ["hybrid_curve.csv"],
    )
    return 0


def _cmd_boundary(args) -> int:
    deltas, sigmas, values = sweep.load_surface_csv(args.input)
    if args.protocol_a not in values or args.protocol_b not in values:
        raise ConfigError(
            f"CSV lacks protocols {args.protocol_a!r}/{args.protocol_b!r}; "
            f"has {sorted(values)}"
        )
    spec = sweep.SweepSpec(
        delta_range=(deltas[0], deltas[-1], len(deltas)),
        sigma_range=(sigmas[0], sigmas[-1], len(sigmas)),
        protocols=(args.protocol_a, args.protocol_b),
    )
    surface = sweep.ErrorSurface(spec, deltas, sigmas, values)
    ratio = sweep.ratio_map(surface, surface, args.protocol_a, args.protocol_b)
    polylines = sweep.extract_boundary(ratio, spec)
    os.makedirs(args.out_dir, exist_ok=True)
    path = os.path.join(args.out_dir, "boundary.csv")
    lines = ["polyline,delta,sigma"]
    for k, line in enumerate(polylines):
        for d, s in line:
            lines.append(f"{k},{d:.17g},{s:.17g}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    sweep.emit_svg_heatmap(
        ratio, deltas, sigmas, os.path.join(args.out_dir, "ratio.svg"),
        title=f"{args.protocol_a} / {args.protocol_b} error ratio",
        diverging=True,
    )
    _write_manifest(
        args.out_dir,
        "boundary",
        {"input": args.input, "protocol-a": args.protocol_a,
         "protocol-b": args.protocol_b},
        ["boundary.csv", "ratio.svg"],
    )
    return 0


def _cmd_adaptive(args) -> int:
    deltas = np.linspace(args.delta_min, args.delta_max, args.delta_steps)
    os.makedirs(args.out_dir, exist_ok=True)
    lines = ["delta,sigma,error_prob,std_error"]
    for i, d in enumerate(deltas):
        rdg = RdgInstance.from_delta_sigma(float(d), args.sigma)
        res = protocols.adaptive_incoherent_error(
            rdg, args.n_queries, args.trials, make_rng(args.seed or 0, i)
        )
        lines.append(
            f"{d:.17g},{args.sigma:.17g},{res.error_prob:.17g},{res.std_error:.17g}"
        )
    path = os.path.join(args.out_dir, "adaptive.csv")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    _write_manifest(
        args.out_dir,
        "adaptive",
        {"delta-min": args.delta_min, "delta-max": args.delta_max,
         "delta-steps": args.delta_steps, "sigma": args.sigma,
         "n-queries": args.n_queries, "trials": args.trials, "seed": args.seed},
        ["adaptive.csv"],
    )
    return 0


def _cmd_oracle_dump(args) -> int:
    os.makedirs(args.out_dir, exist_ok=True)
    path = os.path.join(args.out_dir, "oracle_reference.json")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(oracle.dump_reference_values(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    _write_manifest(args.out_dir, "oracle dump", {}, ["oracle_reference.json"])
    print(path)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rdgsim",
        description="Noisy rotation-channel discrimination: sweeps, "
        "optimization, hybrid coherence analysis.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out-dir", default=".", help="output directory")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--threads", type=int, default=None)

    p = sub.add_parser("sweep", help="(delta, sigma) grid sweep to CSV/SVG")
    common(p)
    p.add_argument("--config", help="flat key-value config file")
    p.add_argument("--delta-min", type=float, default=None)
    p.add_argument("--delta-max", type=float, default=None)
    p.add_argument("--delta-steps", type=int, default=None)
    p.add_argument("--sigma-min", type=float, default=None)
    p.add_argument("--sigma-max", type=float, default=None)
    p.add_argument("--sigma-steps", type=int, default=None)
    p.add_argument("--protocols", default=None,
                   help=f"comma list from {sweep.KNOWN_PROTOCOLS}")
    p.add_argument("--n-queries", type=int, default=None)
    p.add_argument("--trials", type=int, default=None)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("optimize", help="optimize a QSP protocol at one point")
    common(p)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--n-queries", type=int, default=3)
    p.add_argument("--starts", type=int, default=8)
    p.add_argument("--trials", type=int, default=4000)
    p.add_argument("--mode", choices=("monte-carlo", "quadrature"),
                   default="quadrature")
    p.set_defaults(func=_cmd_optimize)

    p = sub.add_parser("hybrid-curve", help="optimal coherence length vs sigma")
    common(p)
    p.add_argument("--n", type=float, default=100.0)
    p.add_argument("--sigma-min", type=float, default=0.01)
    p.add_argument("--sigma-max", type=float, default=3.0)
    p.add_argument("--steps", type=int, default=200)
    p.set_defaults(func=_cmd_hybrid_curve)

    p = sub.add_parser("boundary", help="ratio-1 boundary from a sweep CSV")
    common(p)
    p.add_argument("--input", required=True, help="sweep CSV path")
    p.add_argument("--protocol-a", default="maj")
    p.add_argument("--protocol-b", default="qsp-simple")
    p.set_defaults(func=_cmd_boundary)

    p = sub.add_parser("adaptive", help="adaptive Bayesian incoherent protocol")
    common(p)
    p.add_argument("--delta-min", type=float, default=0.05)
    p.add_argument("--delta-max", type=float, default=1.5)
    p.add_argument("--delta-steps", type=int, default=10)
    p.add_argument("--sigma", type=float, default=0.0)
    p.add_argument("--n-queries", type=int, default=3)
    p.add_argument("--trials", type=int, default=100_000)
    p.set_defaults(func=_cmd_adaptive)

    p = sub.add_parser("oracle", help="verification backends")
    oracle_sub = p.add_subparsers(dest="oracle_command", required=True)
    pd = oracle_sub.add_parser("dump", help="emit reference values as JSON")
    common(pd)
    pd.set_defaults(func=_cmd_oracle_dump)

    return parser


def cli_main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failures map to exit 1
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli_main(sys.argv[1:]))


if __name__ == "__main__":
    main()
