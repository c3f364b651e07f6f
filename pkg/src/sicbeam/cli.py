"""Command-line front end: Monte Carlo sweeps, cost reports, channel dumps."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

import numpy as np

from .channel import ArrayGeometry, build_channel, sample_paths, save_channel_csv
from .sim import (
    METHOD_LABELS,
    SimConfig,
    count_ops,
    emit_chart,
    emit_csv,
    run_sweep,
)

__all__ = ["main"]


def _add_dimension_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--n", type=int, default=8, help="RF chains / subarrays (default 8)")
    parser.add_argument("--m", type=int, default=8, help="antennas per subarray (default 8)")
    parser.add_argument("--k", type=int, default=16, help="receive antennas (default 16)")
    parser.add_argument("--l", type=int, default=3, help="propagation paths (default 3)")
    parser.add_argument("--seed", type=int, default=0, help="root RNG seed (default 0)")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sicbeam",
        description="Hybrid precoding simulations for sub-connected mmWave arrays.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a seeded Monte Carlo sweep and write CSV")
    _add_dimension_flags(sim)
    sim.add_argument("--s", type=int, default=5, help="power-iteration sweeps (default 5)")
    sim.add_argument("--snr-start", type=float, default=-30.0, help="first SNR in dB")
    sim.add_argument("--snr-stop", type=float, default=20.0, help="last SNR in dB (inclusive)")
    sim.add_argument("--snr-step", type=float, default=5.0, help="SNR grid step in dB")
    sim.add_argument("--trials", type=int, default=500, help="Monte Carlo trials per grid point")
    sim.add_argument(
        "--methods",
        default=",".join(METHOD_LABELS),
        help=f"comma-separated subset of {', '.join(METHOD_LABELS)}",
    )
    sim.add_argument(
        "--sweep",
        default="snr",
        choices=("snr", "antennas", "user_antennas"),
        help="grid to walk (antenna sweeps need a single SNR point)",
    )
    sim.add_argument(
        "--sweep-values",
        default=None,
        help="comma-separated antenna counts for the antenna sweeps",
    )
    sim.add_argument("--out", required=True, help="output CSV path (JSON sidecar alongside)")
    sim.add_argument(
        "--config",
        default=None,
        help="JSON file of SimConfig fields; its values override the flags",
    )
    sim.add_argument("--chart", default=None, help="optional line-chart path (.svg/.pdf/.png)")

    ops = sub.add_parser("count-ops", help="report designer arithmetic cost vs the analytic model")
    _add_dimension_flags(ops)
    ops.add_argument("--s", type=int, default=5, help="power-iteration sweeps (default 5)")
    ops.add_argument("--snr-db", type=float, default=0.0, help="design SNR in dB (default 0)")
    ops.add_argument("--out", default=None, help="optional JSON report path")

    dump = sub.add_parser("dump-channel", help="draw one seeded channel and write it as CSV")
    _add_dimension_flags(dump)
    dump.add_argument("--out", required=True, help="output CSV path (JSON sidecar alongside)")

    return parser


def _snr_grid(start: float, stop: float, step: float) -> tuple:
    if stop < start:
        raise ValueError(f"--snr-stop {stop} lies below --snr-start {start}")
    if stop == start:
        return (float(start),)
    if step <= 0:
        raise ValueError(f"--snr-step must be positive to span a range, got {step}")
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    return tuple(float(start + i * step) for i in range(count))


def _config_from_args(args: argparse.Namespace) -> SimConfig:
    methods = tuple(part.strip() for part in args.methods.split(",") if part.strip())
    sweep_values = None
    if args.sweep_values:
        sweep_values = tuple(int(part) for part in args.sweep_values.split(","))
    cfg = SimConfig(
        n_subarrays=args.n,
        subarray_size=args.m,
        n_rx=args.k,
        n_paths=args.l,
        iterations=args.s,
        snr_grid_db=_snr_grid(args.snr_start, args.snr_stop, args.snr_step),
        trials=args.trials,
        seed=args.seed,
        methods=methods,
        sweep=args.sweep,
        sweep_values=sweep_values,
    )
    if args.config:
        with open(args.config) as fh:
            overrides = json.load(fh)
        unknown = sorted(set(overrides) - set(cfg.__dataclass_fields__))
        if unknown:
            raise ValueError(f"unknown config keys {unknown}")
        cfg = replace(cfg, **overrides)
    return cfg


def _run_simulate(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args)
    curve = run_sweep(cfg)
    emit_csv(curve, args.out)
    if args.chart:
        emit_chart(curve, args.chart)
    if curve.diagnostics:
        for entry in curve.diagnostics:
            print(
                f"error: grid point {entry['sweep_value']} aborted: {entry['error']}",
                file=sys.stderr,
            )
        return 1
    return 0


def _run_count_ops(args: argparse.Namespace) -> int:
    cfg = SimConfig(
        n_subarrays=args.n,
        subarray_size=args.m,
        n_rx=args.k,
        n_paths=args.l,
        iterations=args.s,
        snr_grid_db=(args.snr_db,),
        trials=1,
        seed=args.seed,
        methods=("sic_hybrid",),
    )
    report = count_ops(cfg)
    print(f"configuration: {report.params}")
    print(
        f"instrumented: {report.instrumented.complex_mults} complex multiplications, "
        f"{report.instrumented.complex_divs} complex divisions"
    )
    print(
        f"analytic:     {report.analytic.complex_mults} complex multiplications, "
        f"{report.analytic.complex_divs} complex divisions"
    )
    print(f"agreement factor: {report.agreement_factor:.4f}")
    if args.out:
        payload = {
            "params": report.params,
            "instrumented": {
                "complex_mults": report.instrumented.complex_mults,
                "complex_divs": report.instrumented.complex_divs,
            },
            "analytic": {
                "complex_mults": report.analytic.complex_mults,
                "complex_divs": report.analytic.complex_divs,
            },
        }
        with open(args.out, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return 0


def _run_dump_channel(args: argparse.Namespace) -> int:
    rng = np.random.default_rng(args.seed)
    paths = sample_paths(rng, args.l)
    channel = build_channel(
        ArrayGeometry.ula(args.n * args.m),
        ArrayGeometry.ula(args.k),
        paths,
        n_subarrays=args.n,
    )
    save_channel_csv(channel, args.out, seed=args.seed)
    return 0


_COMMANDS = {
    "simulate": _run_simulate,
    "count-ops": _run_count_ops,
    "dump-channel": _run_dump_channel,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
