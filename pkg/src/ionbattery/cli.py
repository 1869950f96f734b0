"""Command line entry points.

Subcommands:
  evolve    one trajectory (or a per-point trajectory sweep when the config
            has sweep_reduction = trace)
  maxscan   sweep one parameter, record window maxima of E_c and E_e
  spectrum  sweep J, record the spin spectrum plus M_z and O_z

Configuration comes from an optional flat key-value file plus repeatable
`--set key=value` overrides; a few common overrides have dedicated flags.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import ConfigError
from .harness import (parse_config, run_evolution, run_max_scan,
                      run_spectrum_scan, run_trace_sweep)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ionbattery",
        description="Charging dynamics of an ion-chain quantum battery "
                    "driven by a shared mechanical oscillator mode.")
    sub = parser.add_subparsers(dest="command", required=True)
    specs = (
        ("evolve", "run one trajectory and write evolution.csv"),
        ("maxscan", "sweep a parameter and write window maxima"),
        ("spectrum", "sweep J and write the spin spectrum"),
    )
    for name, help_text in specs:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", type=Path, metavar="PATH",
                       help="flat key-value config file (defaults apply "
                            "when omitted)")
        p.add_argument("--out", metavar="DIR",
                       help="output directory (overrides out_dir)")
        p.add_argument("--method", choices=("dense", "krylov"),
                       help="propagation method (default: auto by dimension)")
        p.add_argument("--tol", type=float, metavar="REAL",
                       help="Krylov error budget per unit time")
        p.add_argument("--workers", type=int, metavar="COUNT",
                       help="concurrent sweep points")
        p.add_argument("--set", dest="overrides", action="append",
                       default=[], metavar="KEY=VALUE",
                       help="config override, repeatable")
    return parser


def _load_config(args: argparse.Namespace):
    text = args.config.read_text() if args.config else ""
    overrides: dict[str, str] = {}
    for item in args.overrides:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, _, value = item.partition("=")
        overrides[key.strip()] = value.strip()
    if args.out is not None:
        overrides["out_dir"] = args.out
    if args.method is not None:
        overrides["method"] = args.method
    if args.tol is not None:
        overrides["tol"] = repr(args.tol)
    if args.workers is not None:
        overrides["workers"] = str(args.workers)
    return parse_config(text, overrides)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = _load_config(args)
        if args.command == "evolve":
            if config.is_sweep and config.sweep_reduction == "trace":
                traces = run_trace_sweep(config)
                print(f"wrote {len(traces)} trajectories under {config.out_dir}")
            else:
                trace = run_evolution(config)
                print(f"wrote {trace.n_samples} samples to "
                      f"{config.out_dir}/evolution.csv")
        elif args.command == "maxscan":
            rows = run_max_scan(config)
            print(f"wrote {len(rows)} grid points to "
                  f"{config.out_dir}/maxscan.csv")
        else:
            scan = run_spectrum_scan(config)
            print(f"wrote spectra for {scan.j_grid.size} J values under "
                  f"{config.out_dir}")
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
