"""Command-line entry point.

One subcommand per experiment plus config validation and the J_rho sweep.
Configuration comes from an optional JSON file with dotted-path --set
overrides applied on top. Exit codes: 0 success, 2 configuration error,
3 numerical failure.
"""

import argparse
import json
import sys

import numpy as np

from .config import ExperimentConfig, apply_overrides, config_to_dict, load_config
from .experiments import EXPERIMENTS, run_experiment, sweep_j_rho, write_rows
from .translation import InsufficientRoots

_SUBCOMMANDS = {
    "fig4-cluster-count": "fig4_cluster_count",
    "fig5-eta-separation": "fig5_eta_separation",
    "fig6-eta-distance": "fig6_eta_distance",
    "fig7-rate-distance": "fig7_rate_distance",
    "fig7b-rate-snapshots": "fig7b_rate_snapshots",
    "fig8-snr-bound": "fig8_snr_bound",
}


def _add_common(parser):
    parser.add_argument("--config", metavar="FILE", default=None,
                        help="JSON config file; defaults apply when omitted")
    parser.add_argument("--set", metavar="PATH=VALUE", action="append",
                        dest="overrides", default=[],
                        help="dotted-path override, e.g. run.trials=50 "
                             "(repeatable)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="oobcov",
        description="Dual-band covariance estimation experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, experiment in _SUBCOMMANDS.items():
        p = sub.add_parser(name, help=f"run the {experiment} sweep")
        _add_common(p)
        p.add_argument("--output", metavar="FILE", default=None,
                       help="CSV output path (default: run.output_path)")
        p.set_defaults(experiment=experiment)
    v = sub.add_parser("validate-config", help="resolve and print the config")
    _add_common(v)
    s = sub.add_parser("sweep-jrho", help="pick the best prior ceiling")
    _add_common(s)
    s.add_argument("--candidates", metavar="V", type=float, nargs="+",
                   default=[0.5, 0.7, 0.9, 0.99],
                   help="candidate J_rho values (default: 0.5 0.7 0.9 0.99)")
    return parser


def _resolve_config(args):
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    if args.overrides:
        cfg = apply_overrides(cfg, args.overrides)
    return cfg


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = _resolve_config(args)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    try:
        if args.command == "validate-config":
            print(json.dumps(config_to_dict(cfg), indent=2, sort_keys=True))
            return 0
        if args.command == "sweep-jrho":
            best = sweep_j_rho(cfg, args.candidates)
            print(f"best j_rho: {best:.10g}")
            return 0
        rows = list(run_experiment(cfg, args.experiment))
        out = args.output or cfg.run.output_path
        write_rows(rows, out, cfg)
        print(f"wrote {len(rows)} rows to {out}")
        return 0
    except (ArithmeticError, np.linalg.LinAlgError, InsufficientRoots) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
