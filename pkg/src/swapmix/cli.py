"""Command-line interface: run scenarios, list builtins, verify the package."""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from .runner import builtin_scenarios, load_config, run_scenario

_EPILOG = """\
examples:
  swapmix list
  swapmix run fig1-delta0.3 --out results/
  swapmix run my_scenario.json --t-samples 4000
  swapmix verify 1 2 3
"""


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="swapmix",
        description="Qubit dynamical maps from partial-swap collisions "
        "with randomly polarized environments.",
        epilog=_EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a builtin scenario or a JSON config file")
    run_p.add_argument("scenario", help="builtin scenario name, or path to a JSON config")
    run_p.add_argument("--out", default="swapmix-out", help="output directory (default: swapmix-out)")
    run_p.add_argument("--t-max", type=float, default=None, help="override the horizon")
    run_p.add_argument("--t-samples", type=int, default=None, help="override the grid size")
    run_p.add_argument("--eta", type=float, default=None, help="override the swap angle")
    run_p.add_argument("--tau", type=float, default=None, help="override the collision period")
    run_p.add_argument("--threads", type=int, default=None, help="worker threads (default: SWAPMIX_THREADS or 1)")

    sub.add_parser("list", help="list the builtin scenarios")

    verify_p = sub.add_parser("verify", help="run the acceptance checklist")
    verify_p.add_argument(
        "numbers", nargs="*", type=int, help="criterion numbers to run (default: all)"
    )
    return parser


def _resolve_config(token: str):
    path = Path(token)
    if token.endswith(".json") or path.is_file():
        return load_config(path)
    builtins = builtin_scenarios()
    if token in builtins:
        return builtins[token]
    names = ", ".join(sorted(builtins))
    raise SystemExit(f"swapmix: unknown scenario {token!r}; builtins: {names}")


def _cmd_run(args) -> int:
    config = _resolve_config(args.scenario)
    overrides = {
        key: value
        for key, value in (
            ("t_max", args.t_max),
            ("t_samples", args.t_samples),
            ("eta", args.eta),
            ("tau", args.tau),
        )
        if value is not None
    }
    if overrides:
        config = dataclasses.replace(config, **overrides)
    result = run_scenario(config, out_dir=args.out, threads=args.threads)
    print(f"scenario {config.name}: {len(result.distribution)} nodes, "
          f"t_max {result.times[-1]:.6g}, {len(result.times)} samples")
    if result.trace_distance is not None:
        witness = result.trace_distance.witness_time
        print(f"  trace distance: max increase {result.trace_distance.max_increase:.3e}, "
              f"witness {witness if witness is not None else 'none'}")
    if result.determinant is not None:
        print(f"  determinant: min {result.determinant.values.min():.3e}, "
              f"{len(result.determinant.singular_times)} singular times")
    if result.divisibility is not None:
        print(f"  divisibility: {result.divisibility.verdict} "
              f"(min rate {result.divisibility.min_rate:.3e})")
    for path in result.written_files:
        print(f"  wrote {path}")
    return 0


def _cmd_list() -> int:
    for name, cfg in builtin_scenarios().items():
        g = cfg.gaussian
        print(f"{name}: center {g.center}, widths {g.widths}, "
              f"probe pair {cfg.state_pair[0]} / {cfg.state_pair[1]}")
    return 0


def _cmd_verify(args) -> int:
    from .acceptance import run_all

    return 0 if run_all(args.numbers or None) else 1


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "list":
        return _cmd_list()
    return _cmd_verify(args)


if __name__ == "__main__":
    sys.exit(main())
