"""Command-line entry point.

Subcommands:
  run        execute an experiment config and write its CSV trace
  tap-export write the canonical traffic instance as auditable text
  estimate   sample-based operator constants for a config's problem
  selftest   fast internal consistency checks

Exit codes: 0 success, 1 configuration error, 2 solver missed its budget.
"""

from __future__ import annotations

import argparse
import sys

from . import harness, tap

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NO_CONVERGENCE = 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fwvip")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment config")
    run.add_argument("config", help="path to a YAML experiment config")
    run.add_argument("--output", help="override the config's CSV output path")
    run.add_argument("--seed", type=int, help="override the config's seed")
    run.add_argument("--quiet", action="store_true", help="suppress the summary")

    exp = sub.add_parser("tap-export", help="write the traffic instance as text")
    exp.add_argument("--output", help="destination file (default: stdout)")
    exp.add_argument("--kappa", type=float, default=tap.DEFAULT_KAPPA)

    est = sub.add_parser("estimate", help="estimate operator constants for a config")
    est.add_argument("config", help="path to a YAML experiment config")
    est.add_argument("--seed", type=int, help="override the sampling seed")
    est.add_argument("--samples", type=int, help="override the sample count")

    sub.add_parser("selftest", help="run fast internal consistency checks")
    return parser


def _cmd_run(args) -> int:
    try:
        cfg = harness.load_config(args.config)
        if args.output:
            cfg.output_path = args.output
        if args.seed is not None:
            cfg.seed = args.seed
            cfg.problem.seed = args.seed
        result = harness.run_experiment(cfg)
    except harness.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if not args.quiet:
        for s in result.summaries:
            status = "converged" if s.converged else "budget exhausted"
            print(f"{s.solver}: {status} after {s.iterations} iterations, "
                  f"final gap {s.final_gap:.3e}, "
                  f"lmo={s.counters.lmo} proj={s.counters.proj} "
                  f"g={s.counters.g_evals}")
        if cfg.output_path:
            print(f"trace written to {cfg.output_path}")
    return EXIT_OK if result.converged else EXIT_NO_CONVERGENCE


def _cmd_tap_export(args) -> int:
    try:
        text = tap.format_instance(tap.build_instance(kappa=args.kappa))
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.output:
        with open(args.output, "w") as f:
            f.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_estimate(args) -> int:
    try:
        cfg = harness.load_config(args.config)
        if args.seed is not None:
            cfg.problem.seed = args.seed
        if args.samples is not None:
            cfg.problem.n_samples = args.samples
        built = harness.build_problem(cfg.problem)
    except harness.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    vi = built.vi
    if built.constants is not None:
        est = built.constants
        print(f"estimated over {est.n_samples} samples (seed {est.seed}): "
              f"mu={est.mu_hat:.6g} L={est.L_hat:.6g} gamma={est.gamma_hat:.6g}")
    else:
        print(f"exact constants: mu={vi.mu:.6g} L={vi.L:.6g} gamma={vi.gamma:.6g}")
    return EXIT_OK


def _cmd_selftest(args) -> int:
    failures = harness.selftest()
    if failures:
        for msg in failures:
            print(f"FAIL: {msg}", file=sys.stderr)
        return EXIT_CONFIG
    print("selftest: all checks passed")
    return EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handler = {
        "run": _cmd_run,
        "tap-export": _cmd_tap_export,
        "estimate": _cmd_estimate,
        "selftest": _cmd_selftest,
    }[args.command]
    return handler(args)


if __name__ == "__main__":
    sys.exit(main())
