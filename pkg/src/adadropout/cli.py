"""Command-line front end.

Subcommands:

* ``run``       - execute an experiment described by a YAML config file
* ``demo``      - emit the 1-D surrogate/acquisition figures
* ``compare``   - recompute summaries and verdicts from saved traces
* ``validate``  - run the oracle-equivalence battery

Exit status: 0 on success, 1 on usage/config errors, 2 on run failures.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import ConfigurationError
from .harness import compare_traces, emit_convergence_plot, load_config, run_experiment


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors by default; this tool reserves
    # 2 for run failures
    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(f"{self.prog}: error: {message}") from None


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="adadropout", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment from a config file")
    p_run.add_argument("--config", required=True, help="YAML experiment config")
    p_run.add_argument("--output-dir", help="override the output directory")
    p_run.add_argument("--n-init", type=int, dest="n_init")
    p_run.add_argument("--n-max", type=int, dest="n_max")
    p_run.add_argument("--runs", type=int)
    p_run.add_argument("--seed", type=int)
    p_run.add_argument("--alpha", type=float)
    p_run.add_argument("--workers", type=int)
    p_run.add_argument("--dim", type=int, help="default dimension for all objectives")
    p_run.add_argument("--no-plot", action="store_true",
                       help="skip the convergence plot files")

    p_demo = sub.add_parser("demo", help="emit the 1-D GP-fit and EI figures")
    p_demo.add_argument("--output-dir", default="demo_output")
    p_demo.add_argument("--samples", type=int, default=8)
    p_demo.add_argument("--seed", type=int, default=7)

    p_cmp = sub.add_parser("compare", help="recompute stats from saved traces")
    p_cmp.add_argument("--results", required=True,
                       help="experiment output directory (with manifest.json)")
    p_cmp.add_argument("--output-dir", help="write summaries here instead of in place")
    p_cmp.add_argument("--alpha", type=float, default=0.05)
    p_cmp.add_argument("--reference", help="reference algorithm for the verdicts")

    sub.add_parser("validate", help="run the oracle-equivalence battery")
    return parser


def _cmd_run(args) -> int:
    overrides = {
        "output_dir": args.output_dir,
        "n_init": args.n_init,
        "n_max": args.n_max,
        "runs": args.runs,
        "seed": args.seed,
        "alpha": args.alpha,
        "workers": args.workers,
        "dim": args.dim,
    }
    config = load_config(args.config, overrides)
    report = run_experiment(config)
    if not args.no_plot:
        for label, per_alg in report.summaries.items():
            plot_path = Path(config.output_dir) / f"convergence__{label}.svg"
            emit_convergence_plot(per_alg, plot_path)
    _print_verdict_table(report, config.reference)
    print(f"manifest: {report.manifest_path}")
    if report.failures:
        print(f"{len(report.failures)} run(s) failed; see the manifest", file=sys.stderr)
        return 2
    return 0


def _print_verdict_table(report, reference: str) -> None:
    if not report.verdicts:
        return
    others = sorted({name for v in report.verdicts.values() for name in v})
    if not others:
        return
    width = max(len(label) for label in report.verdicts) + 2
    header = "objective".ljust(width) + "  ".join(o for o in others)
    print(f"reference: {reference}")
    print(header)
    for label, comparisons in report.verdicts.items():
        cells = [
            (comparisons[o].symbol if o in comparisons else "?").center(len(o))
            for o in others
        ]
        print(label.ljust(width) + "  ".join(cells))
    counts = []
    for o in others:
        vs = [v[o] for v in report.verdicts.values() if o in v]
        plus = sum(1 for v in vs if v.verdict == "plus")
        approx = sum(1 for v in vs if v.verdict == "approx")
        minus = sum(1 for v in vs if v.verdict == "minus")
        counts.append(f"{plus}/{approx}/{minus}".center(len(o)))
    print("+/≈/-".ljust(width) + "  ".join(counts))


def _cmd_demo(args) -> int:
    from .demo import run_demo

    result = run_demo(args.output_dir, n_samples=args.samples, seed=args.seed)
    print(result.gp_plot)
    print(result.ei_plot)
    return 0


def _cmd_compare(args) -> int:
    report = compare_traces(
        args.results,
        alpha=args.alpha,
        reference=args.reference,
        output_dir=args.output_dir,
    )
    reference = args.reference or "(from manifest)"
    _print_verdict_table(report, reference)
    for path in report.summary_paths:
        print(path)
    return 0


def _cmd_validate(_args) -> int:
    from .validation import run_validation

    results = run_validation()
    failed = 0
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"[{status}] {r.name}: {r.detail}")
        failed += 0 if r.passed else 1
    if failed:
        print(f"{failed}/{len(results)} checks failed", file=sys.stderr)
        return 2
    print(f"all {len(results)} checks passed")
    return 0


_COMMANDS = {
    "run": _cmd_run,
    "demo": _cmd_demo,
    "compare": _cmd_compare,
    "validate": _cmd_validate,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # usage errors from argparse; re-map to exit status 1
        if exc.code in (0, None):
            return 0
        print(exc, file=sys.stderr)
        return 1
    try:
        return _COMMANDS[args.command](args)
    except ConfigurationError as exc:
        print(f"adadropout: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
