"""Experiment runner: multi-seed execution, persistence, and reporting.

An experiment is a grid of (objective, algorithm, run index) jobs.  Every
algorithm sees the identical initial design for a given run index, so the
comparison is paired.  Each job writes one CSV trace; each objective gets
a JSON summary with pairwise test verdicts against a reference algorithm;
a manifest records every file with the seed that generated it.

All randomness derives from the single master seed: run ``r`` uses the
stream ``RngState(master_seed, stream=r)``, and random shifts/rotations
of objectives use dedicated sub-streams of run 2**32.
"""

from __future__ import annotations

import csv
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import ga
from .errors import ConfigurationError, EvaluationError
from .objectives import ObjectiveSpec, default_box, make_objective
from .optimizers import ALGORITHMS, IterationRecord, OptimizerConfig, RunTrace, run
from .sampling import RngState, SearchBox, random_rotation
from .stats import Summary, summarize, verdict_counts, wilcoxon_signed_rank

TRACE_HEADER = ["n_evals", "f_min", "d", "selected_indices", "f_next", "elapsed_ms"]

# stream reserved for drawing objective transforms (outside the run range)
_TRANSFORM_STREAM = 2**32


@dataclass
class ExperimentConfig:
    """Settings of one experiment."""

    objectives: list[ObjectiveSpec]
    algorithms: list[str]
    output_dir: Path
    n_init: int = 200
    n_max: int = 1000
    runs: int = 30
    seed: int = 0
    alpha: float = 0.05
    workers: int | None = None
    reference: str | None = None

    def __post_init__(self):
        self.output_dir = Path(self.output_dir)
        if not self.objectives:
            raise ConfigurationError("experiment needs at least one objective")
        if not self.algorithms:
            raise ConfigurationError("experiment needs at least one algorithm")
        for a in self.algorithms:
            if a not in ALGORITHMS:
                raise ConfigurationError(
                    f"unknown algorithm {a!r}; choose from {', '.join(ALGORITHMS)}"
                )
        if len(set(self.algorithms)) != len(self.algorithms):
            raise ConfigurationError("duplicate algorithm in list")
        if self.runs < 1:
            raise ConfigurationError("runs must be >= 1")
        if self.reference is None:
            self.reference = (
                ga.ADADROPOUT if ga.ADADROPOUT in self.algorithms else self.algorithms[0]
            )
        if self.reference not in self.algorithms:
            raise ConfigurationError(f"reference {self.reference!r} not in algorithms")
        labels = [s.label for s in self.objectives]
        if len(set(labels)) != len(labels):
            raise ConfigurationError(
                "objective labels collide; give distinct kinds/dims per objective"
            )


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def _format_float(v: float) -> str:
    return repr(float(v))


def write_trace(trace: RunTrace, path: Path) -> None:
    """Persist a trace as CSV (atomically)."""
    lines = [",".join(TRACE_HEADER)]
    for r in trace.records:
        lines.append(
            ",".join(
                [
                    str(r.n_evals),
                    _format_float(r.f_min),
                    str(r.d),
                    ";".join(str(j) for j in r.selected),
                    "" if np.isnan(r.f_next) else _format_float(r.f_next),
                    f"{r.elapsed_ms:.3f}",
                ]
            )
        )
    _atomic_write(path, "\n".join(lines) + "\n")


def read_trace(path: Path, algorithm: str = "", seed: int = 0, stream: int = 0) -> RunTrace:
    """Load a CSV trace written by :func:`write_trace`."""
    trace = RunTrace(algorithm=algorithm, seed=seed, stream=stream)
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != TRACE_HEADER:
            raise ConfigurationError(f"{path} is not a trace file (header mismatch)")
        for row in reader:
            selected = tuple(
                int(j) for j in row["selected_indices"].split(";") if j != ""
            )
            trace.records.append(
                IterationRecord(
                    n_evals=int(row["n_evals"]),
                    f_min=float(row["f_min"]),
                    d=int(row["d"]),
                    selected=selected,
                    f_next=float(row["f_next"]) if row["f_next"] else float("nan"),
                    elapsed_ms=float(row["elapsed_ms"]),
                )
            )
    return trace


def _trace_filename(label: str, algorithm: str, run_index: int) -> str:
    return f"{label}__{algorithm}__run{run_index:03d}.csv"


def _resolve_transform(spec_dict: dict, dim: int, box: SearchBox, master_seed: int, obj_index: int):
    """Materialize 'random' shift/rotation requests deterministically."""
    shift = spec_dict.get("shift")
    rotation = spec_dict.get("rotation")
    rng = RngState(master_seed, stream=_TRANSFORM_STREAM)
    if isinstance(shift, str):
        if shift != "random":
            raise ConfigurationError(f"shift must be a list, null, or 'random', got {shift!r}")
        gen = rng.generator(obj_index, 0)
        # keep random optima in the middle half of the box
        shift = box.lower + (0.25 + 0.5 * gen.random(dim)) * box.span
    if isinstance(rotation, str):
        if rotation != "random":
            raise ConfigurationError(
                f"rotation must be a matrix, null, or 'random', got {rotation!r}"
            )
        rotation = random_rotation(dim, rng.generator(obj_index, 1))
    return shift, rotation


def _objective_from_dict(entry: dict, defaults: dict, master_seed: int, obj_index: int) -> ObjectiveSpec:
    known = {"kind", "dim", "box", "shift", "rotation", "command", "timeout"}
    unknown = set(entry) - known
    if unknown:
        raise ConfigurationError(f"unknown objective keys: {sorted(unknown)}")
    if "kind" not in entry:
        raise ConfigurationError("each objective needs a 'kind'")
    kind = entry["kind"]
    dim = int(entry.get("dim", defaults.get("dim", 0)) or 0)
    if dim < 1:
        raise ConfigurationError(f"objective {kind!r} needs a positive 'dim'")
    if entry.get("box") is not None:
        lo, hi = entry["box"]
        box = SearchBox.cube(float(lo), float(hi), dim)
    else:
        box = default_box(kind, dim)
    shift, rotation = _resolve_transform(entry, dim, box, master_seed, obj_index)
    return ObjectiveSpec(
        kind=kind,
        dim=dim,
        box=box,
        shift=None if shift is None else np.asarray(shift, dtype=float),
        rotation=None if rotation is None else np.asarray(rotation, dtype=float),
        command=entry.get("command"),
        timeout=float(entry.get("timeout", 60.0)),
    )


def load_config(path, overrides: dict | None = None) -> ExperimentConfig:
    """Read an experiment config from a YAML key-value document.

    Top-level keys: ``objectives`` (list of {kind, dim, box, shift,
    rotation, command, timeout}), ``algorithms``, ``dim`` (default for
    all objectives), ``n_init``, ``n_max``, ``runs``, ``seed``, ``alpha``,
    ``workers``, ``output_dir``, ``reference``.  Values in ``overrides``
    (e.g. from command-line flags) replace file values.
    """
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"config file not found: {path}")
    try:
        raw = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"could not parse {path}: {exc}")
    if not isinstance(raw, dict):
        raise ConfigurationError(f"{path} must contain a mapping at the top level")
    known = {
        "objectives", "algorithms", "dim", "n_init", "n_max", "runs",
        "seed", "alpha", "workers", "output_dir", "reference",
    }
    unknown = set(raw) - known
    if unknown:
        raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
    raw.update({k: v for k, v in (overrides or {}).items() if v is not None})

    seed = int(raw.get("seed", 0))
    objectives_raw = raw.get("objectives")
    if not isinstance(objectives_raw, list) or not objectives_raw:
        raise ConfigurationError("config needs a non-empty 'objectives' list")
    objectives = [
        _objective_from_dict(entry, {"dim": raw.get("dim")}, seed, i)
        for i, entry in enumerate(objectives_raw)
    ]
    algorithms = raw.get("algorithms")
    if not isinstance(algorithms, list) or not algorithms:
        raise ConfigurationError("config needs a non-empty 'algorithms' list")
    return ExperimentConfig(
        objectives=objectives,
        algorithms=[str(a) for a in algorithms],
        output_dir=Path(raw.get("output_dir", "results")),
        n_init=int(raw.get("n_init", 200)),
        n_max=int(raw.get("n_max", 1000)),
        runs=int(raw.get("runs", 30)),
        seed=seed,
        alpha=float(raw.get("alpha", 0.05)),
        workers=None if raw.get("workers") is None else int(raw["workers"]),
        reference=raw.get("reference"),
    )


def _job(obj_index: int, spec: ObjectiveSpec, algorithm: str, run_index: int,
         n_init: int, n_max: int, seed: int):
    """Run one job; importable at module level so process pools can pickle it."""
    objective = make_objective(spec)
    opt_config = OptimizerConfig(
        algorithm=algorithm, box=spec.box, n_init=n_init, n_max=n_max
    )
    rng = RngState(seed, stream=run_index)
    try:
        trace = run(objective, opt_config, rng)
        error = None
    except EvaluationError as exc:
        trace = exc.trace
        error = str(exc)
    finally:
        closer = getattr(objective, "close", None)
        if closer is not None:
            closer()
    return obj_index, algorithm, run_index, trace, error


@dataclass
class ExperimentReport:
    """In-memory result of :func:`run_experiment`."""

    manifest_path: Path
    trace_paths: list[Path]
    summary_paths: list[Path]
    summaries: dict[str, dict[str, Summary]] = field(default_factory=dict)
    verdicts: dict[str, dict[str, object]] = field(default_factory=dict)
    failures: list[dict] = field(default_factory=list)


def run_experiment(config: ExperimentConfig) -> ExperimentReport:
    """Execute the full grid of jobs and persist traces, summaries, manifest.

    Job failures are recorded in the manifest (with their partial traces
    persisted when available) and do not stop the remaining jobs.
    """
    out = Path(config.output_dir)
    trace_dir = out / "traces"
    trace_dir.mkdir(parents=True, exist_ok=True)

    jobs = [
        (i, spec, algorithm, r, config.n_init, config.n_max, config.seed)
        for i, spec in enumerate(config.objectives)
        for algorithm in config.algorithms
        for r in range(config.runs)
    ]
    workers = config.workers if config.workers is not None else (os.cpu_count() or 1)
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_job_star, jobs))
    else:
        results = [_job_star(j) for j in jobs]

    report = ExperimentReport(manifest_path=out / "manifest.json",
                              trace_paths=[], summary_paths=[])
    manifest_jobs = []
    traces: dict[tuple[int, str], list[RunTrace]] = {}
    for obj_index, algorithm, run_index, trace, error in results:
        label = config.objectives[obj_index].label
        entry = {
            "objective": label,
            "algorithm": algorithm,
            "run_index": run_index,
            "seed": config.seed,
            "stream": run_index,
            "status": "ok" if error is None else "failed",
        }
        if error is not None:
            entry["error"] = error
            report.failures.append(entry)
        if trace is not None:
            path = trace_dir / _trace_filename(label, algorithm, run_index)
            write_trace(trace, path)
            entry["trace_file"] = str(path.relative_to(out))
            report.trace_paths.append(path)
            if error is None:
                traces.setdefault((obj_index, algorithm), []).append(trace)
        manifest_jobs.append(entry)

    for i, spec in enumerate(config.objectives):
        per_alg = {
            a: summarize(traces[(i, a)]) for a in config.algorithms if (i, a) in traces
        }
        if not per_alg:
            continue
        report.summaries[spec.label] = per_alg
        comparisons = _compare_against_reference(per_alg, config.reference, config.alpha)
        report.verdicts[spec.label] = comparisons
        payload = _summary_payload(
            spec.label, config.n_init, config.n_max, config.reference, per_alg, comparisons
        )
        spath = out / f"summary__{spec.label}.json"
        _atomic_write(spath, json.dumps(payload, indent=2, sort_keys=True) + "\n")
        report.summary_paths.append(spath)

    counts = _verdict_count_row(report.verdicts, config)
    manifest = {
        "master_seed": config.seed,
        "n_init": config.n_init,
        "n_max": config.n_max,
        "runs": config.runs,
        "alpha": config.alpha,
        "algorithms": list(config.algorithms),
        "reference": config.reference,
        "objectives": [s.label for s in config.objectives],
        "jobs": manifest_jobs,
        "summary_files": [str(p.relative_to(out)) for p in report.summary_paths],
        "verdict_counts": counts,
    }
    _atomic_write(report.manifest_path, json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return report


def _job_star(args):
    return _job(*args)


def _compare_against_reference(per_alg: dict[str, Summary], reference: str, alpha: float):
    comparisons = {}
    ref = per_alg.get(reference)
    if ref is None:
        return comparisons
    for name, summary in per_alg.items():
        if name == reference:
            continue
        if summary.n_runs != ref.n_runs:
            continue
        comparisons[name] = wilcoxon_signed_rank(ref.finals, summary.finals, alpha)
    return comparisons


def _summary_payload(label, n_init, n_max, reference, per_alg, comparisons) -> dict:
    return {
        "objective": label,
        "n_init": n_init,
        "n_max": n_max,
        "reference": reference,
        "algorithms": {
            name: {
                "n_runs": s.n_runs,
                "final_mean": s.final_mean,
                "final_median": s.final_median,
                "final_std": s.final_std,
                "finals": [float(v) for v in s.finals],
                "n_evals": [int(v) for v in s.n_evals],
                "mean_curve": [float(v) for v in s.mean_curve],
            }
            for name, s in per_alg.items()
        },
        "comparisons": {
            name: {
                "p_value": v.p_value,
                "verdict": v.verdict,
                "symbol": v.symbol,
                "median_reference": v.median_a,
                "median_other": v.median_b,
                "statistic": None if np.isnan(v.statistic) else v.statistic,
                "n_effective": v.n_effective,
                "degenerate": v.degenerate,
            }
            for name, v in comparisons.items()
        },
    }


def _verdict_count_row(verdicts_by_objective, config) -> dict:
    """Aggregate +/≈/- counts per compared algorithm across objectives."""
    counts = {}
    for name in config.algorithms:
        if name == config.reference:
            continue
        collected = [
            v[name] for v in verdicts_by_objective.values() if name in v
        ]
        plus, approx, minus = verdict_counts(collected)
        counts[name] = {
            "plus": plus,
            "approx": approx,
            "minus": minus,
            "row": f"{plus}/{approx}/{minus}",
        }
    return counts


def compare_traces(result_dir, alpha: float = 0.05, reference: str | None = None,
                   output_dir=None) -> ExperimentReport:
    """Recompute summaries and verdicts from trace files on disk.

    Reads the manifest in ``result_dir`` to locate traces; writes fresh
    summary files (to ``output_dir`` if given, else in place) that match
    what :func:`run_experiment` produced for the same traces.
    """
    result_dir = Path(result_dir)
    manifest_path = result_dir / "manifest.json"
    if not manifest_path.exists():
        raise ConfigurationError(f"no manifest.json under {result_dir}")
    manifest = json.loads(manifest_path.read_text())
    out = Path(output_dir) if output_dir is not None else result_dir
    out.mkdir(parents=True, exist_ok=True)
    reference = reference or manifest.get("reference")

    grouped: dict[str, dict[str, list[RunTrace]]] = {}
    for entry in manifest["jobs"]:
        if entry.get("status") != "ok" or "trace_file" not in entry:
            continue
        trace = read_trace(
            result_dir / entry["trace_file"],
            algorithm=entry["algorithm"],
            seed=entry.get("seed", 0),
            stream=entry.get("stream", 0),
        )
        grouped.setdefault(entry["objective"], {}).setdefault(
            entry["algorithm"], []
        ).append(trace)

    report = ExperimentReport(manifest_path=manifest_path,
                              trace_paths=[], summary_paths=[])
    for label, per_alg_traces in grouped.items():
        per_alg = {a: summarize(ts) for a, ts in per_alg_traces.items()}
        report.summaries[label] = per_alg
        comparisons = _compare_against_reference(per_alg, reference, alpha)
        report.verdicts[label] = comparisons
        payload = _summary_payload(
            label, manifest.get("n_init"), manifest.get("n_max"),
            reference, per_alg, comparisons,
        )
        spath = out / f"summary__{label}.json"
        _atomic_write(spath, json.dumps(payload, indent=2, sort_keys=True) + "\n")
        report.summary_paths.append(spath)
    return report


def emit_convergence_plot(summaries: dict[str, Summary], path) -> Path:
    """Write an SVG of mean best-value curves, one per algorithm."""
    if not summaries:
        raise ConfigurationError("no summaries to plot")
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7, 4.5))
    for name, summary in summaries.items():
        ax.plot(summary.n_evals, summary.mean_curve, label=name)
    ax.set_xlabel("function evaluations")
    ax.set_ylabel("mean best objective value")
    ax.legend()
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, format="svg")
    plt.close(fig)
    return path
