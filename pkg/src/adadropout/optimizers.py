"""The four outer optimization loops.

All four share the same skeleton: a Latin hypercube initial design, then
one expensive evaluation per iteration obtained by fitting the surrogate
on the full archive and maximizing an acquisition with the genetic
algorithm.  They differ only in which coordinates the acquisition is
optimized over and how that number evolves:

* ``standard-bo``        - always all D coordinates.
* ``adadropout``         - a fresh random subset of the current size d,
                           starting at D; d drops by one whenever the new
                           candidate fails to improve the best value
                           (strictly), never below one.
* ``dropout``            - a fresh random subset of fixed size.
* ``coordinate-line``    - one coordinate per iteration, cycling through
                           random permutations.

Non-selected coordinates are always frozen at the incumbent.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import ga
from .acquisition import AcquisitionContext, compose_point, essi_batch
from .errors import ConfigurationError, EvaluationError
from .ga import GaBudget, GaConfig, ga_budget
from .gp import Archive, fit
from .sampling import RngState, SearchBox, lhs_sample, select_subspace

ALGORITHMS = (ga.STANDARD_BO, ga.ADADROPOUT, ga.DROPOUT, ga.COORDINATE_LINE)

# sub-stream indices of the per-run RngState; the initial design stream is
# shared across algorithms so comparisons start from identical archives
_STREAM_INIT = 0
_STREAM_SELECT = 1
_STREAM_GA = 2
_STREAM_DEDUP = 3

_MAX_DEDUP_TRIES = 100


@dataclass
class OptimizerConfig:
    """Settings shared by the four loops.

    ``d_init`` only applies to adadropout (defaults to the full dimension)
    and ``fixed_d`` only to the dropout baseline.
    """

    algorithm: str
    box: SearchBox
    n_init: int = 200
    n_max: int = 1000
    d_init: int | None = None
    fixed_d: int = 5
    length_scale_bounds: tuple[float, float] = (0.01, 100.0)
    duplicate_tol: float = 1e-8
    ga_budget_override: GaBudget | None = None

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ConfigurationError(f"unknown algorithm {self.algorithm!r}")
        if self.n_init < 1:
            raise ConfigurationError("n_init must be >= 1")
        if self.n_max < self.n_init:
            raise ConfigurationError("n_max must be >= n_init")
        D = self.box.dim
        if self.d_init is not None and not 1 <= self.d_init <= D:
            raise ConfigurationError(f"d_init must be in [1, {D}]")
        if self.algorithm == ga.DROPOUT and not 1 <= self.fixed_d <= D:
            raise ConfigurationError(f"fixed_d must be in [1, {D}]")
        if self.duplicate_tol < 0:
            raise ConfigurationError("duplicate tolerance must be >= 0")


@dataclass
class IterationRecord:
    """One row of a run trace.

    The first record describes the initial design (empty selection, no
    candidate value); each later record describes one iteration, with
    ``d`` the number of coordinates the acquisition was optimized over.
    """

    n_evals: int
    f_min: float
    d: int
    selected: tuple[int, ...]
    f_next: float
    elapsed_ms: float
    incumbent: np.ndarray | None = None


@dataclass
class RunTrace:
    """Complete log of one optimizer run."""

    algorithm: str
    seed: int
    stream: int
    records: list[IterationRecord] = field(default_factory=list)
    completed: bool = True
    error: str | None = None

    @property
    def n_evals(self) -> np.ndarray:
        return np.array([r.n_evals for r in self.records], dtype=int)

    @property
    def f_min(self) -> np.ndarray:
        return np.array([r.f_min for r in self.records])

    @property
    def d(self) -> np.ndarray:
        return np.array([r.d for r in self.records], dtype=int)

    @property
    def best_f(self) -> float:
        return self.records[-1].f_min

    @property
    def best_x(self) -> np.ndarray | None:
        return self.records[-1].incumbent


def update_incumbent(archive: Archive) -> tuple[np.ndarray, float]:
    """Best row of the archive; ties break toward the lowest row index."""
    i = archive.incumbent_index
    return archive.X[i].copy(), float(archive.y[i])


def update_dimension(d: int, f_next: float, f_min: float) -> int:
    """Drop one optimizing variable after a strictly non-improving candidate.

    Returns ``d - 1`` when ``f_next > f_min`` and ``d > 1``; otherwise
    ``d`` (ties keep the dimension).
    """
    if d < 1:
        raise ConfigurationError("d must be >= 1")
    if f_next > f_min and d > 1:
        return d - 1
    return d


def _initial_d(config: OptimizerConfig) -> int:
    D = config.box.dim
    if config.algorithm == ga.ADADROPOUT:
        return config.d_init if config.d_init is not None else D
    if config.algorithm == ga.DROPOUT:
        return config.fixed_d
    if config.algorithm == ga.COORDINATE_LINE:
        return 1
    return D


def _guarded_eval(objective, x: np.ndarray, partial: RunTrace) -> float:
    try:
        value = float(objective(x))
    except EvaluationError as exc:
        exc.trace = partial
        partial.completed = False
        partial.error = str(exc)
        raise
    except Exception as exc:
        partial.completed = False
        partial.error = str(exc)
        raise EvaluationError(f"objective evaluation failed: {exc}", trace=partial) from exc
    if not np.isfinite(value):
        partial.completed = False
        partial.error = f"objective returned non-finite value {value!r}"
        raise EvaluationError(partial.error, trace=partial)
    return value


def _dedupe(x: np.ndarray, X: np.ndarray, box: SearchBox, tol: float, gen) -> np.ndarray:
    """Replace a candidate that collides with an archive row (in unit-cube
    coordinates) by a uniform random point, so the correlation matrix
    cannot go singular from exact duplicates."""
    if tol <= 0:
        return x
    unit_X = box.to_unit(X)
    for _ in range(_MAX_DEDUP_TRIES):
        gap = unit_X - box.to_unit(x)
        if float(np.min(np.einsum("ij,ij->i", gap, gap))) >= tol * tol:
            return x
        x = box.lower + gen.random(box.dim) * box.span
    return x


def run(objective, config: OptimizerConfig, rng: RngState) -> RunTrace:
    """Run the loop selected by ``config.algorithm``.

    ``objective`` maps a length-D vector to a float.  The trace records
    the initial design and every iteration; exactly ``n_max`` objective
    evaluations are spent.  If an evaluation fails, an
    :class:`EvaluationError` carrying the partial trace is raised.
    """
    box = config.box
    D = box.dim
    algo = config.algorithm
    init_gen = rng.generator(_STREAM_INIT)
    select_gen = rng.generator(_STREAM_SELECT)
    ga_gen = rng.generator(_STREAM_GA)
    dedup_gen = rng.generator(_STREAM_DEDUP)

    trace = RunTrace(algorithm=algo, seed=rng.seed, stream=rng.stream)
    d = _initial_d(config)

    t0 = time.perf_counter()
    X_buf = np.empty((config.n_max, D))
    y_buf = np.empty(config.n_max)
    X_buf[: config.n_init] = lhs_sample(config.n_init, box, init_gen)
    for i in range(config.n_init):
        y_buf[i] = _guarded_eval(objective, X_buf[i], trace)
    n = config.n_init

    archive = Archive(X_buf[:n], y_buf[:n])
    x_star, f_min = update_incumbent(archive)
    trace.records.append(
        IterationRecord(
            n_evals=n,
            f_min=f_min,
            d=d,
            selected=(),
            f_next=float("nan"),
            elapsed_ms=(time.perf_counter() - t0) * 1e3,
            incumbent=x_star.copy(),
        )
    )

    coordinate_cycle: list[int] = []
    while n < config.n_max:
        t_iter = time.perf_counter()

        if algo == ga.STANDARD_BO:
            selection = np.arange(D)
        elif algo == ga.ADADROPOUT:
            selection = select_subspace(d, D, select_gen)
        elif algo == ga.DROPOUT:
            selection = select_subspace(config.fixed_d, D, select_gen)
        else:  # coordinate-line
            if not coordinate_cycle:
                coordinate_cycle = list(select_gen.permutation(D))
            selection = np.array([coordinate_cycle.pop(0)])

        model = fit(archive, box, config.length_scale_bounds)
        ctx = AcquisitionContext(
            model=model, f_min=f_min, incumbent=x_star, selection=selection
        )
        budget = config.ga_budget_override or ga_budget(algo, selection.size)
        values, _ = ga.maximize(
            lambda V: essi_batch(ctx, V),
            box.subspace(selection),
            GaConfig(budget),
            ga_gen,
            seed_point=x_star[selection],
            vectorized=True,
        )
        x_next = box.clip(compose_point(x_star, selection, values))
        x_next = _dedupe(x_next, archive.X, box, config.duplicate_tol, dedup_gen)

        f_next = _guarded_eval(objective, x_next, trace)
        X_buf[n] = x_next
        y_buf[n] = f_next
        n += 1
        archive = Archive(X_buf[:n], y_buf[:n])

        # the drop decision compares against the incumbent value from
        # before this evaluation; the incumbent updates afterwards
        new_d = update_dimension(d, f_next, f_min) if algo == ga.ADADROPOUT else d
        x_star, f_min = update_incumbent(archive)

        trace.records.append(
            IterationRecord(
                n_evals=n,
                f_min=f_min,
                d=selection.size,
                selected=tuple(int(j) for j in selection),
                f_next=f_next,
                elapsed_ms=(time.perf_counter() - t_iter) * 1e3,
                incumbent=x_star.copy(),
            )
        )
        d = new_d

    return trace


def _run_as(algorithm: str, objective, config: OptimizerConfig, rng: RngState) -> RunTrace:
    if config.algorithm != algorithm:
        raise ConfigurationError(
            f"config.algorithm is {config.algorithm!r}, expected {algorithm!r}"
        )
    return run(objective, config, rng)


def run_standard_bo(objective, config: OptimizerConfig, rng: RngState) -> RunTrace:
    """Full-space loop: EI maximized over all D coordinates every iteration."""
    return _run_as(ga.STANDARD_BO, objective, config, rng)


def run_adadropout(objective, config: OptimizerConfig, rng: RngState) -> RunTrace:
    """Adaptive loop: random d-subset per iteration, d shrinking on failure."""
    return _run_as(ga.ADADROPOUT, objective, config, rng)


def run_dropout_baseline(objective, config: OptimizerConfig, rng: RngState) -> RunTrace:
    """Fixed-size random-subset baseline (no dimension adaptation)."""
    return _run_as(ga.DROPOUT, objective, config, rng)


def run_coordinate_line_bo(objective, config: OptimizerConfig, rng: RngState) -> RunTrace:
    """One-coordinate-at-a-time baseline cycling random permutations."""
    return _run_as(ga.COORDINATE_LINE, objective, config, rng)
