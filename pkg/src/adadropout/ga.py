"""Real-coded genetic algorithm used to maximize acquisition surfaces.

Standard operator set: tournament selection, simulated-binary crossover,
polynomial mutation, one elite carried per generation.  The per-algorithm
population/generation budgets live in :func:`ga_budget`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .sampling import SearchBox, as_generator

STANDARD_BO = "standard-bo"
ADADROPOUT = "adadropout"
DROPOUT = "dropout"
COORDINATE_LINE = "coordinate-line"


@dataclass(frozen=True)
class GaBudget:
    population: int
    generations: int

    def __post_init__(self):
        if self.population < 2:
            raise ConfigurationError("population must be >= 2")
        if self.generations < 1:
            raise ConfigurationError("generations must be >= 1")


@dataclass(frozen=True)
class GaConfig:
    """Operator settings; only the budget varies between algorithms.

    ``mutation_prob=None`` means the usual per-gene rate of 1/d.
    """

    budget: GaBudget
    crossover_prob: float = 0.9
    mutation_prob: float | None = None
    tournament_size: int = 2
    elitism: int = 1
    sbx_eta: float = 15.0
    mutation_eta: float = 20.0

    def __post_init__(self):
        if not 0.0 <= self.crossover_prob <= 1.0:
            raise ConfigurationError("crossover probability must be in [0, 1]")
        if self.mutation_prob is not None and not 0.0 <= self.mutation_prob <= 1.0:
            raise ConfigurationError("mutation probability must be in [0, 1]")
        if self.tournament_size < 1:
            raise ConfigurationError("tournament size must be >= 1")
        if not 0 <= self.elitism < self.budget.population:
            raise ConfigurationError("elitism count must be < population size")


def ga_budget(algorithm: str, d: int) -> GaBudget:
    """Population/generation budget for one inner maximization.

    standard-bo uses a fixed (200, 100); coordinate-line a fixed (10, 20);
    the subspace methods scale with the active dimension d: population
    max(10, 4d) and generations 200d / population (rounded to nearest,
    at least 1).
    """
    if d < 1:
        raise ConfigurationError("dimension must be >= 1")
    if algorithm == STANDARD_BO:
        return GaBudget(200, 100)
    if algorithm == COORDINATE_LINE:
        return GaBudget(10, 20)
    if algorithm in (ADADROPOUT, DROPOUT):
        population = max(10, 4 * d)
        generations = max(1, int(round(200.0 * d / population)))
        return GaBudget(population, generations)
    raise ConfigurationError(f"unknown algorithm tag {algorithm!r}")


def _fitness(evaluate, population: np.ndarray) -> np.ndarray:
    values = np.asarray(evaluate(population), dtype=float)
    if values.shape != (population.shape[0],):
        raise ConfigurationError(
            f"objective returned shape {values.shape} for population of "
            f"{population.shape[0]}"
        )
    # non-finite objective values lose every comparison but do not abort
    return np.where(np.isfinite(values), values, -np.inf)


def _tournament(fitness: np.ndarray, count: int, size: int, gen) -> np.ndarray:
    candidates = gen.integers(0, fitness.size, size=(count, size))
    return candidates[np.arange(count), np.argmax(fitness[candidates], axis=1)]


def _sbx(p1: np.ndarray, p2: np.ndarray, cfg: GaConfig, gen) -> tuple[np.ndarray, np.ndarray]:
    pairs, d = p1.shape
    do_pair = gen.random(pairs) < cfg.crossover_prob
    do_gene = gen.random((pairs, d)) < 0.5
    u = gen.random((pairs, d))
    exponent = 1.0 / (cfg.sbx_eta + 1.0)
    beta = np.where(
        u <= 0.5,
        (2.0 * u) ** exponent,
        (0.5 / (1.0 - u)) ** exponent,
    )
    mix = do_pair[:, None] & do_gene
    c1 = np.where(mix, 0.5 * ((1.0 + beta) * p1 + (1.0 - beta) * p2), p1)
    c2 = np.where(mix, 0.5 * ((1.0 - beta) * p1 + (1.0 + beta) * p2), p2)
    return c1, c2


def _polynomial_mutation(children: np.ndarray, cfg: GaConfig, box: SearchBox, gen) -> None:
    m, d = children.shape
    rate = cfg.mutation_prob if cfg.mutation_prob is not None else 1.0 / d
    do = gen.random((m, d)) < rate
    u = gen.random((m, d))
    span = box.span
    delta1 = np.clip((children - box.lower) / span, 0.0, 1.0)
    delta2 = np.clip((box.upper - children) / span, 0.0, 1.0)
    power = 1.0 / (cfg.mutation_eta + 1.0)
    low = (2.0 * u + (1.0 - 2.0 * u) * (1.0 - delta1) ** (cfg.mutation_eta + 1.0)) ** power - 1.0
    high = 1.0 - (2.0 * (1.0 - u) + 2.0 * (u - 0.5) * (1.0 - delta2) ** (cfg.mutation_eta + 1.0)) ** power
    delta_q = np.where(u < 0.5, low, high)
    children[do] += (delta_q * span)[do]


def maximize(
    objective,
    box: SearchBox,
    config: GaConfig,
    rng,
    *,
    seed_point: np.ndarray | None = None,
    vectorized: bool = False,
    return_history: bool = False,
):
    """Maximize a black-box objective over a box.

    Parameters
    ----------
    objective : callable
        Maps a point (length-d vector) to a float.  With
        ``vectorized=True`` it must instead map an (m x d) matrix to a
        length-m vector, which is much faster for surrogate acquisitions.
    box : SearchBox
        Feasible region; every individual stays inside it.
    config : GaConfig
        Budget and operator settings.
    rng : RngState, int, or numpy Generator
        Randomness source; same rng and inputs give identical output.
    seed_point : ndarray, optional
        Injected as one individual of the initial population (clipped to
        the box); used to anchor the search at the incumbent.
    return_history : bool
        Also return the best fitness after the initial population and
        after each generation (length generations + 1).

    Returns
    -------
    (best_point, best_value) or (best_point, best_value, history).
    Total objective evaluations: population * (generations + 1).
    """
    gen = as_generator(rng)
    m = config.budget.population
    d = box.dim
    evaluate = objective if vectorized else (
        lambda P: np.array([objective(p) for p in P], dtype=float)
    )

    population = box.lower + gen.random((m, d)) * box.span
    if seed_point is not None:
        population[0] = box.clip(np.asarray(seed_point, dtype=float))
    fitness = _fitness(evaluate, population)

    best = int(np.argmax(fitness))
    best_x = population[best].copy()
    best_f = float(fitness[best])
    history = [best_f]

    for _ in range(config.budget.generations):
        pairs = (m + 1) // 2
        parents = _tournament(fitness, 2 * pairs, config.tournament_size, gen)
        c1, c2 = _sbx(population[parents[:pairs]], population[parents[pairs:]], config, gen)
        children = np.empty((2 * pairs, d))
        children[0::2] = c1
        children[1::2] = c2
        children = children[:m]
        _polynomial_mutation(children, config, box, gen)
        np.clip(children, box.lower, box.upper, out=children)

        if config.elitism > 0:
            # overwrite a slice with the best parents; re-evaluated below,
            # which keeps the evaluation count exact and the best monotone
            elite = np.argsort(fitness)[::-1][: config.elitism]
            children[-config.elitism:] = population[elite]

        population = children
        fitness = _fitness(evaluate, population)
        gen_best = int(np.argmax(fitness))
        if float(fitness[gen_best]) > best_f:
            best_f = float(fitness[gen_best])
            best_x = population[gen_best].copy()
        history.append(best_f)

    if return_history:
        return best_x, best_f, np.array(history)
    return best_x, best_f
