"""Self-contained oracle checks runnable from the command line.

Each check pits a fast production path against an independent reference
implementation (explicit dense inverses, Monte-Carlo estimates, literal
re-composition) on deterministic random instances.  The naive GP
reference here deliberately avoids the Cholesky code path: it inverts
the correlation matrix outright and applies the textbook formulas.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .acquisition import (
    AcquisitionContext,
    compose_point,
    expected_improvement,
    essi,
)
from .ga import GaBudget, ga_budget
from .gp import Archive, fit, predict, rbf_corr
from .objectives import ObjectiveSpec, evaluate
from .sampling import RngState, SearchBox, lhs_sample
from .stats import wilcoxon_signed_rank


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


def naive_gp_reference(X_unit: np.ndarray, y: np.ndarray, length_scale: float,
                       jitter: float = 0.0):
    """Textbook predictor built from an explicit matrix inverse.

    Returns ``(mu_hat, sigma2_hat, predict_fn)`` where ``predict_fn``
    maps a unit-scaled point to (mean, variance).  Used only as a
    reference; O(n^3) inversion and no numerical safeguards.
    """
    n = y.size
    R = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            R[i, j] = rbf_corr(X_unit[i], X_unit[j], length_scale)
    R += jitter * np.eye(n)
    R_inv = np.linalg.inv(R)
    ones = np.ones(n)
    mu = float(ones @ R_inv @ y) / float(ones @ R_inv @ ones)
    resid = y - mu
    sigma2 = float(resid @ R_inv @ resid) / n

    def predict_fn(x_unit: np.ndarray) -> tuple[float, float]:
        r = np.array([rbf_corr(x_unit, X_unit[i], length_scale) for i in range(n)])
        mean = mu + float(r @ R_inv @ resid)
        u = 1.0 - float(ones @ R_inv @ r)
        var = sigma2 * (
            1.0 - float(r @ R_inv @ r) + u * u / float(ones @ R_inv @ ones)
        )
        return mean, var

    return mu, sigma2, predict_fn


def _conditioned_length_scale(X_unit: np.ndarray, l: float, cond_max: float = 1e5) -> float:
    """Shrink l until the n x n correlation matrix is comfortably
    conditioned, so the dense-inverse reference is itself trustworthy at
    the comparison tolerance (eps * cond well below 1e-8)."""
    n = X_unit.shape[0]
    d2 = (
        np.sum(X_unit**2, axis=1)[:, None]
        + np.sum(X_unit**2, axis=1)[None, :]
        - 2.0 * X_unit @ X_unit.T
    )
    np.maximum(d2, 0.0, out=d2)
    while np.linalg.cond(np.exp(-0.5 * d2 / l**2) + 1e-10 * np.eye(n)) > cond_max:
        l *= 0.5
    return l


def check_gp_oracle_equivalence(n_instances: int = 50, seed: int = 2024,
                                rtol: float = 1e-8) -> CheckResult:
    """Cholesky-based fit/predict against the dense-inverse reference."""
    gen = RngState(seed).generator()
    worst = 0.0
    for _ in range(n_instances):
        n = int(gen.integers(5, 41))
        dim = int(gen.integers(1, 11))
        box = SearchBox.cube(-1.0, 1.0, dim)
        X = box.lower + gen.random((n, dim)) * box.span
        # a smooth random response, as archives of real objectives are;
        # independent noise at near-duplicate points would inflate the
        # process variance beyond what any dense reference can resolve
        Xu = box.to_unit(X)
        w = gen.standard_normal(dim)
        center = gen.random(dim)
        scale = float(gen.uniform(0.5, 3.0))
        y = scale * (
            np.sin(3.0 * Xu @ w)
            + 2.0 * np.sum((Xu - center) ** 2, axis=1)
        ) + float(gen.uniform(-5.0, 5.0))
        l = _conditioned_length_scale(Xu, float(gen.uniform(0.1, 2.0)))
        model = fit(Archive(X, y), box, length_scale_bounds=(l, l * (1.0 + 1e-6)))
        mu_ref, sigma2_ref, predict_ref = naive_gp_reference(
            box.to_unit(X), y, model.length_scale, model.jitter
        )
        worst = max(worst, abs(model.mu_hat - mu_ref) / (1.0 + abs(mu_ref)))
        worst = max(worst, abs(model.sigma2_hat - sigma2_ref) / (1.0 + sigma2_ref))
        for _ in range(3):
            x = box.lower + gen.random(dim) * box.span
            p = predict(model, x)
            mean_ref, var_ref = predict_ref(box.to_unit(x))
            worst = max(worst, abs(p.mean - mean_ref) / (1.0 + abs(mean_ref)))
            worst = max(worst, abs(p.variance - max(var_ref, 0.0)) / (1.0 + abs(var_ref)))
    return CheckResult(
        "gp-oracle-equivalence",
        worst <= rtol,
        f"worst relative deviation {worst:.3e} over {n_instances} instances (tol {rtol:g})",
    )


def check_gp_interpolation(seed: int = 11) -> CheckResult:
    """Predictive mean passes through the training data."""
    box = SearchBox.cube(-100.0, 100.0, 5)
    spec = ObjectiveSpec(kind="sphere", dim=5, box=box)
    X = lhs_sample(20, box, RngState(seed))
    y = np.array([evaluate(spec, x) for x in X])
    model = fit(Archive(X, y), box)
    worst_mean, worst_var = 0.0, 0.0
    for xi, yi in zip(X, y):
        p = predict(model, xi)
        worst_mean = max(worst_mean, abs(p.mean - yi) / (1.0 + abs(yi)))
        worst_var = max(worst_var, p.variance / model.sigma2_hat)
    ok = worst_mean <= 1e-6 and worst_var <= 1e-6
    return CheckResult(
        "gp-interpolation",
        ok,
        f"worst relative mean error {worst_mean:.3e}, "
        f"worst variance ratio {worst_var:.3e} (tol 1e-6)",
    )


def random_ei_triples(n_triples: int, gen) -> list[tuple[float, float, float]]:
    """Random (mean, sd, f_min) triples with the incumbent within three
    predictive standard deviations, so the Monte-Carlo estimate has a
    meaningful standard error."""
    triples = []
    for _ in range(n_triples):
        mean = float(gen.uniform(-5, 5))
        sd = float(gen.uniform(0.1, 4.0))
        f_min = mean + sd * float(gen.uniform(-3.0, 3.0))
        triples.append((mean, sd, f_min))
    return triples


def check_ei_monte_carlo(n_triples: int = 25, n_samples: int = 10**6,
                         seed: int = 505, se_factor: float = 4.0) -> CheckResult:
    """Closed-form improvement against its Monte-Carlo definition."""
    gen = RngState(seed).generator()
    worst = 0.0
    for mean, sd, f_min in random_ei_triples(n_triples, gen):
        draws = mean + sd * gen.standard_normal(n_samples)
        imp = np.maximum(f_min - draws, 0.0)
        mc = float(np.mean(imp))
        se = float(np.std(imp)) / np.sqrt(n_samples)
        closed = expected_improvement(mean, sd, f_min)
        worst = max(worst, abs(closed - mc) / max(se, 1e-12))
    return CheckResult(
        "ei-monte-carlo",
        worst <= se_factor,
        f"worst deviation {worst:.2f} standard errors over {n_triples} triples "
        f"(limit {se_factor:g})",
    )


def check_essi_composition(seed: int = 99) -> CheckResult:
    """Subspace acquisition equals compose-then-predict-then-improve."""
    gen = RngState(seed).generator()
    box = SearchBox.cube(-2.0, 2.0, 4)
    X = box.lower + gen.random((12, 4)) * box.span
    y = gen.standard_normal(12)
    model = fit(Archive(X, y), box)
    archive = Archive(X, y)
    incumbent = X[archive.incumbent_index]
    selection = np.array([0, 2])
    ctx = AcquisitionContext(
        model=model, f_min=archive.f_min, incumbent=incumbent, selection=selection
    )
    worst = 0.0
    for _ in range(20):
        values = box.lower[selection] + gen.random(2) * box.span[selection]
        via_essi = essi(ctx, values)
        composed = compose_point(incumbent, selection, values)
        p = predict(model, composed)
        direct = expected_improvement(p.mean, p.sd, archive.f_min)
        worst = max(worst, abs(via_essi - direct))
    return CheckResult(
        "essi-composition",
        worst <= 1e-12,
        f"worst absolute deviation {worst:.3e} (tol 1e-12)",
    )


def check_ga_budgets() -> CheckResult:
    """Exact budget table for the four algorithms."""
    expected = [
        (("standard-bo", 7), GaBudget(200, 100)),
        (("adadropout", 1), GaBudget(10, 20)),
        (("adadropout", 100), GaBudget(400, 50)),
        (("coordinate-line", 1), GaBudget(10, 20)),
        (("dropout", 5), GaBudget(20, 50)),
    ]
    bad = [
        f"{algo}(d={d}) -> {ga_budget(algo, d)}"
        for (algo, d), want in expected
        if ga_budget(algo, d) != want
    ]
    return CheckResult(
        "ga-budget-table",
        not bad,
        "all budgets match" if not bad else "; ".join(bad),
    )


def check_wilcoxon_exact() -> CheckResult:
    """The strictly-dominated six-pair case has exact p = 2/2^6."""
    a = np.array([3.0, 4.0, 5.0, 6.0, 7.0, 8.0])
    b = a - 1.0
    verdict = wilcoxon_signed_rank(a, b, alpha=0.05)
    ok = abs(verdict.p_value - 0.03125) < 1e-12 and verdict.verdict == "minus"
    return CheckResult(
        "wilcoxon-exact",
        ok,
        f"p = {verdict.p_value} (expected 0.03125), verdict {verdict.verdict}",
    )


def check_lhs_stratification(seed: int = 3) -> CheckResult:
    """One sample per stratum in every dimension."""
    box = SearchBox.cube(-100.0, 100.0, 10)
    n = 40
    X = lhs_sample(n, box, RngState(seed))
    unit = box.to_unit(X)
    strata = np.floor(unit * n).astype(int)
    ok = all(
        np.array_equal(np.sort(strata[:, j]), np.arange(n)) for j in range(box.dim)
    )
    return CheckResult(
        "lhs-stratification",
        ok,
        f"{n} points x {box.dim} dims, one per stratum" if ok else "stratification violated",
    )


ALL_CHECKS = (
    check_gp_oracle_equivalence,
    check_gp_interpolation,
    check_ei_monte_carlo,
    check_essi_composition,
    check_ga_budgets,
    check_wilcoxon_exact,
    check_lhs_stratification,
)


def run_validation() -> list[CheckResult]:
    """Run every check; deterministic, no files written."""
    return [check() for check in ALL_CHECKS]
