"""Paired comparison of algorithm results and run-trace summaries.

The comparison is a two-sided Wilcoxon signed-rank test: zero differences
are discarded, tied absolute differences receive averaged ranks, the
exact null distribution is enumerated for up to 12 effective pairs, and
larger samples use the normal approximation with continuity correction
and tie-corrected variance.  The verdict uses the better/similar/worse
(+, ≈, -) style common in benchmark tables, with direction decided by
which sample has the lower median (minimization).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr
from scipy.stats import rankdata

from .errors import ConfigurationError

EXACT_MAX_N = 12
MIN_EFFECTIVE_N = 5

PLUS = "plus"
MINUS = "minus"
APPROX = "approx"

_SYMBOLS = {PLUS: "+", MINUS: "-", APPROX: "≈"}


@dataclass(frozen=True)
class ComparisonVerdict:
    """Outcome of one paired comparison.

    ``plus`` means the first sample is significantly better (lower
    median); ``minus`` the opposite; ``approx`` no significant difference
    (always the case when fewer than five nonzero differences remain,
    flagged by ``degenerate``).
    """

    p_value: float
    verdict: str
    median_a: float
    median_b: float
    statistic: float
    n_effective: int
    degenerate: bool = False

    @property
    def symbol(self) -> str:
        return _SYMBOLS[self.verdict]


def _exact_p(ranks: np.ndarray, w_plus: float) -> float:
    """Two-sided p by enumerating all sign assignments of the ranks."""
    n = ranks.size
    patterns = (np.arange(2**n)[:, None] >> np.arange(n)) & 1
    w = patterns @ ranks
    # averaged ranks are multiples of 1/2, exact in binary; keep a hair of
    # tolerance anyway
    p_low = np.count_nonzero(w <= w_plus + 1e-9) / 2.0**n
    p_high = np.count_nonzero(w >= w_plus - 1e-9) / 2.0**n
    return min(1.0, 2.0 * min(p_low, p_high))


def _normal_p(ranks: np.ndarray, w_plus: float) -> float:
    """Two-sided normal approximation with continuity and tie corrections."""
    n = ranks.size
    mean = n * (n + 1) / 4.0
    variance = n * (n + 1) * (2 * n + 1) / 24.0
    _, counts = np.unique(ranks, return_counts=True)
    variance -= float(np.sum(counts.astype(float) ** 3 - counts)) / 48.0
    if variance <= 0:
        return 1.0
    numerator = w_plus - mean
    z = (numerator - 0.5 * np.sign(numerator)) / np.sqrt(variance)
    return min(1.0, 2.0 * float(ndtr(-abs(z))))


def wilcoxon_signed_rank(a, b, alpha: float = 0.05) -> ComparisonVerdict:
    """Paired two-sided Wilcoxon signed-rank comparison of two samples.

    Parameters
    ----------
    a, b : array-like, same length
        Paired results (e.g. final best values per run); sample ``a`` is
        the reference whose superiority "plus" asserts.
    alpha : float
        Significance level.

    Returns
    -------
    ComparisonVerdict
        With fewer than five nonzero differences the verdict is approx
        and ``degenerate`` is set.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ConfigurationError("samples must be 1-D arrays of equal length")
    if not 0.0 < alpha < 1.0:
        raise ConfigurationError("alpha must be in (0, 1)")
    med_a, med_b = float(np.median(a)), float(np.median(b))

    diff = a - b
    diff = diff[diff != 0.0]
    n = diff.size
    if n < MIN_EFFECTIVE_N:
        return ComparisonVerdict(
            p_value=1.0,
            verdict=APPROX,
            median_a=med_a,
            median_b=med_b,
            statistic=float("nan"),
            n_effective=n,
            degenerate=True,
        )

    ranks = rankdata(np.abs(diff))
    w_plus = float(np.sum(ranks[diff > 0]))
    if n <= EXACT_MAX_N:
        p = _exact_p(ranks, w_plus)
    else:
        p = _normal_p(ranks, w_plus)

    if p >= alpha:
        verdict = APPROX
    elif med_a < med_b:
        verdict = PLUS
    elif med_a > med_b:
        verdict = MINUS
    else:
        # significant but direction undecidable from the medians; fall
        # back to the means, else call it similar
        mean_a, mean_b = float(np.mean(a)), float(np.mean(b))
        verdict = PLUS if mean_a < mean_b else MINUS if mean_a > mean_b else APPROX
    return ComparisonVerdict(
        p_value=float(p),
        verdict=verdict,
        median_a=med_a,
        median_b=med_b,
        statistic=w_plus,
        n_effective=n,
    )


@dataclass(frozen=True)
class Summary:
    """Aggregate of several runs of one algorithm on one problem."""

    algorithm: str
    n_runs: int
    finals: np.ndarray
    final_mean: float
    final_median: float
    final_std: float
    n_evals: np.ndarray
    mean_curve: np.ndarray


def summarize(traces) -> Summary:
    """Mean/median/std of final best values plus the mean convergence curve.

    All traces must share the same evaluation grid (same initial design
    size and budget); the curve is averaged at every evaluation count.
    """
    traces = list(traces)
    if not traces:
        raise ConfigurationError("need at least one trace to summarize")
    grid = traces[0].n_evals
    for t in traces[1:]:
        if not np.array_equal(t.n_evals, grid):
            raise ConfigurationError(
                "traces have misaligned evaluation grids and cannot be summarized"
            )
    curves = np.vstack([t.f_min for t in traces])
    finals = curves[:, -1].copy()
    return Summary(
        algorithm=traces[0].algorithm,
        n_runs=len(traces),
        finals=finals,
        final_mean=float(np.mean(finals)),
        final_median=float(np.median(finals)),
        final_std=float(np.std(finals)),
        n_evals=grid.copy(),
        mean_curve=curves.mean(axis=0),
    )


def verdict_counts(verdicts) -> tuple[int, int, int]:
    """Count (plus, approx, minus) over a collection of verdicts."""
    vs = [v.verdict for v in verdicts]
    return vs.count(PLUS), vs.count(APPROX), vs.count(MINUS)
