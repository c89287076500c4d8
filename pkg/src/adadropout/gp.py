"""Ordinary-kriging Gaussian process surrogate.

The model uses a single isotropic squared-exponential correlation

    r(x_i, x_j) = exp(-||x_i - x_j||^2 / (2 l^2)),

a constant mean estimated by generalized least squares, and the process
variance estimated from the correlation-weighted residuals.  Inputs are
affinely mapped to the unit cube before any distance is computed, so the
length-scale bounds mean the same thing on every problem; outputs are
used raw (the estimated mean absorbs centering).

All linear algebra goes through one Cholesky factorization of the
jittered correlation matrix per fit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .errors import ConfigurationError, ModelError
from .sampling import SearchBox

DEFAULT_LENGTH_SCALE_BOUNDS = (0.01, 100.0)

# floor inside log(sigma2 + eps) so constant-response archives stay finite
_LOG_EPS = 1e-300

# jitter escalation: start at 1e-10 x diagonal scale, x10 per failure,
# give up beyond 1e-2 of the diagonal
_JITTER_INIT = 1e-10
_JITTER_CAP = 1e-2
_JITTER_GROWTH = 10.0

_GRID_SIZE = 64
_GOLDEN_REL_TOL = 1e-3
_INV_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class Archive:
    """The evaluated dataset: design matrix ``X`` (n x D) and values ``y`` (n,).

    The incumbent is the row with the smallest value; ties break toward
    the lowest row index.
    """

    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.X, dtype=float))
        y = np.atleast_1d(np.asarray(self.y, dtype=float))
        if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
            raise ConfigurationError(
                f"design/values shape mismatch: X {X.shape}, y {y.shape}"
            )
        if X.shape[0] < 1:
            raise ConfigurationError("archive must contain at least one point")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    def __len__(self) -> int:
        return self.X.shape[0]

    @property
    def dim(self) -> int:
        return self.X.shape[1]

    @property
    def incumbent_index(self) -> int:
        return int(np.argmin(self.y))

    @property
    def f_min(self) -> float:
        return float(self.y[self.incumbent_index])


@dataclass(frozen=True)
class Prediction:
    """Predictive mean and (clamped, nonnegative) variance at one point."""

    mean: float
    variance: float

    def __post_init__(self):
        object.__setattr__(self, "variance", max(float(self.variance), 0.0))

    @property
    def sd(self) -> float:
        return float(np.sqrt(self.variance))


@dataclass(frozen=True)
class GpModel:
    """Fitted surrogate state.

    ``chol`` is the lower Cholesky factor of ``R + jitter*I`` on the
    unit-cube-scaled inputs and ``chol_inv`` its explicit inverse (kept so
    batched prediction is a matrix product instead of a triangular solve);
    ``alpha`` and ``rinv_one`` cache ``(R+jitter*I)^-1 (y - mu)`` and
    ``(R+jitter*I)^-1 1``.
    """

    length_scale: float
    mu_hat: float
    sigma2_hat: float
    chol: np.ndarray
    chol_inv: np.ndarray
    jitter: float
    alpha: np.ndarray
    rinv_one: np.ndarray
    one_rinv_one: float
    x_lower: np.ndarray
    x_span: np.ndarray
    X_unit: np.ndarray

    @property
    def n_train(self) -> int:
        return self.X_unit.shape[0]


def rbf_corr(xi: np.ndarray, xj: np.ndarray, length_scale: float) -> float:
    """Squared-exponential correlation between two points.

    Equals ``exp(-||xi - xj||^2 / (2 l^2))``; always in (0, 1].
    """
    if length_scale <= 0:
        raise ConfigurationError(f"length scale must be positive, got {length_scale}")
    diff = np.asarray(xi, dtype=float) - np.asarray(xj, dtype=float)
    return float(np.exp(-0.5 * float(diff @ diff) / length_scale**2))


def _pairwise_sq_dists(X: np.ndarray) -> np.ndarray:
    sq = np.sum(X * X, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (X @ X.T)
    np.maximum(d2, 0.0, out=d2)
    np.fill_diagonal(d2, 0.0)
    return d2


def _cross_sq_dists(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    d2 = (
        np.sum(A * A, axis=1)[:, None]
        + np.sum(B * B, axis=1)[None, :]
        - 2.0 * (A @ B.T)
    )
    np.maximum(d2, 0.0, out=d2)
    return d2


def cholesky_with_jitter(R: np.ndarray) -> tuple[np.ndarray, float]:
    """Lower Cholesky factor of ``R + jitter*I`` with escalating jitter.

    Raises :class:`ModelError` once the jitter required exceeds 1e-2 of
    the diagonal scale.
    """
    diag_scale = max(1.0, float(np.mean(np.diag(R))))
    jitter = _JITTER_INIT * diag_scale
    cap = _JITTER_CAP * diag_scale
    eye = np.eye(R.shape[0])
    while jitter <= cap:
        try:
            return np.linalg.cholesky(R + jitter * eye), jitter
        except np.linalg.LinAlgError:
            jitter *= _JITTER_GROWTH
    raise ModelError(
        f"correlation matrix not positive definite even with jitter {cap:g}"
    )


def _profile_from_sq_dists(d2: np.ndarray, y: np.ndarray, length_scale: float):
    """Factorize R(l)+jitter*I and concentrate out the mean and variance.

    Returns (L, jitter, mu_hat, sigma2_hat, log_det, w_one) where ``w_one``
    is the triangular solve of the all-ones vector (reused by callers).
    """
    R = np.exp(-0.5 * d2 / length_scale**2)
    L, jitter = cholesky_with_jitter(R)
    n = y.size
    ones = np.ones(n)
    w_one = solve_triangular(L, ones, lower=True, check_finite=False)
    w_y = solve_triangular(L, y, lower=True, check_finite=False)
    one_rinv_one = float(w_one @ w_one)
    mu_hat = float(w_one @ w_y) / one_rinv_one
    resid = w_y - mu_hat * w_one
    sigma2_hat = float(resid @ resid) / n
    log_det = 2.0 * float(np.sum(np.log(np.diag(L))))
    return L, jitter, mu_hat, sigma2_hat, log_det, w_one, one_rinv_one


def concentrated_nll(length_scale: float, archive: Archive) -> float:
    """Profile negative log-likelihood of the length scale.

    Equals ``n * log(sigma2_hat(l) + eps) + log det(R(l) + jitter*I)``
    with the mean and variance concentrated out analytically.  Distances
    are taken on ``archive.X`` as given (the fit routine passes
    unit-cube-scaled inputs).
    """
    if length_scale <= 0:
        raise ConfigurationError(f"length scale must be positive, got {length_scale}")
    if len(archive) < 2:
        raise ConfigurationError("need at least two points to evaluate the likelihood")
    d2 = _pairwise_sq_dists(archive.X)
    _, _, _, sigma2, log_det, _, _ = _profile_from_sq_dists(
        d2, archive.y, length_scale
    )
    return archive.y.size * float(np.log(sigma2 + _LOG_EPS)) + log_det


def _golden_section(fn, lo: float, hi: float) -> float:
    """Minimize ``fn`` over [lo, hi] in log space to relative tolerance."""
    a, b = np.log(lo), np.log(hi)
    c = b - _INV_GOLDEN * (b - a)
    d = a + _INV_GOLDEN * (b - a)
    fc, fd = fn(np.exp(c)), fn(np.exp(d))
    while (b - a) > np.log1p(_GOLDEN_REL_TOL):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INV_GOLDEN * (b - a)
            fc = fn(np.exp(c))
        else:
            a, c, fc = c, d, fd
            d = a + _INV_GOLDEN * (b - a)
            fd = fn(np.exp(d))
    return float(np.exp((a + b) / 2.0))


def fit(
    archive: Archive,
    box: SearchBox,
    length_scale_bounds: tuple[float, float] = DEFAULT_LENGTH_SCALE_BOUNDS,
) -> GpModel:
    """Fit the surrogate by maximizing the concentrated likelihood.

    The length scale is searched over a 64-point log-spaced grid on the
    given bounds followed by golden-section refinement around the grid
    minimum (relative tolerance 1e-3), which is deterministic and robust
    to multimodal likelihoods.

    Parameters
    ----------
    archive : Archive
        At least two evaluated points.
    box : SearchBox
        Problem domain; inputs are scaled to the unit cube of this box.
    length_scale_bounds : (float, float)
        Inclusive search interval for the length scale.

    Raises
    ------
    ModelError
        If the correlation matrix stays non-positive-definite after the
        jitter escalation (duplicated rows are fine; the jitter absorbs
        them).
    """
    if len(archive) < 2:
        raise ConfigurationError("GP fitting needs at least two points")
    lo, hi = float(length_scale_bounds[0]), float(length_scale_bounds[1])
    if not (0.0 < lo < hi) or not np.isfinite(hi):
        raise ConfigurationError(f"invalid length-scale bounds ({lo}, {hi})")
    if archive.dim != box.dim:
        raise ConfigurationError("archive dimension does not match the box")

    X_unit = box.to_unit(archive.X)
    y = archive.y
    n = y.size
    d2 = _pairwise_sq_dists(X_unit)

    def nll(l: float) -> float:
        _, _, _, sigma2, log_det, _, _ = _profile_from_sq_dists(d2, y, l)
        return n * float(np.log(sigma2 + _LOG_EPS)) + log_det

    grid = np.geomspace(lo, hi, _GRID_SIZE)
    values = np.array([nll(l) for l in grid])
    i = int(np.argmin(values))
    bracket_lo = grid[max(i - 1, 0)]
    bracket_hi = grid[min(i + 1, _GRID_SIZE - 1)]
    length_scale = _golden_section(nll, bracket_lo, bracket_hi)

    L, jitter, mu_hat, sigma2_hat, _, w_one, one_rinv_one = _profile_from_sq_dists(
        d2, y, length_scale
    )
    w_resid = solve_triangular(L, y - mu_hat, lower=True, check_finite=False)
    alpha = solve_triangular(L.T, w_resid, lower=False, check_finite=False)
    rinv_one = solve_triangular(L.T, w_one, lower=False, check_finite=False)
    chol_inv = solve_triangular(L, np.eye(n), lower=True, check_finite=False)
    return GpModel(
        length_scale=length_scale,
        mu_hat=mu_hat,
        sigma2_hat=sigma2_hat,
        chol=L,
        chol_inv=chol_inv,
        jitter=jitter,
        alpha=alpha,
        rinv_one=rinv_one,
        one_rinv_one=one_rinv_one,
        x_lower=box.lower.copy(),
        x_span=box.span.copy(),
        X_unit=X_unit,
    )


def predict(model: GpModel, x: np.ndarray) -> Prediction:
    """Predictive mean and variance at a single point.

    The variance includes the ordinary-kriging correction
    ``(1 - 1' R^-1 r)^2 / (1' R^-1 1)`` for the estimated mean and is
    clamped at zero.
    """
    means, variances = predict_batch(model, np.asarray(x, dtype=float)[None, :])
    return Prediction(float(means[0]), float(variances[0]))


def predict_batch(model: GpModel, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized prediction for a batch of query points (m x D).

    Returns ``(means, variances)`` as 1-D arrays of length m; variances
    are clamped at zero.
    """
    Xq = np.atleast_2d(np.asarray(X, dtype=float))
    Xq_unit = (Xq - model.x_lower) / model.x_span
    # correlations between training set and queries, shape (n, m)
    d2 = _cross_sq_dists(model.X_unit, Xq_unit)
    r = np.exp(-0.5 * d2 / model.length_scale**2)
    means = model.mu_hat + r.T @ model.alpha
    v = solve_triangular(model.chol, r, lower=True, check_finite=False)
    r_rinv_r = np.einsum("ij,ij->j", v, v)
    u = 1.0 - model.rinv_one @ r
    variances = model.sigma2_hat * (1.0 - r_rinv_r + u * u / model.one_rinv_one)
    np.maximum(variances, 0.0, out=variances)
    return means, variances
