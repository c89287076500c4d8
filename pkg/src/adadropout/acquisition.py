"""Expected improvement and its restriction to a coordinate subspace.

The subspace acquisition scores a d-vector of candidate values by
splicing them into the incumbent at the selected coordinates and
evaluating plain expected improvement of the full-dimensional surrogate
at the composed point.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .errors import ConfigurationError
from .gp import GpModel, predict, predict_batch

# below this predictive standard deviation the point is treated as already
# observed and its improvement is defined to be exactly zero
SD_FLOOR = 1e-12

_INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)


@dataclass(frozen=True)
class AcquisitionContext:
    """Everything needed to score candidate values on a coordinate subset.

    ``f_min`` must be the minimum of the archive the model was fitted on,
    ``incumbent`` the corresponding point, and ``selection`` the sorted,
    distinct coordinate indices currently being optimized.
    """

    model: GpModel
    f_min: float
    incumbent: np.ndarray
    selection: np.ndarray

    def __post_init__(self):
        inc = np.asarray(self.incumbent, dtype=float)
        sel = np.asarray(self.selection, dtype=int)
        if sel.ndim != 1 or sel.size < 1:
            raise ConfigurationError("selection must be a non-empty index vector")
        if np.unique(sel).size != sel.size:
            raise ConfigurationError("selection indices must be distinct")
        if sel.min() < 0 or sel.max() >= inc.size:
            raise ConfigurationError("selection indices out of range")
        object.__setattr__(self, "incumbent", inc)
        object.__setattr__(self, "selection", sel)


def expected_improvement(mean: float, sd: float, f_min: float) -> float:
    """Closed-form expected improvement for a minimization problem.

    For predictive distribution N(mean, sd^2) and best observed value
    ``f_min`` this is ``(f_min - mean) Phi(z) + sd phi(z)`` with
    ``z = (f_min - mean)/sd``.  When ``sd`` is at or below the floor the
    value is exactly zero, which keeps already-sampled points from being
    re-selected.
    """
    if not (np.isfinite(mean) and np.isfinite(sd) and np.isfinite(f_min)):
        raise ValueError(
            f"expected_improvement needs finite inputs, got mean={mean}, sd={sd}, f_min={f_min}"
        )
    if sd < 0:
        raise ValueError(f"standard deviation must be nonnegative, got {sd}")
    if sd <= SD_FLOOR:
        return 0.0
    z = (f_min - mean) / sd
    value = (f_min - mean) * ndtr(z) + sd * _INV_SQRT_2PI * np.exp(-0.5 * z * z)
    return max(float(value), 0.0)


def expected_improvement_batch(
    means: np.ndarray, sds: np.ndarray, f_min: float
) -> np.ndarray:
    """Vectorized :func:`expected_improvement` over arrays of means/sds."""
    means = np.asarray(means, dtype=float)
    sds = np.asarray(sds, dtype=float)
    out = np.zeros(means.shape)
    live = sds > SD_FLOOR
    if np.any(live):
        m, s = means[live], sds[live]
        z = (f_min - m) / s
        out[live] = (f_min - m) * ndtr(z) + s * _INV_SQRT_2PI * np.exp(-0.5 * z * z)
    np.maximum(out, 0.0, out=out)
    return out


def compose_point(
    incumbent: np.ndarray, selection: np.ndarray, values: np.ndarray
) -> np.ndarray:
    """Copy of ``incumbent`` with ``selection[k]`` replaced by ``values[k]``."""
    incumbent = np.asarray(incumbent, dtype=float)
    selection = np.asarray(selection, dtype=int)
    values = np.asarray(values, dtype=float)
    if values.shape != selection.shape:
        raise ValueError(
            f"got {values.size} values for {selection.size} selected coordinates"
        )
    out = incumbent.copy()
    out[selection] = values
    return out


def compose_batch(
    incumbent: np.ndarray, selection: np.ndarray, values: np.ndarray
) -> np.ndarray:
    """Batch version of :func:`compose_point`; ``values`` is (m x d)."""
    values = np.atleast_2d(np.asarray(values, dtype=float))
    selection = np.asarray(selection, dtype=int)
    if values.shape[1] != selection.size:
        raise ValueError(
            f"got {values.shape[1]} values for {selection.size} selected coordinates"
        )
    out = np.tile(np.asarray(incumbent, dtype=float), (values.shape[0], 1))
    out[:, selection] = values
    return out


def essi(ctx: AcquisitionContext, values: np.ndarray) -> float:
    """Expected improvement of the point composed from the incumbent.

    Identical to ``expected_improvement(predict(model, composed), f_min)``
    where ``composed`` overwrites the selected coordinates of the
    incumbent with ``values``.
    """
    x = compose_point(ctx.incumbent, ctx.selection, values)
    p = predict(ctx.model, x)
    return expected_improvement(p.mean, p.sd, ctx.f_min)


def essi_batch(ctx: AcquisitionContext, values: np.ndarray) -> np.ndarray:
    """Vectorized :func:`essi` for an (m x d) batch of candidate values."""
    X = compose_batch(ctx.incumbent, ctx.selection, values)
    means, variances = predict_batch(ctx.model, X)
    return expected_improvement_batch(means, np.sqrt(variances), ctx.f_min)
