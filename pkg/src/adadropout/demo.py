"""One-dimensional walkthrough of the surrogate and the acquisition.

Fits the GP to a handful of samples of the wiggly test line
``f(x) = cos(x) + sin(2x) + 0.5x`` on [-5, 5] and emits two SVG figures:
the fit (true curve, samples, predictive mean, uncertainty band) and the
expected-improvement curve, which is zero at the samples and rises
between them.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .acquisition import expected_improvement_batch
from .gp import Archive, GpModel, fit, predict_batch
from .objectives import ObjectiveSpec, evaluate
from .sampling import RngState, lhs_sample


@dataclass
class DemoResult:
    """Arrays behind the demo figures, for inspection and testing."""

    x_samples: np.ndarray
    y_samples: np.ndarray
    grid: np.ndarray
    mean: np.ndarray
    sd: np.ndarray
    ei: np.ndarray
    f_min: float
    model: GpModel
    gp_plot: Path
    ei_plot: Path


def run_demo(output_dir, n_samples: int = 8, seed: int = 7, grid_size: int = 600,
             file_prefix: str = "demo") -> DemoResult:
    """Fit the 1-D demo problem and write the two figures.

    Returns the plotted arrays so callers can check the interpolation and
    the zero-at-samples property directly.
    """
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    spec = ObjectiveSpec(kind="fig1-demo", dim=1)
    box = spec.box

    X = lhs_sample(n_samples, box, RngState(seed))
    y = np.array([evaluate(spec, x) for x in X])
    model = fit(Archive(X, y), box)

    grid = np.linspace(box.lower[0], box.upper[0], grid_size)
    means, variances = predict_batch(model, grid[:, None])
    sds = np.sqrt(variances)
    f_min = float(np.min(y))
    ei = expected_improvement_batch(means, sds, f_min)

    truth = np.array([evaluate(spec, np.array([g])) for g in grid])
    gp_path = out / f"{file_prefix}_gp_fit.svg"
    ei_path = out / f"{file_prefix}_ei.svg"
    _plot_fit(grid, truth, X[:, 0], y, means, sds, gp_path)
    _plot_ei(grid, ei, X[:, 0], ei_path)

    return DemoResult(
        x_samples=X[:, 0],
        y_samples=y,
        grid=grid,
        mean=means,
        sd=sds,
        ei=ei,
        f_min=f_min,
        model=model,
        gp_plot=gp_path,
        ei_plot=ei_path,
    )


def _plot_fit(grid, truth, xs, ys, means, sds, path: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(grid, truth, "k-", label="true function")
    ax.plot(grid, means, "--", color="tab:brown", label="predictive mean")
    ax.fill_between(grid, means - 2 * sds, means + 2 * sds,
                    alpha=0.25, color="tab:brown", label="±2 sd")
    ax.plot(xs, ys, "o", color="tab:blue", label="samples")
    ax.set_xlabel("x")
    ax.set_ylabel("f(x)")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def _plot_ei(grid, ei, xs, path: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7, 3.5))
    ax.plot(grid, ei, color="tab:green")
    ax.fill_between(grid, 0.0, ei, alpha=0.25, color="tab:green")
    ax.plot(xs, np.zeros_like(xs), "o", color="tab:blue", label="samples")
    ax.set_xlabel("x")
    ax.set_ylabel("expected improvement")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
