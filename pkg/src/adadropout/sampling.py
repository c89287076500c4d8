"""Seedable randomness, Latin hypercube initialization, subspace draws.

Every random operation in the package goes through a
:class:`numpy.random.Generator` derived from an explicit :class:`RngState`,
so a run is a pure function of its inputs and its seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError

_U64_MAX = 2**64 - 1


@dataclass(frozen=True)
class RngState:
    """A (seed, stream) pair identifying one reproducible random stream.

    Two states with the same seed and stream always reproduce the same
    sample sequence.  Independent sub-streams for the different random
    consumers of a run (initial design, subspace draws, inner optimizer,
    ...) are derived with :meth:`generator` using distinct integer paths.
    """

    seed: int
    stream: int = 0

    def __post_init__(self):
        for name in ("seed", "stream"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or not 0 <= v <= _U64_MAX:
                raise ConfigurationError(
                    f"{name} must be an unsigned 64-bit integer, got {v!r}"
                )

    def generator(self, *path: int) -> np.random.Generator:
        """Return a fresh generator for this state (optionally a sub-stream).

        The same ``(seed, stream, *path)`` tuple always yields a generator
        producing the identical sequence.
        """
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream, *path))
        return np.random.Generator(np.random.PCG64(ss))


def as_generator(rng) -> np.random.Generator:
    """Normalize an RngState, integer seed, or Generator into a Generator.

    Passing a Generator uses (and advances) it in place; passing an
    RngState or int creates a fresh, deterministic generator.
    """
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngState):
        return rng.generator()
    if isinstance(rng, (int, np.integer)):
        return RngState(int(rng)).generator()
    raise ConfigurationError(f"cannot interpret {rng!r} as a random generator")


@dataclass(frozen=True)
class SearchBox:
    """An axis-aligned box ``[lower, upper]`` in R^D with lower < upper."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lower, dtype=float))
        hi = np.atleast_1d(np.asarray(self.upper, dtype=float))
        if lo.ndim != 1 or lo.shape != hi.shape or lo.size < 1:
            raise ConfigurationError("lower and upper must be 1-D vectors of equal length")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise ConfigurationError("box bounds must be finite")
        if not np.all(lo < hi):
            raise ConfigurationError("lower[i] < upper[i] must hold for every dimension")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def cube(cls, lower: float, upper: float, dim: int) -> "SearchBox":
        """The box ``[lower, upper]^dim``."""
        if dim < 1:
            raise ConfigurationError("dim must be >= 1")
        return cls(np.full(dim, float(lower)), np.full(dim, float(upper)))

    @property
    def dim(self) -> int:
        return self.lower.size

    @property
    def span(self) -> np.ndarray:
        return self.upper - self.lower

    def clip(self, x: np.ndarray) -> np.ndarray:
        return np.clip(x, self.lower, self.upper)

    def contains(self, x: np.ndarray) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lower) and np.all(x <= self.upper))

    def subspace(self, indices) -> "SearchBox":
        """The box restricted to the given coordinate indices."""
        idx = np.asarray(indices, dtype=int)
        return SearchBox(self.lower[idx], self.upper[idx])

    def to_unit(self, x: np.ndarray) -> np.ndarray:
        """Affine map of points into the unit cube."""
        return (np.asarray(x, dtype=float) - self.lower) / self.span


def lhs_sample(n: int, box: SearchBox, rng) -> np.ndarray:
    """Latin hypercube sample of ``n`` points inside ``box``.

    Per dimension the ``n`` points occupy each of the strata
    ``[k/n, (k+1)/n)`` exactly once (after rescaling to the unit cube);
    positions within a stratum are uniform and strata are assigned by an
    independent random permutation per dimension.

    Parameters
    ----------
    n : int
        Number of points, at least 1.
    box : SearchBox
        Sampling domain.
    rng : RngState, int, or numpy Generator
        Randomness source.

    Returns
    -------
    ndarray of shape (n, D), rows inside the box.
    """
    if n < 1:
        raise ConfigurationError(f"sample count must be >= 1, got {n}")
    gen = as_generator(rng)
    strata = np.argsort(gen.random((n, box.dim)), axis=0)
    jitter = gen.random((n, box.dim))
    unit = (strata + jitter) / n
    return box.lower + unit * box.span


def select_subspace(d: int, total_dim: int, rng) -> np.ndarray:
    """Draw ``d`` distinct coordinate indices uniformly from ``range(total_dim)``.

    Returns the indices sorted ascending; every call consumes fresh
    randomness from ``rng``.
    """
    if not 1 <= d <= total_dim:
        raise ConfigurationError(
            f"subspace size must satisfy 1 <= d <= {total_dim}, got {d}"
        )
    gen = as_generator(rng)
    idx = gen.choice(total_dim, size=d, replace=False)
    return np.sort(idx)


def random_rotation(dim: int, rng) -> np.ndarray:
    """Random orthogonal matrix from QR of an i.i.d. standard-normal matrix.

    The returned Q satisfies ``Q.T @ Q = I`` to machine precision and has
    determinant +/-1.
    """
    if dim < 1:
        raise ConfigurationError("dim must be >= 1")
    gen = as_generator(rng)
    g = gen.standard_normal((dim, dim))
    q, r = np.linalg.qr(g)
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return q * signs
