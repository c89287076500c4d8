"""Benchmark objectives and the external black-box protocol.

Analytic kinds evaluate ``f(Q (x - s))`` where ``s`` is an optional shift
and ``Q`` an optional orthogonal rotation, so the optimum can be moved
away from the origin and the coordinate axes.  All analytic kinds have a
known global minimum of 0 (except the one-dimensional plotting demo
``fig1-demo``, whose minimum is just whatever it is).

External objectives run as a child process speaking a line-oriented
stdio protocol:

    request :  ``EVAL v1 v2 ... vD\n``   (full round-trip precision)
    reply   :  one decimal real per line, strictly lock-step

The child is launched once per run with ``BO_OBJECTIVE_DIM`` set in its
environment.
"""

from __future__ import annotations

import os
import queue
import shlex
import subprocess
import threading
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, EvaluationError
from .sampling import SearchBox

ANALYTIC_KINDS = (
    "sphere",
    "ellipsoid",
    "rosenbrock",
    "ackley",
    "rastrigin",
    "griewank",
    "levy",
    "fig1-demo",
)
EXTERNAL_KIND = "external"

# conventional domains from the benchmarking literature
_DEFAULT_BOUNDS = {
    "sphere": (-100.0, 100.0),
    "ellipsoid": (-100.0, 100.0),
    "rosenbrock": (-5.0, 10.0),
    "ackley": (-32.768, 32.768),
    "rastrigin": (-5.12, 5.12),
    "griewank": (-600.0, 600.0),
    "levy": (-10.0, 10.0),
    "fig1-demo": (-5.0, 5.0),
    "external": (-100.0, 100.0),
}

_ROTATION_TOL = 1e-10


def default_box(kind: str, dim: int) -> SearchBox:
    """The conventional domain for a benchmark kind."""
    if kind not in _DEFAULT_BOUNDS:
        raise ConfigurationError(f"unknown objective kind {kind!r}")
    lo, hi = _DEFAULT_BOUNDS[kind]
    return SearchBox.cube(lo, hi, dim)


def _sphere(z):
    return float(z @ z)


def _ellipsoid(z):
    # condition number 1e6 between first and last axis
    d = z.size
    if d == 1:
        return float(z @ z)
    weights = 10.0 ** (6.0 * np.arange(d) / (d - 1))
    return float(weights @ (z * z))


def _rosenbrock(z):
    return float(np.sum(100.0 * (z[1:] - z[:-1] ** 2) ** 2 + (1.0 - z[:-1]) ** 2))


def _ackley(z):
    d = z.size
    term1 = -20.0 * np.exp(-0.2 * np.sqrt(float(z @ z) / d))
    term2 = -np.exp(float(np.sum(np.cos(2.0 * np.pi * z))) / d)
    return float(term1 + term2 + 20.0 + np.e)


def _rastrigin(z):
    return float(10.0 * z.size + np.sum(z * z - 10.0 * np.cos(2.0 * np.pi * z)))


def _griewank(z):
    idx = np.sqrt(np.arange(1.0, z.size + 1.0))
    return float(z @ z / 4000.0 - np.prod(np.cos(z / idx)) + 1.0)


def _levy(z):
    w = 1.0 + (z - 1.0) / 4.0
    head = np.sin(np.pi * w[0]) ** 2
    mid = np.sum((w[:-1] - 1.0) ** 2 * (1.0 + 10.0 * np.sin(np.pi * w[:-1] + 1.0) ** 2))
    tail = (w[-1] - 1.0) ** 2 * (1.0 + np.sin(2.0 * np.pi * w[-1]) ** 2)
    return float(head + mid + tail)


def _fig1_demo(z):
    x = float(z[0])
    return float(np.cos(x) + np.sin(2.0 * x) + 0.5 * x)


_FORMULAS = {
    "sphere": _sphere,
    "ellipsoid": _ellipsoid,
    "rosenbrock": _rosenbrock,
    "ackley": _ackley,
    "rastrigin": _rastrigin,
    "griewank": _griewank,
    "levy": _levy,
    "fig1-demo": _fig1_demo,
}

# argmin of the untransformed function: the origin, except for the two
# kinds whose optimum sits at the all-ones point
_UNIT_MINIMIZERS = {"rosenbrock", "levy"}


@dataclass(frozen=True)
class ObjectiveSpec:
    """Declarative description of one objective.

    ``shift`` and ``rotation`` apply to analytic kinds only; ``command``
    and ``timeout`` to the external kind only.
    """

    kind: str
    dim: int
    box: SearchBox | None = None
    shift: np.ndarray | None = None
    rotation: np.ndarray | None = None
    command: str | list | None = None
    timeout: float = 60.0

    def __post_init__(self):
        if self.kind not in ANALYTIC_KINDS and self.kind != EXTERNAL_KIND:
            raise ConfigurationError(f"unknown objective kind {self.kind!r}")
        if self.dim < 1:
            raise ConfigurationError("dim must be >= 1")
        if self.kind == "fig1-demo" and self.dim != 1:
            raise ConfigurationError("fig1-demo is one-dimensional")
        if self.kind == EXTERNAL_KIND and not self.command:
            raise ConfigurationError("external objectives need a command")
        box = self.box if self.box is not None else default_box(self.kind, self.dim)
        if box.dim != self.dim:
            raise ConfigurationError("box dimension does not match dim")
        object.__setattr__(self, "box", box)
        if self.shift is not None:
            s = np.asarray(self.shift, dtype=float)
            if s.shape != (self.dim,):
                raise ConfigurationError("shift must be a length-D vector")
            if not box.contains(s):
                raise ConfigurationError("shift must lie inside the box")
            object.__setattr__(self, "shift", s)
        if self.rotation is not None:
            q = np.asarray(self.rotation, dtype=float)
            if q.shape != (self.dim, self.dim):
                raise ConfigurationError("rotation must be a DxD matrix")
            if np.max(np.abs(q.T @ q - np.eye(self.dim))) > _ROTATION_TOL:
                raise ConfigurationError("rotation must be orthogonal")
            object.__setattr__(self, "rotation", q)

    @property
    def label(self) -> str:
        return f"{self.kind}-{self.dim}d"


def _transform(spec: ObjectiveSpec, x: np.ndarray) -> np.ndarray:
    z = np.asarray(x, dtype=float)
    if z.shape != (spec.dim,):
        raise ConfigurationError(f"expected a length-{spec.dim} vector, got shape {z.shape}")
    if spec.shift is not None:
        z = z - spec.shift
    if spec.rotation is not None:
        z = spec.rotation @ z
    return z


def evaluate(spec: ObjectiveSpec, x: np.ndarray) -> float:
    """Evaluate an analytic objective at ``x`` (with shift/rotation applied).

    External objectives hold process state and must go through
    :func:`make_objective` / :class:`ExternalObjective` instead.
    """
    if spec.kind == EXTERNAL_KIND:
        raise ConfigurationError(
            "external objectives are stateful; use make_objective(spec)"
        )
    return _FORMULAS[spec.kind](_transform(spec, x))


def minimizer(spec: ObjectiveSpec) -> np.ndarray:
    """Location of the documented global minimum in the original space."""
    if spec.kind == EXTERNAL_KIND or spec.kind == "fig1-demo":
        raise ConfigurationError(f"no documented minimizer for kind {spec.kind!r}")
    z_star = np.ones(spec.dim) if spec.kind in _UNIT_MINIMIZERS else np.zeros(spec.dim)
    x_star = z_star
    if spec.rotation is not None:
        x_star = spec.rotation.T @ x_star
    if spec.shift is not None:
        x_star = x_star + spec.shift
    return x_star


class ExternalObjective:
    """One child process evaluating points over the stdio protocol.

    The instance is callable like any objective; it is single-in-flight
    (one request outstanding at a time).  Use as a context manager or
    call :meth:`close` to terminate the child.
    """

    def __init__(self, command, dim: int, timeout: float = 60.0):
        if not command:
            raise ConfigurationError("external objective needs a command")
        argv = shlex.split(command) if isinstance(command, str) else list(command)
        env = dict(os.environ, BO_OBJECTIVE_DIM=str(dim))
        self.dim = dim
        self.timeout = timeout
        try:
            self._proc = subprocess.Popen(
                argv,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                bufsize=1,
                env=env,
            )
        except OSError as exc:
            raise EvaluationError(f"could not launch objective command {argv!r}: {exc}")
        self._replies: queue.Queue = queue.Queue()
        self._reader = threading.Thread(target=self._pump, daemon=True)
        self._reader.start()

    @classmethod
    def from_spec(cls, spec: ObjectiveSpec) -> "ExternalObjective":
        return cls(spec.command, spec.dim, spec.timeout)

    def _pump(self):
        for line in self._proc.stdout:
            self._replies.put(line)
        self._replies.put(None)  # EOF sentinel

    def __call__(self, x: np.ndarray) -> float:
        x = np.asarray(x, dtype=float)
        request = "EVAL " + " ".join(repr(float(v)) for v in x)
        try:
            self._proc.stdin.write(request + "\n")
            self._proc.stdin.flush()
        except (OSError, ValueError) as exc:
            raise EvaluationError(
                f"objective process rejected request {request!r}: {exc}"
            )
        try:
            reply = self._replies.get(timeout=self.timeout)
        except queue.Empty:
            raise EvaluationError(
                f"objective process did not reply within {self.timeout}s "
                f"to request {request!r}"
            )
        if reply is None:
            raise EvaluationError(
                f"objective process exited before replying to request {request!r}"
            )
        try:
            return float(reply.strip())
        except ValueError:
            raise EvaluationError(
                f"malformed reply {reply.strip()!r} to request {request!r}"
            )

    def close(self):
        if self._proc.poll() is None:
            self._proc.terminate()
            try:
                self._proc.wait(timeout=5.0)
            except subprocess.TimeoutExpired:
                self._proc.kill()
                self._proc.wait()

    def __enter__(self):
        return self

    def __exit__(self, *exc_info):
        self.close()
        return False


def make_objective(spec: ObjectiveSpec):
    """Turn a spec into a callable ``f(x) -> float``.

    For the external kind the returned callable is an
    :class:`ExternalObjective` owning a live child process; close it (or
    use it as a context manager) when the run is done.
    """
    if spec.kind == EXTERNAL_KIND:
        return ExternalObjective.from_spec(spec)
    return lambda x: evaluate(spec, x)
