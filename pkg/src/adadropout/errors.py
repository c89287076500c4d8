"""Exception hierarchy shared by all modules."""


class OptimizationError(Exception):
    """Base class for errors raised by this package."""


class ConfigurationError(OptimizationError, ValueError):
    """Invalid argument, bound, budget, or config-file content."""


class ModelError(OptimizationError, RuntimeError):
    """The surrogate could not be built (e.g. factorization failed after
    exhausting the jitter escalation)."""


class EvaluationError(OptimizationError, RuntimeError):
    """An objective evaluation failed (crashed process, timeout, malformed
    or non-finite reply).  When raised from inside an optimizer run, the
    partial :class:`~adadropout.optimizers.RunTrace` is attached as the
    ``trace`` attribute.
    """

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace
