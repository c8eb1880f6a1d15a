"""Exception types raised across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the function."""


class ConstraintError(ValueError):
    """A parameter vector violates the recurrence constraint."""


class EnvironmentExhaustedError(RuntimeError):
    """The walk left the finite window on which the environment was sampled."""


class ValleyNotClosedError(RuntimeError):
    """No right border of the valley exists inside the potential window."""


class SamplerExhaustedError(RuntimeError):
    """Rejection sampling hit its attempt cap."""


class OptimizationError(RuntimeError):
    """The objective returned a non-finite value.

    Parameters
    ----------
    x : array_like
        Abscissa at which the objective misbehaved.
    value : float
        The offending objective value.
    """

    def __init__(self, x, value, context=""):
        self.x = x
        self.value = value
        msg = f"objective returned {value!r} at x={x!r}"
        if context:
            msg = f"{context}: {msg}"
        super().__init__(msg)


class NoSolutionError(ArithmeticError):
    """A moment equation has no admissible root."""


class UndefinedCriterionError(ValueError):
    """A criterion was requested on a walk with an empty range."""


class MalformedPathError(ValueError):
    """A path is not a nearest-neighbour path started at 0."""
