"""Exception hierarchy.

Every error raised by the library derives from :class:`NoisePumpError`;
the CLI maps the subclasses onto exit codes.
"""


class NoisePumpError(Exception):
    exit_code = 4


class ParameterError(NoisePumpError, ValueError):
    """Invalid physical or numerical parameter."""

    exit_code = 2


class DomainError(ParameterError):
    """Argument outside the domain where a formula is defined."""


class PreconditionError(ParameterError):
    """A stated precondition (usually a step-size bound) is violated."""


class ConsistencyError(ParameterError):
    """Two inputs that must agree (grids, detunings) do not."""


class ConvergenceError(NoisePumpError):
    exit_code = 3


class NumericalFailure(NoisePumpError):
    exit_code = 4


class SamplerError(NumericalFailure):
    pass


class StepSizeError(NumericalFailure):
    pass


class ConfigError(NoisePumpError):
    exit_code = 2

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))
