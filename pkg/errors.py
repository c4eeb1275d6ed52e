"""
Exception hierarchy shared by all modules.

The CLI maps these classes to exit codes:
contract violations exit 2, numerical failures exit 3,
unknown flags exit 64, unparsable input exits 65 and
unwritable outputs exit 74.
"""
from typing import Optional


class BarronError(Exception):
    """Root of every error raised by this package."""


class ContractViolation(BarronError, ValueError):
    """A precondition of an operation does not hold."""


class ParseError(ContractViolation):
    """A catalog, weight, domain, activation or config string could not be parsed."""


class ConfigError(ContractViolation):
    """An environment or config-file value is malformed."""


class UsageError(ContractViolation):
    """Unknown command-line flag, subcommand or config-file key."""


class ParameterError(ContractViolation):
    """The hypotheses of a construction are violated."""


class NumericalError(BarronError, ArithmeticError):
    """A numerical quantity could not be computed to the required accuracy."""


class DivergingNormError(NumericalError):
    def __init__(self, message: str, factor: Optional[str] = None):
        super().__init__(message)
        self.factor = factor


class DivergingMassError(DivergingNormError):
    pass


class NonIntegrableError(NumericalError):
    pass


class AccuracyError(NumericalError):
    pass


class EvaluationError(NumericalError):
    pass


class UnsupportedOrderError(NumericalError):
    pass


class NoValidTauError(NumericalError):
    pass


class EnvelopeFailureError(NumericalError):
    pass


class FitError(NumericalError):
    def __init__(self, message: str, n: Optional[int] = None):
        super().__init__(message)
        self.n = n


EXIT_OK = 0
EXIT_CONTRACT = 2
EXIT_NUMERICAL = 3
EXIT_USAGE = 64
EXIT_PARSE = 65
EXIT_IO = 74


def exit_code_for(exc: BaseException) -> int:
    """Map an exception to the CLI exit status."""
    if isinstance(exc, UsageError):
        return EXIT_USAGE
    if isinstance(exc, ParseError):
        return EXIT_PARSE
    if isinstance(exc, ContractViolation):
        return EXIT_CONTRACT
    if isinstance(exc, NumericalError):
        return EXIT_NUMERICAL
    if isinstance(exc, OSError):
        return EXIT_IO
    raise exc
