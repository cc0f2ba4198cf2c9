"""Exception hierarchy.

Every error raised on purpose by the library derives from ``FormlangError``;
the CLI maps these to exit code 1.
"""


class FormlangError(Exception):
    """Base class for domain errors."""


class FormatError(FormlangError):
    """A JSON or dataset file does not follow the expected schema."""


class UnknownSymbol(FormlangError):
    def __init__(self, token, position):
        super().__init__(f"unknown symbol {token!r} at position {position}")
        self.token = token
        self.position = position


class RegexSyntaxError(FormlangError):
    def __init__(self, position, message="malformed regular expression"):
        super().__init__(f"{message} at position {position}")
        self.position = position


class StateBudgetExceeded(FormlangError):
    pass


class BudgetExceeded(FormlangError):
    pass


class AlphabetMismatch(FormlangError):
    pass


class ConflictingLabels(FormlangError):
    def __init__(self, string):
        super().__init__(f"string {' '.join(string) or '%e'!r} has both labels")
        self.string = string


class MemoryFault(FormlangError):
    """An update operation is not defined on the current configuration."""


class FrontierCapExceeded(FormlangError):
    def __init__(self, step, size):
        super().__init__(f"frontier of {size} configurations after step {step} exceeds cap")
        self.step = step
        self.size = size


class InfeasibleRequest(FormlangError):
    pass


class InvalidPath(FormlangError):
    pass


class SemiringMismatch(FormlangError):
    pass


class RankDeficientBasis(FormlangError):
    pass


class InvalidRankHint(FormlangError):
    pass


class MissingValue(FormlangError):
    pass


class QueryBudgetExceeded(FormlangError):
    pass


class UndefinedLimit(FormlangError):
    def __init__(self, coordinate):
        super().__init__(f"saturation limit undefined: zero preactivation at {coordinate}")
        self.coordinate = coordinate


class DimensionMismatch(FormlangError):
    pass
