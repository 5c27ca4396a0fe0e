from typing import Any, Optional


class SynthControlError(Exception):
    """Base class for every error raised by the toolkit."""

    exit_code = 1


class DataError(SynthControlError, ValueError):
    """Problem with the input data or a study definition. Exit code 2."""

    exit_code = 2


class OptimizationError(SynthControlError, RuntimeError):
    """A weight optimization could not be completed. Exit code 3."""

    exit_code = 3


class MissingValue(DataError):
    def __init__(self, variable: str, unit: str, week: str):
        self.variable, self.unit, self.week = variable, unit, week
        super().__init__(
            f"Missing value for variable '{variable}', unit '{unit}', week {week}"
        )


class IrregularWeekSpacing(DataError):
    def __init__(self, gap_days: int, week: str):
        self.gap_days, self.week = gap_days, week
        super().__init__(
            f"Weeks must be 7 days apart, found a {gap_days}-day gap before {week}"
        )


class DuplicateUnit(DataError):
    def __init__(self, unit: str):
        self.unit = unit
        super().__init__(f"Duplicate unit '{unit}'")


class DuplicateVariable(DataError):
    def __init__(self, variable: str):
        self.variable = variable
        super().__init__(f"Duplicate variable '{variable}'")


class UnknownUnit(DataError):
    def __init__(self, unit: str):
        self.unit = unit
        super().__init__(f"Unit '{unit}' is not in the panel")


class UnknownVariable(DataError):
    def __init__(self, variable: str):
        self.variable = variable
        super().__init__(f"Variable '{variable}' is not in the panel")


class UnknownWeek(DataError):
    def __init__(self, week: Any):
        self.week = week
        super().__init__(f"Week {week} is not in the panel week index")


class TreatedInDonorPool(DataError):
    def __init__(self, unit: str):
        self.unit = unit
        super().__init__(f"Treated unit '{unit}' cannot be part of its donor pool")


class InsufficientDonors(DataError):
    def __init__(self, count: int):
        self.count = count
        super().__init__(f"At least 2 donor units are required, got {count}")


class InsufficientPreWindow(DataError):
    def __init__(self, weeks: int, minimum: int = 2):
        self.weeks, self.minimum = weeks, minimum
        super().__init__(
            f"Pre-treatment window has {weeks} week(s), at least {minimum} required"
        )


class InvalidWindow(DataError):
    def __init__(self, reason: str):
        self.reason = reason
        super().__init__(f"Invalid study window: {reason}")


class ParseError(DataError):
    def __init__(self, line: int, column: Optional[str], reason: str):
        self.line, self.column, self.reason = line, column, reason
        where = f"line {line}" + (f", column '{column}'" if column else "")
        super().__init__(f"Parse error at {where}: {reason}")


class EmptyInput(DataError):
    def __init__(self, source: str = "input"):
        self.source = source
        super().__init__(f"No observations found in {source}")


class NonPositiveBaselinePrice(DataError):
    def __init__(self, price: float, unit: Optional[str] = None):
        self.price, self.unit = price, unit
        owner = f" for unit '{unit}'" if unit else ""
        super().__init__(f"Baseline price{owner} must be positive, got {price}")


class NonPositiveMaximum(DataError):
    def __init__(self, unit: Optional[str] = None, variable: Optional[str] = None):
        self.unit, self.variable = unit, variable
        owner = f" ({variable}, {unit})" if unit or variable else ""
        super().__init__(f"Series maximum must be positive to normalize{owner}")


class NegativeValue(DataError):
    def __init__(self, value: float):
        self.value = value
        super().__init__(f"Series values must be non-negative, got {value}")


class LengthMismatch(DataError):
    def __init__(self, left: int, right: int):
        self.left, self.right = left, right
        super().__init__(f"Series lengths differ: {left} != {right}")


class EmptyWindow(DataError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"The {name} window contains no weeks")


class ZeroPreMspe(DataError):
    def __init__(self, unit: Optional[str] = None):
        self.unit = unit
        owner = f" of unit '{unit}'" if unit else ""
        super().__init__(f"Pre-treatment MSPE{owner} is zero, ratio is undefined")


class MissingArtifact(DataError):
    def __init__(self, path: str, hint: str = ""):
        self.path = path
        super().__init__(f"Required artifact not found: {path}{hint}")


class ConfigError(SynthControlError, ValueError):
    """The study config is malformed or inconsistent. Exit code 1 (usage)."""

    exit_code = 1

    def __init__(self, reason: str):
        self.reason = reason
        super().__init__(f"Invalid study config: {reason}")


class OptimizerFailure(OptimizationError):
    def __init__(self, diagnostic: str):
        self.diagnostic = diagnostic
        super().__init__(f"Optimizer failed: {diagnostic}")
