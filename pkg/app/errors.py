from typing import Optional


class CensusSynthError(Exception):
    """Base of every expected failure. `exit_code` is what the CLI exits with."""

    exit_code = 1

    def __init__(self, message: str, source: Optional[str] = None, line: Optional[int] = None):
        super().__init__(message)
        self.message = message
        self.source = source
        self.line = line

    def __str__(self) -> str:
        where = ""
        if self.source:
            where = f"{self.source}:{self.line}: " if self.line else f"{self.source}: "
        return f"{where}{self.message}"


class ConfigError(CensusSynthError):
    exit_code = 1


class GenerationError(CensusSynthError):
    exit_code = 2


class IoFailure(CensusSynthError):
    exit_code = 3


class InvalidInvocation(ConfigError):
    pass


# -------- descriptor --------
class DescriptorError(ConfigError):
    pass


class MalformedDocument(DescriptorError):
    pass


class UnknownElement(DescriptorError):
    pass


class UnknownAttribute(DescriptorError):
    pass


class MissingRequiredAttribute(DescriptorError):
    pass


class InvalidCount(DescriptorError):
    pass


class DuplicateAttributeName(DescriptorError):
    pass


class DuplicateVariableName(DescriptorError):
    pass


class UndeclaredVariable(DescriptorError):
    pass


class UnsupportedConsumer(DescriptorError):
    pass


class UnboundColumn(DescriptorError):
    pass


# -------- script --------
class ScriptError(ConfigError):
    pass


class EmptyExpression(ScriptError):
    pass


class ScriptSyntaxError(ScriptError):
    def __init__(self, message: str, position: int, text: str):
        super().__init__(f"{message} at column {position + 1} in {text!r}")
        self.position = position


# -------- weights / fixtures --------
class WeightTableError(ConfigError):
    pass


class EmptyTable(WeightTableError):
    pass


class MissingCategory(WeightTableError):
    pass


class MalformedRow(WeightTableError):
    pass


class NonIntegerWeight(WeightTableError):
    pass


class NegativeWeight(WeightTableError):
    pass


class DuplicateCategory(WeightTableError):
    pass


class AllWeightsZero(WeightTableError):
    pass


class WeightOverflow(WeightTableError):
    pass


class AgeOutOfRange(ConfigError):
    pass


class FixtureError(ConfigError):
    pass


class MissingGroupFile(FixtureError):
    def __init__(self, group: str, source: Optional[str] = None):
        super().__init__(f"missing group file for {group}", source=source)
        self.group = group


class BadFileNamePattern(FixtureError):
    pass


class BadAgeCategory(FixtureError):
    pass


class MissingFixtureFile(FixtureError):
    pass


class MissingNameFallback(FixtureError):
    pass


# -------- plan --------
class PlanError(ConfigError):
    pass


class CyclicDependency(PlanError):
    def __init__(self, cycle: list):
        super().__init__("dependency cycle: " + " -> ".join(cycle))
        self.cycle = cycle


class UnknownGenerator(PlanError):
    pass


class MissingDependency(PlanError):
    pass


# -------- generation --------
class UnboundVariable(GenerationError):
    pass


class UnknownField(GenerationError):
    pass


class FixtureMissing(GenerationError):
    pass


# -------- fidelity --------
class FidelityError(ConfigError):
    pass


class UnknownColumn(FidelityError):
    pass


class UnparsableAge(FidelityError):
    pass


class EmptyHistogram(FidelityError):
    pass


class InsufficientCells(FidelityError):
    pass
