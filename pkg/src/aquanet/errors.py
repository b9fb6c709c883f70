"""Exception hierarchy shared across the toolkit."""


class AquanetError(Exception):
    """Base class for every error raised by aquanet."""


class DimensionError(AquanetError, ValueError):
    """Operand shapes do not agree."""


class EmptyInputError(AquanetError, ValueError):
    """An operation received an empty sequence or dataset."""


class DomainError(AquanetError, ValueError):
    """A scalar argument lies outside its legal domain."""


class UnsupportedActivationError(AquanetError, ValueError):
    """Raised when a derivative is requested for an activation fused elsewhere."""


class ConsistencyError(AquanetError, ValueError):
    """Two objects that must describe the same thing disagree."""


class ConfigError(AquanetError, ValueError):
    """Invalid configuration or search space."""


class SchemaError(AquanetError, ValueError):
    """Input table is missing a required column."""

    def __init__(self, column: str, message: str | None = None):
        self.column = column
        super().__init__(message or f"missing required column: {column}")


class ParseError(AquanetError, ValueError):
    """A cell in an input file could not be parsed."""

    def __init__(self, line: int, column: str, value: str):
        self.line = line
        self.column = column
        self.value = value
        super().__init__(f"line {line}: cannot parse {column}={value!r} as a number")


class GenerationError(AquanetError, RuntimeError):
    """Synthetic generator could not satisfy its class-coverage contract."""


class UndefinedAUCError(AquanetError, ValueError):
    """AUC is undefined because only one class is present."""


class DivergenceError(AquanetError, ArithmeticError):
    """Training produced a non-finite loss."""

    def __init__(self, epoch: int, loss: float):
        self.epoch = epoch
        self.loss = loss
        super().__init__(f"loss became non-finite ({loss}) at epoch {epoch}")


class ModelFormatError(AquanetError, ValueError):
    """A serialized model could not be decoded or has the wrong version."""


class FileError(AquanetError, OSError):
    """Writing an output artifact failed."""

    def __init__(self, path, reason: str):
        self.path = str(path)
        super().__init__(f"{path}: {reason}")
