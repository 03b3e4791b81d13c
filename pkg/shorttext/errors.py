"""
Exception hierarchy for the package
"""


class ShortTextError(Exception):
    """Base class for every error raised by shorttext"""


class DimensionError(ShortTextError, ValueError):
    """Operand shapes do not agree"""

    def __init__(self, op, *shapes):
        self.op = op
        self.shapes = tuple(tuple(s) for s in shapes)
        described = " and ".join(str(s) for s in self.shapes)
        super().__init__(f"{op}: incompatible shapes {described}")


class ContractError(ShortTextError, ValueError):
    """A documented precondition was violated"""


class EvaluationError(ShortTextError, ArithmeticError):
    """A function produced a non-finite value"""


class VocabularyError(ShortTextError, LookupError):
    """Vocabulary construction, lookup or file problems"""


class ConfigError(ShortTextError, ValueError):
    """Invalid or unknown configuration"""

    def __init__(self, message, fields=None):
        self.fields = dict(fields or {})
        super().__init__(message)


class DataError(ShortTextError):
    """Dataset files or contents are unusable"""


class CheckpointError(ShortTextError):
    """A checkpoint file could not be read"""


class CheckpointVersionError(CheckpointError):
    """A checkpoint was written by an unsupported format version"""

    def __init__(self, found, supported):
        self.found = found
        self.supported = tuple(supported)
        accepted = ", ".join(str(v) for v in self.supported)
        super().__init__(
            f"Unsupported checkpoint format version {found}; supported versions: {accepted}"
        )


class TrainingDivergedError(ShortTextError, ArithmeticError):
    """Training produced a non-finite loss"""

    def __init__(self, epoch, batch, value):
        self.epoch = epoch
        self.batch = batch
        self.value = value
        super().__init__(f"Non-finite loss {value!r} at epoch {epoch}, batch {batch}")
