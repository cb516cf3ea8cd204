"""Exception hierarchy.

Everything raised on purpose by this package derives from ``EmbedVizError``.
``DataError`` marks problems with the input data (the CLI maps these to exit
code 2); plain ``ValueError`` subclasses mark bad arguments.
"""


class EmbedVizError(Exception):
    pass


class DataError(EmbedVizError, ValueError):
    pass


class MissingFile(DataError, FileNotFoundError):
    pass


class BadLabel(DataError):
    def __init__(self, row, value=None):
        self.row = row
        self.value = value
        msg = f"row {row}: label must be -1 or +1"
        if value is not None:
            msg += f", got {value!r}"
        super().__init__(msg)


class NonNumericFeature(DataError):
    def __init__(self, row, col, value=None):
        self.row = row
        self.col = col
        self.value = value
        super().__init__(f"row {row}, column {col!r}: non-numeric or non-finite value {value!r}")


class SingleClass(DataError):
    pass


class InsufficientMinority(DataError):
    pass


class LengthMismatch(DataError):
    pass


class DimensionMismatch(DataError):
    pass


class BadFraction(EmbedVizError, ValueError):
    pass


class PreconditionError(EmbedVizError, ValueError):
    pass


class DegenerateRow(EmbedVizError, ValueError):
    def __init__(self, row=None):
        self.row = row
        where = "" if row is None else f" {row}"
        super().__init__(f"row{where}: all squared distances are zero")


class DegenerateError(EmbedVizError, ValueError):
    pass


class NonFinite(EmbedVizError, FloatingPointError):
    pass


class StageError(EmbedVizError):
    """Wraps an error raised inside a pipeline stage with the stage name."""

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"[{stage}] {type(cause).__name__}: {cause}")
