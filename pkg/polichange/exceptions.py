"""Exception hierarchy shared by all polichange modules.

Each error class carries the process exit code the CLI reports for it.
"""

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_DEGENERATE = 4


class PolichangeError(Exception):
    """Base class for all polichange errors."""

    exit_code: int = EXIT_DATA


class ArgumentError(PolichangeError, ValueError):
    """An operation was called outside its preconditions."""

    exit_code = EXIT_USAGE


class ConfigurationError(PolichangeError):
    """A schema, dictionary or pipeline configuration is unusable."""

    exit_code = EXIT_USAGE


class DataParseError(PolichangeError):
    """An input file could not be parsed.

    Attributes:
        row_number: 1-based data row that failed, when known.
    """

    exit_code = EXIT_DATA

    def __init__(self, message: str, row_number: int | None = None):
        super().__init__(message)
        self.row_number = row_number


class DegenerateInputError(PolichangeError):
    """A statistic is undefined for the given input (e.g. a constant series)."""

    exit_code = EXIT_DEGENERATE


class PipelineStageError(PolichangeError):
    """An error raised inside a named pipeline stage.

    Attributes:
        stage: Name of the stage that failed.
        cause: The original exception.
    """

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause
        if isinstance(cause, PolichangeError):
            self.exit_code = cause.exit_code
        else:
            self.exit_code = EXIT_DATA
