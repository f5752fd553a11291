"""Exception hierarchy shared by all seizeval modules."""


class SeizevalError(Exception):
    """Base class for all errors raised by this package."""


class InvalidArgumentError(SeizevalError, ValueError):
    """An argument violates a documented precondition."""


class ChannelNotFoundError(SeizevalError, KeyError):
    """A montage pair references a channel name missing from the recording."""


class EmptyStreamError(SeizevalError):
    """The recording is shorter than a single analysis window."""


class MissingClassError(SeizevalError):
    """Balanced sampling requested but a signal-type class has no segments."""

    def __init__(self, class_name: str):
        self.class_name = class_name
        super().__init__(f"no segments available for class {class_name!r}")


class IncompatibleFeatureError(SeizevalError):
    """A detector was fed a feature tensor it cannot score."""


class DegenerateDatasetError(SeizevalError):
    """An operation requires both classes but the data contains only one."""


class FileFormatError(SeizevalError):
    """Base class for file parsing failures."""


class MalformedHeaderError(FileFormatError):
    """Recording header is missing, truncated, or has invalid fields."""


class ChannelCountMismatchError(FileFormatError):
    """Declared channel count disagrees with the channel name list."""


class TruncatedPayloadError(FileFormatError):
    """Sample payload is shorter than the header promises."""


class LabelParseError(FileFormatError):
    """A label or montage file failed to parse; carries the line number."""

    def __init__(self, line_no: int, message: str):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {message}")
