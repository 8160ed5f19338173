"""Exception hierarchy shared across the toolkit."""

from __future__ import annotations


class PertextError(Exception):
    """Base class for every domain error raised by this package."""


class MalformedLine(PertextError):
    """A corpus or dataset line that does not match the expected format."""

    def __init__(self, line_no: int, reason: str = "expected 'word<TAB>tag'") -> None:
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


class InvalidEncoding(PertextError):
    """Input bytes that do not decode as UTF-8."""

    def __init__(self, byte_offset: int) -> None:
        super().__init__(f"invalid UTF-8 at byte offset {byte_offset}")
        self.byte_offset = byte_offset


class EmptyDataset(PertextError):
    pass


class EmptyTrainingSet(PertextError):
    pass


class MixedTasks(PertextError):
    pass


class LengthMismatch(PertextError):
    pass


class EmptySequences(PertextError):
    pass


class UnsupportedVersion(PertextError):
    pass


class CorruptModel(PertextError):
    pass


class TransportError(PertextError):
    """The remote endpoint could not be reached or died mid-conversation."""


class Timeout(PertextError):
    """The remote endpoint did not answer within the configured window."""


class ProtocolError(PertextError):
    """The remote endpoint answered, but not in protocol-v1 shape."""

    def __init__(self, reason: str) -> None:
        super().__init__(reason)
        self.reason = reason


class RemoteError(PertextError):
    """The remote endpoint reported a failure of its own."""

    def __init__(self, message: str) -> None:
        super().__init__(message)
        self.message = message


class StageError(PertextError):
    """A pipeline stage failed; carries the stage name and the original error."""

    def __init__(self, stage: str, cause: Exception) -> None:
        super().__init__(f"{stage} stage failed: {cause}")
        self.stage = stage
        self.cause = cause
