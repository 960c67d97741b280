"""Exception hierarchy shared by every subsystem."""


class SnapSearchError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(SnapSearchError, ValueError):
    """A record could not be parsed; carries the file and line number."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}:{line}: " if line is not None else f"{path}: "
        super().__init__(f"{where}{message}")


class IntegrityError(SnapSearchError, ValueError):
    """Data violates a uniqueness, ordering or range invariant."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}:{line}: " if line is not None else f"{path}: "
        super().__init__(f"{where}{message}")


class CodecError(SnapSearchError, ValueError):
    """Malformed or truncated variable-byte stream."""


class UndefinedRatioError(SnapSearchError, ValueError):
    pass


class ParameterError(SnapSearchError, ValueError):
    pass


class OutOfRangeError(SnapSearchError, ValueError):
    """A model was evaluated outside its valid year range, or a log range exceeds head."""


class UnsupportedModeError(SnapSearchError):
    pass


class ShardUnavailableError(SnapSearchError):
    def __init__(self, shard_id):
        self.shard_id = shard_id
        super().__init__(f"shard {shard_id} has no available replica")


class InfeasibleBudgetError(SnapSearchError, ValueError):
    pass


class OrderingError(SnapSearchError, ValueError):
    pass


class AppendError(SnapSearchError, OSError):
    pass


class ChecksumError(SnapSearchError):
    def __init__(self, seq, message="checksum mismatch"):
        self.seq = seq
        super().__init__(f"record {seq}: {message}")


class SequenceError(SnapSearchError, ValueError):
    pass


class LogIntegrityError(IntegrityError):
    pass


class ArchiveUnavailableError(SnapSearchError):
    pass


class EstimationError(SnapSearchError):
    pass


class ComparabilityError(SnapSearchError, ValueError):
    pass
