"""Exception types shared across the package."""


class RedtraceError(Exception):
    """Base class for all package-specific errors."""


class EmptyTraceError(RedtraceError):
    """Raised when a trace is empty or whitespace-only."""


class NonNumericAnswerError(RedtraceError):
    """Raised when no numeric literal remains after answer normalization."""


class ParameterDomainError(RedtraceError):
    """Raised when a metric or penalty parameter is outside its domain."""


class ZeroLengthTraceError(RedtraceError):
    """Raised when a length ratio is requested for a zero-length trace."""


class EmbeddingError(RedtraceError):
    """Base class for embedding-backend failures."""


class EmptySegmentError(EmbeddingError):
    """Raised when a segment submitted for embedding is empty after trimming."""


class BackendUnavailableError(EmbeddingError):
    """Raised when the embedding backend stays unreachable after all retries."""


class DimensionMismatchError(EmbeddingError):
    """Raised when vectors of different dimensions are combined."""


class ZeroVectorError(EmbeddingError):
    """Raised when cosine similarity is requested for a zero vector."""
