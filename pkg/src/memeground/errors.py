"""Domain exceptions shared across pipeline stages.

Everything raised on purpose by this package derives from MemegroundError,
so the CLI can map domain failures to a single exit code.
"""

from __future__ import annotations


class MemegroundError(Exception):
    """Base class for all domain errors raised by this package."""


class TimestampError(MemegroundError):
    """Raw timestamp is neither epoch seconds nor a parseable ISO-8601 instant."""


class LakeError(MemegroundError):
    """Data-lake layout violation or I/O failure while reading/writing the lake."""


class NormalizationError(MemegroundError):
    """Vector cannot be normalized or violates the unit-norm contract."""


class FormatError(MemegroundError):
    """Malformed file: bad magic/version, truncation, or wrong TSV shape."""


class EmbedError(MemegroundError):
    """Invalid input to an embedder."""


class BuildError(MemegroundError):
    """Index cannot be built from the given exemplars."""


class QueryError(MemegroundError):
    """Query vector incompatible with the index."""


class ParameterError(MemegroundError):
    """Numeric parameter outside its documented range."""


class NotFoundError(MemegroundError):
    """Requested graph node does not exist or has the wrong kind."""


class JoinError(MemegroundError):
    """Join input violates its key-uniqueness precondition."""


class SelectionError(MemegroundError):
    """No sweep point satisfies the minimum-precision constraint."""


class CoverageError(MemegroundError):
    """Required per-item data (embeddings or scores) is missing for some ids."""

    def __init__(self, message: str, missing_ids: list[str] | None = None) -> None:
        super().__init__(message)
        self.missing_ids = sorted(missing_ids or [])
