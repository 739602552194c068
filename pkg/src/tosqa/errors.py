"""Exception types shared across the package."""


class TosQaError(Exception):
    """Base class for all package errors."""


# --- crawling ---

class UnparseableHtml(TosQaError):
    """Input could not be decoded as text; lenient parsing never raises otherwise."""


class EmptyContent(TosQaError):
    """Cleaning left fewer than 20 non-whitespace characters."""


class SeedUnreachable(TosQaError):
    """The seed URL could not be fetched."""


class NoContent(TosQaError):
    """Every crawled page was skipped; nothing to merge."""


# --- embedding / backends ---

class EmptyText(TosQaError):
    """Text yields no word tokens (or a degenerate zero vector)."""


class BackendUnavailable(TosQaError):
    """An external model endpoint could not be reached or returned garbage."""


class DimensionMismatch(TosQaError):
    """Vector dimensions disagree."""


# --- question answering ---

class EmptyIndex(TosQaError):
    """Retrieval was attempted against an index with no entries."""


# --- storage ---

class StorageFailure(TosQaError):
    """A store read or write failed."""


class InvalidUrl(TosQaError):
    """A URL is not an absolute http(s) URL."""


# --- evaluation ---

class TooFewPoints(TosQaError):
    """k-means requires at least k points."""


class StatementTooShort(TosQaError):
    """Question generation needs at least 4 word tokens."""


class UnlabeledCluster(TosQaError):
    """A topic labeling does not cover every cluster."""
