"""Exception types shared across the package."""


class RaggateError(Exception):
    """Base class for all library errors."""


# -- corpus ---------------------------------------------------------------

class EmptyDocument(RaggateError):
    """Document body tokenizes to zero tokens."""


class BadTimestamp(RaggateError):
    """Timestamp field does not parse as 'YYYY-MM-DD HH:MM:SS'."""


class TooFewFields(RaggateError):
    """Legacy record has fewer than two ';'-separated fields."""


# -- linear algebra / encoder --------------------------------------------

class DimensionMismatch(RaggateError):
    """Vector or matrix dimensions do not agree."""


class NonFiniteUpdate(RaggateError):
    """A training step produced non-finite encoder parameters."""

    def __init__(self, epoch: int, message: str = ""):
        self.epoch = epoch
        super().__init__(message or f"non-finite parameters after epoch {epoch}")


# -- index ----------------------------------------------------------------

class DuplicateChunkId(RaggateError):
    """Chunk id already present in the index."""


class BadSnapshot(RaggateError):
    """Index or model snapshot file is malformed."""


# -- gate -----------------------------------------------------------------

class EmptyHoldout(RaggateError):
    """Threshold calibration received no (query, positive) pairs."""


class WebSearchFailed(RaggateError):
    """The web search client raised while searching."""


# -- evaluation -------------------------------------------------------------

class EmptyRelevantSet(RaggateError):
    """A query was judged with no relevant chunks."""


class MissingChunk(RaggateError):
    """A judged chunk id does not exist in the benchmark corpus."""


# -- transport (web search / generation backends) -------------------------

class FetchFailed(RaggateError):
    """A page fetch failed (unknown url, network error, bad status)."""


class BadFixtureFormat(RaggateError):
    """Fixture directory does not match the documented layout."""


class BackendTimeout(RaggateError):
    """Remote call exceeded its timeout (after any retries)."""


class NonSuccessStatus(RaggateError):
    """Remote call returned a non-2xx HTTP status."""

    def __init__(self, status: int, message: str = ""):
        self.status = status
        super().__init__(message or f"unexpected HTTP status {status}")


class MalformedResponse(RaggateError):
    """Remote call returned a body that does not match the documented schema."""
