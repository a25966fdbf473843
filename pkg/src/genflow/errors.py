"""Exception types shared across the engine."""


class GenFlowError(Exception):
    """Base class for all engine errors."""


class MalformedDocument(GenFlowError):
    """Workflow document is not valid JSON / UTF-8."""


class SchemaViolation(GenFlowError):
    """Workflow document violates the canonical schema."""


class CycleDetected(GenFlowError):
    """The connection graph contains a cycle."""


class ExecutorFailure(GenFlowError):
    def __init__(self, node_id: str, cause: Exception | str):
        super().__init__(f"executor failed at node {node_id!r}: {cause}")
        self.node_id = node_id
        self.cause = cause


class MissingInputFile(GenFlowError):
    """A file referenced by a node does not exist in the workspace."""


class EmbedderUnavailable(GenFlowError):
    """Remote embedding provider could not be reached."""


class DimensionMismatch(GenFlowError):
    """Embedding dimension does not match the index dimension."""


class ZeroVector(GenFlowError):
    """Cosine similarity is undefined for a non-normalizable vector."""


class EmptyQueryAfterCleaning(GenFlowError):
    """Query text is empty once preprocessed."""


class RegistryCorrupt(GenFlowError):
    """Asset registry file failed its per-line integrity check."""


class ChecksumMismatch(GenFlowError):
    """Fetched bytes do not hash to the declared checksum."""


class FetchFailure(GenFlowError):
    """Fetcher could not produce the asset bytes."""


class PathEscape(GenFlowError):
    """Asset save path attempts to leave the managed root."""
