"""Exception types shared across the package."""


class CorpusError(ValueError):
    """Corpus file or record violates the corpus schema."""


class ScorerError(RuntimeError):
    """Base class for scoring failures."""


class ProtocolError(ScorerError):
    """A backend replied with something outside its wire contract."""


class TransportError(ScorerError):
    """A backend was unreachable or timed out; retriable."""


class CoverageGapError(ValueError):
    """A pair required by an operation has no covering record or judgment."""


class ConfigError(ValueError):
    """Run configuration is invalid or references missing resources."""
