"""Exception types shared across the engine.

Every error carries a stable ``code`` string so the HTTP layer can map
engine failures to typed response bodies without string matching.
"""

from __future__ import annotations


class SoundstageError(Exception):
    """Base class for all engine errors."""

    code = "engine-error"

    def __init__(self, message: str, *, details: dict | None = None):
        super().__init__(message)
        self.details = details or {}


class NotFoundError(SoundstageError):
    code = "not-found"


class DurationMismatchError(SoundstageError):
    code = "duration-mismatch"


class EmptyInputError(SoundstageError):
    code = "empty-input"


class DegenerateInputError(SoundstageError):
    code = "degenerate-input"


class InsufficientDataError(SoundstageError):
    code = "insufficient-data"


class ShapeError(SoundstageError):
    code = "shape-mismatch"


class PreconditionError(SoundstageError):
    code = "precondition-failed"


class ArityError(SoundstageError):
    code = "bad-arity"


class ExpansionFailedError(SoundstageError):
    code = "expansion-failed"


class AnalysisFailedError(SoundstageError):
    """Raised when a provider response violates a schema rule after retries.

    ``rule`` names the first violated rule (e.g. ``fit.reasons.word_count``).
    """

    code = "analysis-failed"

    def __init__(self, message: str, *, rule: str = "", details: dict | None = None):
        super().__init__(message, details=details)
        self.rule = rule


class RefineFailedError(AnalysisFailedError):
    code = "refine-failed"


class TemplateError(SoundstageError):
    code = "template-error"


class AnchorExtractionError(SoundstageError):
    code = "anchor-extraction-failed"


class ThumbnailError(SoundstageError):
    code = "thumbnail-failed"


class AnimationError(SoundstageError):
    code = "animation-failed"


class UnsupportedCapabilityError(SoundstageError):
    code = "unsupported-capability"


class FadeTooLongError(SoundstageError):
    code = "fade-too-long"


class InsufficientAudioError(SoundstageError):
    code = "insufficient-audio"


class UnsupportedFormatError(SoundstageError):
    code = "unsupported-format"


class TransportError(SoundstageError):
    """Network-layer failure from a provider adapter."""

    code = "transport-error"


class ProviderTimeoutError(TransportError):
    code = "provider-timeout"


class AuthError(TransportError):
    code = "auth-failed"


class QuotaError(TransportError):
    code = "quota-exceeded"


class ContentPolicyError(TransportError):
    code = "content-policy"
