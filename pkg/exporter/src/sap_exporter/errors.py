"""Exporter error types."""


class ExportError(Exception):
    """Base class for exporter failures."""


class AlignmentFailure(ExportError):
    """Parser words and model subwords cannot be reconciled."""


class SentenceSkipped(ExportError):
    """This sentence cannot be exported; carries the skip reason."""

    def __init__(self, reason: str, detail: str = ""):
        super().__init__(f"{reason}: {detail}" if detail else reason)
        self.reason = reason


class BackendUnavailable(ExportError):
    """An optional backend (spaCy, datasets) is not installed."""
