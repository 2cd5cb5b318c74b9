"""Exception types shared across the toolkit.

Every error raised on purpose by this package derives from SapError so
callers (and the CLI exit-code mapping) can distinguish failure classes
without string matching.
"""


class SapError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(SapError, ValueError):
    """A value violates a type invariant at construction time."""


class RowSumError(ValidationError):
    """An attention row does not sum to 1 within tolerance."""


class AlignmentSpanError(ValidationError):
    """Word-to-model-token spans are malformed or out of range."""


class FormatError(SapError):
    """A byte stream does not conform to one of the external formats."""


class ConlluParseError(FormatError):
    """Malformed CoNLL-U input; carries the 1-based offending line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class BadMagicError(FormatError):
    """Attention file does not start with the expected magic bytes."""


class TruncatedPayloadError(FormatError):
    """Attention file ends before the declared payload is complete."""


class HeaderError(FormatError):
    """Attention file JSON header is missing fields or unparsable."""


class MaskFormatError(FormatError):
    """Prune-mask JSON is structurally invalid."""


class PairMismatchError(SapError):
    """A sentence and an attention record do not describe the same input."""


class RankingError(SapError):
    """Dependency ranking cannot be built (e.g. k out of range)."""


class UnknownLabelError(RankingError):
    """A dependency label is absent from the ranking."""


class DegenerateCorpusError(SapError):
    """The corpus is empty or carries no usable signal (S = 0)."""


class ShapeMismatchError(SapError):
    """Attention records in one corpus disagree on layer/head counts."""


class ConfigError(SapError, ValueError):
    """A parameter is outside its documented range."""


class VocabError(SapError):
    """A token is not part of the toy model vocabulary."""


class OracleError(SapError):
    """An evaluation oracle crashed or returned an unusable metric.

    Attributes:
        head: the (layer, head) pair being evaluated when the failure
            happened, or None for the dense evaluation.
        report: partial CFReport gathered before the failure, if any.
    """

    def __init__(self, message: str, head=None, report=None):
        super().__init__(message)
        self.head = head
        self.report = report
