"""Bridge pretrained encoders and dependency parsers into the
SAPATTN1 / CoNLL-U interchange formats."""

from .align import word_spans
from .encoding import EncodedSentence, HuggingFaceEncoder
from .errors import AlignmentFailure, BackendUnavailable, ExportError, SentenceSkipped
from .export import ExportJob, Manifest, export, load_sentences
from .parsing import ParsedWord, SpacyParser, base_label
from .records import attention_bytes, conllu_block

__version__ = "0.1.0"

__all__ = [
    "AlignmentFailure",
    "BackendUnavailable",
    "EncodedSentence",
    "ExportError",
    "ExportJob",
    "HuggingFaceEncoder",
    "Manifest",
    "ParsedWord",
    "SentenceSkipped",
    "SpacyParser",
    "attention_bytes",
    "base_label",
    "conllu_block",
    "export",
    "load_sentences",
    "word_spans",
]
