import re
import warnings

import pytest

from sap_exporter.parsing import ParsedWord

warnings.filterwarnings("ignore", module="transformers")

WORD_VOCAB = ["the", "cat", "sat", "on", "mat", "dog", "ran", "fast", "big"]
PIECED = {"playing": ["play", "##ing"], "runner": ["run", "##ner"]}
LABEL_CYCLE = ["det", "nsubj", "obj", "amod", "advmod", "case"]


def build_tokenizer():
    from tokenizers import Tokenizer, models, normalizers, pre_tokenizers, processors
    from transformers import BertTokenizerFast

    tokens = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"] + WORD_VOCAB
    for pieces in PIECED.values():
        tokens.extend(pieces)
    vocab = {tok: i for i, tok in enumerate(tokens)}
    backend = Tokenizer(models.WordPiece(vocab=vocab, unk_token="[UNK]"))
    backend.normalizer = normalizers.BertNormalizer(lowercase=True)
    backend.pre_tokenizer = pre_tokenizers.BertPreTokenizer()
    backend.post_processor = processors.TemplateProcessing(
        single="[CLS] $A [SEP]",
        pair="[CLS] $A [SEP] $B [SEP]",
        special_tokens=[("[CLS]", vocab["[CLS]"]), ("[SEP]", vocab["[SEP]"])],
    )
    return BertTokenizerFast(
        tokenizer_object=backend,
        unk_token="[UNK]",
        pad_token="[PAD]",
        cls_token="[CLS]",
        sep_token="[SEP]",
        mask_token="[MASK]",
    )


@pytest.fixture(scope="session")
def tiny_encoder():
    import torch
    from transformers import BertConfig, BertModel

    from sap_exporter.encoding import HuggingFaceEncoder

    tokenizer = build_tokenizer()
    config = BertConfig(
        vocab_size=tokenizer.vocab_size,
        hidden_size=16,
        num_hidden_layers=2,
        num_attention_heads=2,
        intermediate_size=32,
        max_position_embeddings=128,
        attn_implementation="eager",
    )
    torch.manual_seed(7)
    model = BertModel(config).eval()
    return HuggingFaceEncoder(model, tokenizer)


class ChainParser:
    """Deterministic stand-in parser: whitespace words, left-headed chain.

    Words containing an apostrophe are split two characters in, which a
    WordPiece tokenizer never does, so such sentences are guaranteed to
    be un-alignable (exercises the skip path).
    """

    def __call__(self, text):
        spans = []
        for match in re.finditer(r"\S+", text):
            word, start = match.group(), match.start()
            if "'" in word and len(word) > 3:
                spans.append((word[:2], start, start + 2))
                spans.append((word[2:], start + 2, start + len(word)))
            else:
                spans.append((word, start, start + len(word)))
        words = []
        for i, (word, start, end) in enumerate(spans):
            head = 0 if i == 0 else i  # 1-based previous word
            label = "root" if i == 0 else LABEL_CYCLE[i % len(LABEL_CYCLE)]
            words.append(ParsedWord(word, start, end, head, label))
        return words


@pytest.fixture(scope="session")
def chain_parser():
    return ChainParser()
