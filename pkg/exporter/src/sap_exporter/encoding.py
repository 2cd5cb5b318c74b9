"""Encoder backends: run text through a transformer, keep the attention.

An encoder maps sentence text to the per-layer, per-head attention
tensor over its own subword tokens, plus each token's character offsets
and a special-token mask. Offsets are what ties model tokens back to
parser words.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class EncodedSentence:
    values: np.ndarray  # (layers, heads, n, n) float32 attention
    offsets: tuple[tuple[int, int], ...]  # per model token, chars into text
    special: tuple[bool, ...]  # True for [CLS], [SEP], padding-like tokens

    @property
    def token_count(self) -> int:
        return self.values.shape[2]


class HuggingFaceEncoder:
    """Attention extraction from a transformers model.

    Accepts either model/tokenizer identifiers or already-constructed
    objects (the tokenizer must be a fast tokenizer so character offsets
    are available).
    """

    def __init__(self, model, tokenizer):
        import torch
        from transformers import AutoModel, AutoTokenizer

        self._torch = torch
        if isinstance(model, str):
            # eager attention: sdpa kernels cannot return attention maps
            model = AutoModel.from_pretrained(model, attn_implementation="eager")
        elif getattr(model.config, "_attn_implementation", "eager") != "eager":
            model.set_attn_implementation("eager")
        if isinstance(tokenizer, str):
            tokenizer = AutoTokenizer.from_pretrained(tokenizer, use_fast=True)
        if not getattr(tokenizer, "is_fast", False):
            raise ValueError("a fast tokenizer is required for character offsets")
        self.model = model.eval()
        self.tokenizer = tokenizer

    def __call__(self, text: str) -> EncodedSentence:
        encoding = self.tokenizer(
            text,
            return_tensors="pt",
            return_offsets_mapping=True,
            return_special_tokens_mask=True,
            truncation=False,
        )
        offsets = [tuple(map(int, pair)) for pair in encoding.pop("offset_mapping")[0]]
        special = [bool(int(v)) for v in encoding.pop("special_tokens_mask")[0]]
        with self._torch.no_grad():
            output = self.model(**encoding, output_attentions=True)
        stacked = self._torch.stack(output.attentions, dim=0)[:, 0]  # (L, H, n, n)
        values = stacked.to(self._torch.float32).cpu().numpy()
        return EncodedSentence(values, tuple(offsets), tuple(special))
