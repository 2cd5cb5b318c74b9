"""File-format behaviour: CoNLL-U, attention binaries, mask JSON."""

import io
import json
import struct

import numpy as np
import pytest
from hypothesis import given
import hypothesis.strategies as st

import strategies
from sap.errors import (
    AlignmentSpanError,
    BadMagicError,
    ConlluParseError,
    FormatError,
    HeaderError,
    MaskFormatError,
    PairMismatchError,
    RowSumError,
    TruncatedPayloadError,
    ValidationError,
)
from sap.formats import (
    ATTENTION_MAGIC,
    AttentionRecord,
    DepArc,
    ParsedSentence,
    PruneMask,
    Token,
    WordAlignment,
    read_attention,
    read_conllu,
    read_mask,
    validate_pair,
    write_attention,
    write_conllu,
    write_mask,
)

I_LAUGHED = b"""# sent_id = ex1
1\tI\t_\t_\t_\t_\t2\tnsubj\t_\t_
2\tlaughed\t_\t_\t_\t_\t0\troot\t_\t_
"""

UD_SAMPLE = b"""# sent_id = a
# text = the cat sleeps
1\tthe\tthe\tDET\tDT\t_\t2\tdet\t_\t_
2\tcat\tcat\tNOUN\tNN\t_\t3\tnsubj\t_\t_
3\tsleeps\tsleep\tVERB\tVBZ\t_\t0\troot\t_\t_

# sent_id = b
1\tdogs\tdog\tNOUN\tNNS\t_\t2\tnsubj:pass\t_\t_
2\tchased\tchase\tVERB\tVBD\t_\t0\troot\t_\t_
3-4\tcannot\t_\t_\t_\t_\t_\t_\t_\t_
3\tcan\tcan\tAUX\tMD\t_\t2\taux\t_\t_
4\tnot\tnot\tPART\tRB\t_\t2\tadvmod\t_\t_

# sent_id = c
1\tbirds\tbird\tNOUN\tNNS\t_\t2\tnsubj\t_\t_
2\tsing\tsing\tVERB\tVBP\t_\t0\troot\t_\t_
2.1\tloudly\tloud\tADV\tRB\t_\t_\t_\t_\t_
"""


class TestReadConllu:
    def test_two_token_sentence(self):
        sentences = read_conllu(I_LAUGHED)
        assert len(sentences) == 1
        s = sentences[0]
        assert s.sentence_id == "ex1"
        assert [t.surface for t in s.tokens] == ["I", "laughed"]
        assert set(s.arcs) == {DepArc(0, 2, "root"), DepArc(2, 1, "nsubj")}

    def test_empty_input(self):
        assert read_conllu(b"") == []
        assert read_conllu(b"\n\n# only a comment\n\n") == []

    def test_ud_sample_roundtrip(self):
        first = read_conllu(UD_SAMPLE)
        again = read_conllu(write_conllu(first))
        assert again == first
        assert [s.sentence_id for s in first] == ["a", "b", "c"]

    def test_subtype_stripped_and_special_ids_skipped(self):
        sentences = read_conllu(UD_SAMPLE)
        b = sentences[1]
        assert [t.surface for t in b.tokens] == ["dogs", "chased", "can", "not"]
        assert DepArc(2, 1, "nsubj") in b.arcs  # nsubj:pass stripped
        c = sentences[2]
        assert len(c.tokens) == 2  # 2.1 empty node skipped

    def test_missing_sent_id_gets_ordinal(self):
        text = b"1\thi\t_\t_\t_\t_\t0\troot\t_\t_\n"
        assert read_conllu(text)[0].sentence_id == "s1"

    def test_file_like_source(self):
        assert len(read_conllu(io.BytesIO(UD_SAMPLE))) == 3

    @pytest.mark.parametrize(
        "body,line,fragment",
        [
            (b"1\thi\t_\t_\t0\troot\t_\t_\n", 1, "10 columns"),
            (b"1\thi\t_\t_\t_\t_\tx\troot\t_\t_\n", 1, "non-numeric HEAD"),
            (b"1\thi\t_\t_\t_\t_\t0\troot\t_\t_\n2\tho\t_\t_\t_\t_\t5\tdet\t_\t_\n", 2, "no token"),
            (
                b"1\thi\t_\t_\t_\t_\t0\troot\t_\t_\n1\tho\t_\t_\t_\t_\t1\tdet\t_\t_\n",
                2,
                "duplicate",
            ),
        ],
    )
    def test_parse_errors_carry_line_numbers(self, body, line, fragment):
        with pytest.raises(ConlluParseError) as err:
            read_conllu(body)
        assert err.value.line == line
        assert fragment in str(err.value)

    def test_two_roots_rejected(self):
        text = b"1\thi\t_\t_\t_\t_\t0\troot\t_\t_\n2\tho\t_\t_\t_\t_\t0\troot\t_\t_\n"
        with pytest.raises(ConlluParseError):
            read_conllu(text)

    def test_self_head_rejected(self):
        text = b"1\thi\t_\t_\t_\t_\t0\troot\t_\t_\n2\tho\t_\t_\t_\t_\t2\tdet\t_\t_\n"
        with pytest.raises(ConlluParseError) as err:
            read_conllu(text)
        assert err.value.line == 2

    def test_non_contiguous_ids_rejected(self):
        text = b"1\thi\t_\t_\t_\t_\t0\troot\t_\t_\n3\tho\t_\t_\t_\t_\t1\tdet\t_\t_\n"
        with pytest.raises(ConlluParseError):
            read_conllu(text)


class TestWriteConllu:
    def test_non_tree_sentence_rejected(self):
        # token 2 has no incoming arc: fine as a value, not emittable
        s = ParsedSentence(
            "x",
            (Token(1, "a"), Token(2, "b")),
            (DepArc(0, 1, "root"),),
        )
        with pytest.raises(FormatError):
            write_conllu([s])


def _attention_bytes(layers, heads, n, header: dict, floats) -> bytes:
    blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode()
    return (
        ATTENTION_MAGIC
        + struct.pack("<III", layers, heads, n)
        + struct.pack("<I", len(blob))
        + blob
        + np.asarray(floats, dtype="<f4").tobytes()
    )


class TestAttentionFormat:
    def test_minimal_wire_format(self):
        data = _attention_bytes(
            1,
            1,
            2,
            {"sentence_id": "t", "spans": [[0, 1], [1, 2]], "masked_heads": []},
            [0.6, 0.4, 0.3, 0.7],
        )
        record = read_attention(data)
        assert record.layers == 1 and record.heads_per_layer == 1
        assert record.model_token_count == 2
        assert record.values[0, 0].reshape(-1).tolist() == pytest.approx(
            [0.6, 0.4, 0.3, 0.7]
        )
        assert write_attention(record) == data

    def test_row_sum_violation(self):
        data = _attention_bytes(
            1,
            1,
            2,
            {"sentence_id": "t", "spans": [[0, 1], [1, 2]], "masked_heads": []},
            [0.9, 0.6, 0.3, 0.7],
        )
        with pytest.raises(RowSumError):
            read_attention(data)

    def test_bad_magic(self):
        with pytest.raises(BadMagicError):
            read_attention(b"NOTMAGIC" + b"\x00" * 32)

    def test_truncated_payload(self):
        data = _attention_bytes(
            1,
            1,
            2,
            {"sentence_id": "t", "spans": [[0, 2]], "masked_heads": []},
            [0.6, 0.4, 0.3, 0.7],
        )
        with pytest.raises(TruncatedPayloadError):
            read_attention(data[:-4])

    def test_trailing_bytes_rejected(self):
        data = _attention_bytes(
            1,
            1,
            2,
            {"sentence_id": "t", "spans": [[0, 2]], "masked_heads": []},
            [0.6, 0.4, 0.3, 0.7],
        )
        with pytest.raises(FormatError):
            read_attention(data + b"x")

    def test_bad_header(self):
        blob = b"not json"
        data = (
            ATTENTION_MAGIC
            + struct.pack("<III", 1, 1, 1)
            + struct.pack("<I", len(blob))
            + blob
            + np.asarray([1.0], dtype="<f4").tobytes()
        )
        with pytest.raises(HeaderError):
            read_attention(data)

    def test_spans_beyond_tokens_rejected(self):
        data = _attention_bytes(
            1,
            1,
            2,
            {"sentence_id": "t", "spans": [[0, 3]], "masked_heads": []},
            [0.6, 0.4, 0.3, 0.7],
        )
        with pytest.raises(AlignmentSpanError):
            read_attention(data)

    def test_masked_head_rows_must_be_zero(self):
        with pytest.raises(ValidationError):
            AttentionRecord(
                "t",
                np.full((1, 1, 2, 2), 0.5, dtype=np.float32),
                WordAlignment(((0, 2),)),
                masked_heads=frozenset({(0, 0)}),
            )

    def test_masked_head_record_roundtrips(self):
        values = np.zeros((1, 2, 2, 2), dtype=np.float32)
        values[0, 1] = [[0.25, 0.75], [0.5, 0.5]]
        record = AttentionRecord(
            "t", values, WordAlignment(((0, 1), (1, 2))), masked_heads=frozenset({(0, 0)})
        )
        assert read_attention(write_attention(record)) == record

    def test_zero_layer_record_rejected(self):
        with pytest.raises(ValidationError):
            AttentionRecord(
                "t", np.zeros((0, 1, 2, 2), dtype=np.float32), WordAlignment(((0, 2),))
            )

    def test_values_outside_unit_interval_rejected(self):
        values = np.array([[[[1.2, -0.2], [0.5, 0.5]]]], dtype=np.float32)
        with pytest.raises(ValidationError):
            AttentionRecord("t", values, WordAlignment(((0, 2),)))


class TestDomainTypes:
    def test_token_invariants(self):
        with pytest.raises(ValidationError):
            Token(0, "x")
        with pytest.raises(ValidationError):
            Token(1, "")

    def test_arc_invariants(self):
        with pytest.raises(ValidationError):
            DepArc(3, 3, "det")
        with pytest.raises(ValidationError):
            DepArc(1, 2, "DET")

    def test_sentence_needs_exactly_one_root(self):
        tokens = (Token(1, "a"), Token(2, "b"))
        with pytest.raises(ValidationError):
            ParsedSentence("x", tokens, (DepArc(2, 1, "det"),))
        with pytest.raises(ValidationError):
            ParsedSentence(
                "x", tokens, (DepArc(0, 1, "root"), DepArc(0, 2, "root"))
            )

    def test_sentence_arc_bounds(self):
        tokens = (Token(1, "a"),)
        with pytest.raises(ValidationError):
            ParsedSentence("x", tokens, (DepArc(0, 2, "root"),))

    def test_alignment_invariants(self):
        with pytest.raises(AlignmentSpanError):
            WordAlignment(())
        with pytest.raises(AlignmentSpanError):
            WordAlignment(((0, 0),))
        with pytest.raises(AlignmentSpanError):
            WordAlignment(((0, 2), (1, 3)))

    def test_validate_pair(self):
        s = ParsedSentence("x", (Token(1, "a"),), (DepArc(0, 1, "root"),))
        values = np.full((1, 1, 1, 1), 1.0, dtype=np.float32)
        good = AttentionRecord("x", values, WordAlignment(((0, 1),)))
        validate_pair(s, good)
        with pytest.raises(PairMismatchError):
            validate_pair(s, AttentionRecord("y", values, WordAlignment(((0, 1),))))
        two_words = AttentionRecord(
            "x",
            np.full((1, 1, 2, 2), 0.5, dtype=np.float32),
            WordAlignment(((0, 1), (1, 2))),
        )
        with pytest.raises(PairMismatchError):
            validate_pair(s, two_words)


class TestMaskFormat:
    def test_exact_serialization(self):
        mask = PruneMask(12, 12, frozenset({(0, 1), (2, 3)}))
        doc = json.loads(write_mask(mask))
        assert doc == {
            "layers": 12,
            "heads_per_layer": 12,
            "pruned_heads": [[0, 1], [2, 3]],
            "pruned_layers": [],
        }

    def test_empty_mask(self):
        doc = json.loads(write_mask(PruneMask.empty(2, 2)))
        assert doc["pruned_heads"] == [] and doc["pruned_layers"] == []

    def test_fully_pruned_layer_listed(self):
        heads = frozenset((5, h) for h in range(12))
        mask = PruneMask(12, 12, heads, frozenset({5}))
        doc = json.loads(write_mask(mask))
        assert doc["pruned_layers"] == [5]
        assert read_mask(write_mask(mask)) == mask

    def test_out_of_range_rejected(self):
        with pytest.raises(ValidationError):
            read_mask(
                json.dumps(
                    {
                        "layers": 2,
                        "heads_per_layer": 2,
                        "pruned_heads": [[5, 0]],
                        "pruned_layers": [],
                    }
                )
            )

    def test_layer_without_all_heads_rejected(self):
        with pytest.raises(ValidationError):
            read_mask(
                json.dumps(
                    {
                        "layers": 2,
                        "heads_per_layer": 2,
                        "pruned_heads": [[0, 0]],
                        "pruned_layers": [0],
                    }
                )
            )

    def test_not_json_rejected(self):
        with pytest.raises(MaskFormatError):
            read_mask(b"{broken")
        with pytest.raises(MaskFormatError):
            read_mask(b"[1, 2]")
        with pytest.raises(MaskFormatError):
            read_mask(b'{"layers": 2}')


class TestRoundTripProperties:
    @given(strategies.parsed_sentences(max_tokens=7))
    def test_conllu_roundtrip(self, sentence):
        assert read_conllu(write_conllu([sentence])) == [sentence]

    @given(st.data())
    def test_attention_roundtrip(self, data):
        sentence = data.draw(strategies.parsed_sentences())
        record = data.draw(strategies.records_for(sentence, 2, 2, with_masks=True))
        assert read_attention(write_attention(record)) == record

    @given(strategies.prune_masks())
    def test_mask_roundtrip(self, mask):
        assert read_mask(write_mask(mask)) == mask
