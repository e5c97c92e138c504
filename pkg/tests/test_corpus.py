"""Corpus schema, parsing, serialization and filtering."""

from __future__ import annotations

import json
import unicodedata

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from literalis import CorpusFilter, SchemaError, parse_record, serialize_record, stream_filter
from literalis.corpus import (ProvenanceHeader, parse_line, read_records,
                              validate_file, write_records)

from support import make_record, minimal_line, minimal_obj


class TestParseRecord:
    def test_minimal_record_round_trips(self):
        rec = parse_record(minimal_line(), 1)
        again = parse_record(serialize_record(rec), 1)
        assert again == rec

    def test_full_record_round_trips(self):
        rec = make_record(quality=3.5, altered=True, position=None,
                          sli_counterpart_id="seg-9")
        assert parse_record(serialize_record(rec)) == rec

    def test_zero_based_alignment_rejected(self):
        line = minimal_line(alignment=[[0, 1]], pair_cos=[0.5])
        with pytest.raises(SchemaError, match="index out of bounds") as exc_info:
            parse_record(line, 12)
        assert exc_info.value.line_number == 12
        assert exc_info.value.field_name == "alignment"
        assert "line 12" in str(exc_info.value)

    def test_alignment_beyond_token_count_rejected(self):
        line = minimal_line(alignment=[[1, 4]], pair_cos=[0.5])
        with pytest.raises(SchemaError, match="index out of bounds"):
            parse_record(line, 1)

    def test_duplicate_alignment_pair_rejected(self):
        line = minimal_line(alignment=[[1, 1], [1, 1]], pair_cos=[0.5, 0.5])
        with pytest.raises(SchemaError, match="duplicate"):
            parse_record(line, 1)

    def test_pair_cos_length_mismatch(self):
        line = minimal_line(pair_cos=[0.5, 0.25, 0.125])
        with pytest.raises(SchemaError, match="length mismatch") as exc_info:
            parse_record(line, 3)
        assert exc_info.value.field_name == "pair_cos"

    def test_malformed_json_carries_line_number(self):
        with pytest.raises(SchemaError, match="malformed JSON") as exc_info:
            parse_record("{not json", 7)
        assert "line 7" in str(exc_info.value)

    @pytest.mark.parametrize("missing", ["id", "lp", "system", "task",
                                         "src_tokens", "hyp_tokens",
                                         "alignment", "pair_cos", "seg_cos"])
    def test_missing_mandatory_field_names_field(self, missing):
        obj = minimal_obj()
        del obj[missing]
        with pytest.raises(SchemaError, match="missing mandatory") as exc_info:
            parse_record(json.dumps(obj), 2)
        assert exc_info.value.field_name == missing

    def test_missing_format_version_rejected(self):
        obj = minimal_obj()
        del obj["fmt"]
        with pytest.raises(SchemaError, match="format version"):
            parse_record(json.dumps(obj))

    def test_unknown_task_rejected(self):
        with pytest.raises(SchemaError, match="task"):
            parse_record(minimal_line(task="review"))

    def test_unknown_domain_rejected(self):
        with pytest.raises(SchemaError, match="domain"):
            parse_record(minimal_line(domain="legal"))

    def test_domain_defaults_to_unknown(self):
        assert parse_record(minimal_line()).domain == "unknown"

    @pytest.mark.parametrize("position", [0, -1, 1.5, True])
    def test_bad_position_rejected(self, position):
        with pytest.raises(SchemaError, match="position"):
            parse_record(minimal_line(position=position))

    @pytest.mark.parametrize("quality", [-0.1, 25.01])
    def test_quality_outside_scale_rejected(self, quality):
        with pytest.raises(SchemaError, match="quality"):
            parse_record(minimal_line(quality=quality))

    @pytest.mark.parametrize("seg_cos", [-1.2, 1.0001])
    def test_seg_cos_outside_bounds_rejected(self, seg_cos):
        with pytest.raises(SchemaError, match="seg_cos"):
            parse_record(minimal_line(seg_cos=seg_cos))

    def test_pair_cos_outside_bounds_rejected(self):
        with pytest.raises(SchemaError, match="pair_cos"):
            parse_record(minimal_line(pair_cos=[0.5, 1.5]))

    def test_pos_length_mismatch_rejected(self):
        with pytest.raises(SchemaError, match="src_pos"):
            parse_record(minimal_line(src_pos=["NOUN"]))

    def test_empty_token_sequences_parse(self):
        # Degenerate records are a scoring error, not a schema error.
        rec = parse_record(minimal_line(src_tokens=[], alignment=[],
                                        pair_cos=[]))
        assert rec.src_tokens == []

    def test_non_boolean_altered_rejected(self):
        with pytest.raises(SchemaError, match="altered"):
            parse_record(minimal_line(altered="yes"))

    def test_nfc_applied_at_ingest(self):
        composed = minimal_line(src_tokens=["café", "b"])
        decomposed = minimal_line(src_tokens=["café", "b"])
        assert parse_record(composed) == parse_record(decomposed)

    def test_arcs_become_sets(self):
        rec = parse_record(minimal_line(src_arcs=["x", "y", "x"],
                                        hyp_arcs=[]))
        assert rec.src_arcs == frozenset({"x", "y"})
        assert rec.hyp_arcs == frozenset()

    def test_header_line_parses_and_is_rejected_as_record(self):
        line = json.dumps({"fmt": 1, "provenance": {"tokenizer": "ws"}})
        header = parse_line(line, 1)
        assert isinstance(header, ProvenanceHeader)
        with pytest.raises(SchemaError, match="provenance header"):
            parse_record(line, 1)


class TestFilter:
    def _with_quality(self, values):
        return [make_record(id=f"q{i}", quality=q) for i, q in enumerate(values)]

    def test_strict_threshold_drops_boundary(self):
        records = self._with_quality([4.99, 5.0, 5.01])
        kept = list(stream_filter(records, CorpusFilter(max_quality=5.0)))
        assert [r.quality for r in kept] == [4.99]

    def test_inclusive_threshold_keeps_boundary(self):
        records = self._with_quality([4.99, 5.0, 5.01])
        flt = CorpusFilter(max_quality=5.0, quality_inclusive=True)
        assert [r.quality for r in list(stream_filter(records, flt))] == [4.99, 5.0]

    def test_missing_quality_fails_quality_filter(self):
        records = [make_record(id="a"), make_record(id="b", quality=1.0)]
        kept = list(stream_filter(records, CorpusFilter(max_quality=5.0)))
        assert [r.id for r in kept] == ["b"]

    def test_missing_quality_passes_without_threshold(self):
        records = [make_record(id="a")]
        assert list(stream_filter(records, CorpusFilter())) == records

    def test_dimension_filters(self):
        records = [
            make_record(id="a", task="single", system="mt1", domain="news"),
            make_record(id="b", task="iterative", system="mt2", domain="social",
                        position=1),
            make_record(id="c", task="single", system="mt2", domain="news"),
        ]
        flt = CorpusFilter(tasks={"single"}, systems={"mt2"})
        assert [r.id for r in stream_filter(records, flt)] == ["c"]
        flt = CorpusFilter(domains={"news", "social"}, lps={"en-fr_FR"})
        assert [r.id for r in stream_filter(records, flt)] == ["a", "b", "c"]
        assert list(stream_filter(records, CorpusFilter(lps={"en-de_DE"}))) == []

    def test_empty_filter_is_identity(self):
        records = [make_record(id=f"r{i}") for i in range(4)]
        assert list(stream_filter(records, CorpusFilter())) == records

    def test_negative_threshold_rejected(self):
        with pytest.raises(ValueError, match="max_quality"):
            CorpusFilter(max_quality=-1.0)

    @given(st.lists(st.floats(min_value=0, max_value=25), max_size=20),
           st.integers(min_value=0, max_value=20))
    @settings(max_examples=50, deadline=None)
    def test_partitioned_filtering_equals_whole(self, qualities, cut):
        records = [make_record(id=f"r{i}", quality=q)
                   for i, q in enumerate(qualities)]
        flt = CorpusFilter(max_quality=12.5)
        cut = min(cut, len(records))
        split = (list(stream_filter(records[:cut], flt))
                 + list(stream_filter(records[cut:], flt)))
        assert split == list(stream_filter(records, flt))

    def test_output_is_subsequence(self):
        records = [make_record(id=f"r{i}", quality=float(i)) for i in range(10)]
        kept = list(stream_filter(records, CorpusFilter(max_quality=4.0)))
        ids = [r.id for r in records]
        positions = [ids.index(r.id) for r in kept]
        assert positions == sorted(positions)


# Text is NFC-normalized at parse time, so generate NFC tokens to keep
# the round-trip comparison exact.
_token = st.text(
    alphabet=st.characters(whitelist_categories=("Ll", "Lu", "Nd")),
    min_size=1, max_size=6).map(lambda s: unicodedata.normalize("NFC", s))


@st.composite
def records(draw):
    src = draw(st.lists(_token, min_size=1, max_size=6))
    hyp = draw(st.lists(_token, min_size=1, max_size=6))
    cells = [(i, j) for i in range(1, len(src) + 1)
             for j in range(1, len(hyp) + 1)]
    links = draw(st.lists(st.sampled_from(cells), unique=True,
                          max_size=len(cells)))
    cos = draw(st.lists(st.floats(min_value=-1, max_value=1),
                        min_size=len(links), max_size=len(links)))
    return make_record(
        id=draw(_token), lp=draw(_token), system=draw(_token),
        task=draw(st.sampled_from(("single", "iterative", "post_edit"))),
        domain=draw(st.sampled_from(("news", "social", "unknown"))),
        src_tokens=src, hyp_tokens=hyp, alignment=links, pair_cos=cos,
        seg_cos=draw(st.floats(min_value=-1, max_value=1)),
        src_pos=draw(st.one_of(st.none(), st.just(["X"] * len(src)))),
        hyp_pos=None,
        src_arcs=draw(st.one_of(st.none(),
                                st.frozensets(_token, max_size=4))),
        hyp_arcs=None,
        quality=draw(st.one_of(st.none(), st.floats(min_value=0, max_value=25))),
        position=draw(st.one_of(st.none(), st.integers(min_value=1, max_value=9))),
    )


@given(records())
@settings(max_examples=100, deadline=None)
def test_serialization_round_trip(rec):
    assert parse_record(serialize_record(rec), 1) == rec


class TestFileIo:
    def test_write_read_round_trip(self, tmp_path):
        records = [make_record(id=f"r{i}") for i in range(3)]
        path = tmp_path / "corpus.jsonl"
        assert write_records(path, records) == 3
        assert list(read_records(path)) == records

    def test_read_skips_headers_and_collects_them(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        header = json.dumps({"fmt": 1, "provenance": {"encoder": "hash"}})
        path.write_text(header + "\n" + minimal_line() + "\n", encoding="utf-8")
        headers: list[ProvenanceHeader] = []
        records = list(read_records(path, headers=headers))
        assert len(records) == 1
        assert len(headers) == 1
        assert headers[0].provenance == {"encoder": "hash"}

    def test_validate_file_reports_each_bad_line(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        bad = minimal_obj()
        del bad["seg_cos"]
        path.write_text("\n".join([minimal_line(), json.dumps(bad),
                                   "{broken"]) + "\n", encoding="utf-8")
        errors = validate_file(path)
        assert len(errors) == 2
        assert "line 2" in errors[0] and "seg_cos" in errors[0]
        assert "line 3" in errors[1] and "malformed JSON" in errors[1]

    def test_blank_lines_ignored(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        path.write_text("\n" + minimal_line() + "\n\n", encoding="utf-8")
        assert len(list(read_records(path))) == 1
        assert validate_file(path) == []
