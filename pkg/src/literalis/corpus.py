"""Corpus model and JSONL ingestion.

A corpus is a stream of per-segment feature records: tokenized source and
hypothesis, optional POS and dependency-arc annotations, a token alignment
with per-pair cosines, a segment-level cosine, and bookkeeping metadata
(language pair, system, task, domain, quality estimate).

Records travel as one JSON object per line.  Parsing is strict: every
schema violation raises :class:`SchemaError` naming the offending field and
the 1-based line number.  All text is NFC-normalized at ingest so that
downstream equality checks are well defined.
"""

from __future__ import annotations

import json
import unicodedata
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Iterator

FORMAT_VERSION = 1

TASKS = ("single", "iterative", "post_edit")
DOMAINS = ("news", "social", "speech", "literary", "unknown")

QUALITY_MIN = 0.0
QUALITY_MAX = 25.0

_REQUIRED_FIELDS = (
    "id",
    "lp",
    "system",
    "task",
    "src_tokens",
    "hyp_tokens",
    "alignment",
    "pair_cos",
    "seg_cos",
)

_OPTIONAL_STR_LIST_FIELDS = ("src_pos", "hyp_pos")
_OPTIONAL_ARC_FIELDS = ("src_arcs", "hyp_arcs")


class LiteralisError(Exception):
    """Base class for all domain errors raised by this package."""


class SchemaError(LiteralisError, ValueError):
    """A record violates the corpus schema.

    Carries the offending field name and the 1-based line number when they
    are known; both appear in the message.
    """

    def __init__(self, message: str, *, line_number: int | None = None,
                 field_name: str | None = None) -> None:
        prefix = ""
        if line_number is not None:
            prefix += f"line {line_number}: "
        if field_name is not None:
            prefix += f"{field_name}: "
        super().__init__(prefix + message)
        self.line_number = line_number
        self.field_name = field_name


def _nfc(text: str) -> str:
    return unicodedata.normalize("NFC", text)


@dataclass(slots=True)
class ProvenanceHeader:
    """Leading metadata line written by extraction adapters.

    Not a segment record; carries backend identifiers so a corpus remains
    reproducible.  Readers skip headers transparently.
    """

    provenance: dict[str, Any]
    fmt: int = FORMAT_VERSION


@dataclass(slots=True)
class FeatureRecord:
    """One (source, hypothesis) segment with precomputed features.

    `alignment` holds 1-based (source_index, target_index) pairs in file
    order; `pair_cos` is parallel to it.  Arc sets are order-free and kept
    as frozensets.
    """

    id: str
    lp: str
    system: str
    task: str
    src_tokens: list[str]
    hyp_tokens: list[str]
    alignment: list[tuple[int, int]]
    pair_cos: list[float]
    seg_cos: float
    domain: str = "unknown"
    position: int | None = None
    src_pos: list[str] | None = None
    hyp_pos: list[str] | None = None
    src_arcs: frozenset[str] | None = None
    hyp_arcs: frozenset[str] | None = None
    quality: float | None = None
    altered: bool | None = None
    sli_counterpart_id: str | None = None

    def hyp_text(self) -> str:
        """Hypothesis surface form reconstructed from tokens."""
        return " ".join(self.hyp_tokens)


def _require(condition: bool, message: str, *, line: int | None,
             field_name: str) -> None:
    if not condition:
        raise SchemaError(message, line_number=line, field_name=field_name)


def _check_str(value: Any, name: str, line: int | None, *,
               allow_empty: bool = False) -> str:
    _require(isinstance(value, str), f"expected string, got {type(value).__name__}",
             line=line, field_name=name)
    if not allow_empty:
        _require(value != "", "must be non-empty", line=line, field_name=name)
    return _nfc(value)


def _check_str_list(value: Any, name: str, line: int | None) -> list[str]:
    _require(isinstance(value, list), f"expected list, got {type(value).__name__}",
             line=line, field_name=name)
    out: list[str] = []
    for i, item in enumerate(value):
        _require(isinstance(item, str), f"entry {i} is not a string",
                 line=line, field_name=name)
        out.append(_nfc(item))
    return out


def _check_number(value: Any, name: str, line: int | None) -> float:
    # bool is an int subclass; reject it explicitly.
    _require(isinstance(value, (int, float)) and not isinstance(value, bool),
             f"expected number, got {type(value).__name__}",
             line=line, field_name=name)
    return float(value)


def record_from_obj(obj: dict[str, Any], line_number: int | None = None) -> FeatureRecord:
    """Validate a decoded JSON object and build a :class:`FeatureRecord`.

    Raises :class:`SchemaError` on the first violation found.
    """
    line = line_number
    _require(isinstance(obj, dict), "record is not a JSON object",
             line=line, field_name="record")

    fmt = obj.get("fmt")
    _require(fmt == FORMAT_VERSION,
             f"missing or unsupported format version (need {FORMAT_VERSION})",
             line=line, field_name="fmt")

    for name in _REQUIRED_FIELDS:
        _require(name in obj, "missing mandatory field", line=line, field_name=name)

    rec_id = _check_str(obj["id"], "id", line)
    lp = _check_str(obj["lp"], "lp", line)
    system = _check_str(obj["system"], "system", line)

    task = obj["task"]
    _require(task in TASKS, f"unknown task {task!r} (expected one of {TASKS})",
             line=line, field_name="task")

    domain = obj.get("domain", "unknown")
    _require(domain in DOMAINS, f"unknown domain {domain!r} (expected one of {DOMAINS})",
             line=line, field_name="domain")

    src_tokens = _check_str_list(obj["src_tokens"], "src_tokens", line)
    hyp_tokens = _check_str_list(obj["hyp_tokens"], "hyp_tokens", line)

    position = obj.get("position")
    if position is not None:
        _require(isinstance(position, int) and not isinstance(position, bool)
                 and position >= 1,
                 "position must be an integer >= 1", line=line, field_name="position")

    raw_alignment = obj["alignment"]
    _require(isinstance(raw_alignment, list), "expected list of index pairs",
             line=line, field_name="alignment")
    m, n = len(src_tokens), len(hyp_tokens)
    alignment: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    for k, pair in enumerate(raw_alignment):
        _require(isinstance(pair, (list, tuple)) and len(pair) == 2,
                 f"entry {k} is not an index pair", line=line, field_name="alignment")
        i, j = pair
        ok = (isinstance(i, int) and isinstance(j, int)
              and not isinstance(i, bool) and not isinstance(j, bool))
        _require(ok, f"entry {k} has non-integer indices",
                 line=line, field_name="alignment")
        _require(1 <= i <= m and 1 <= j <= n,
                 f"index out of bounds: ({i}, {j}) with 1-based indexing "
                 f"(src has {m} tokens, hyp has {n})",
                 line=line, field_name="alignment")
        link = (i, j)
        _require(link not in seen, f"duplicate pair ({i}, {j})",
                 line=line, field_name="alignment")
        seen.add(link)
        alignment.append(link)

    raw_pair_cos = obj["pair_cos"]
    _require(isinstance(raw_pair_cos, list), "expected list of numbers",
             line=line, field_name="pair_cos")
    _require(len(raw_pair_cos) == len(alignment),
             f"length mismatch: {len(raw_pair_cos)} values for "
             f"{len(alignment)} alignment links",
             line=line, field_name="pair_cos")
    pair_cos: list[float] = []
    for k, value in enumerate(raw_pair_cos):
        x = _check_number(value, "pair_cos", line)
        _require(-1.0 <= x <= 1.0, f"entry {k} outside [-1, 1]: {x}",
                 line=line, field_name="pair_cos")
        pair_cos.append(x)

    seg_cos = _check_number(obj["seg_cos"], "seg_cos", line)
    _require(-1.0 <= seg_cos <= 1.0, f"value outside [-1, 1]: {seg_cos}",
             line=line, field_name="seg_cos")

    pos_fields: dict[str, list[str] | None] = {}
    for name, tokens in zip(_OPTIONAL_STR_LIST_FIELDS, (src_tokens, hyp_tokens)):
        value = obj.get(name)
        if value is None:
            pos_fields[name] = None
            continue
        tags = _check_str_list(value, name, line)
        _require(len(tags) == len(tokens),
                 f"length mismatch: {len(tags)} tags for {len(tokens)} tokens",
                 line=line, field_name=name)
        pos_fields[name] = tags

    arc_fields: dict[str, frozenset[str] | None] = {}
    for name in _OPTIONAL_ARC_FIELDS:
        value = obj.get(name)
        if value is None:
            arc_fields[name] = None
            continue
        arcs = _check_str_list(value, name, line)
        arc_fields[name] = frozenset(arcs)

    quality = obj.get("quality")
    if quality is not None:
        quality = _check_number(quality, "quality", line)
        _require(QUALITY_MIN <= quality <= QUALITY_MAX,
                 f"value outside [{QUALITY_MIN}, {QUALITY_MAX}]: {quality}",
                 line=line, field_name="quality")

    altered = obj.get("altered")
    if altered is not None:
        _require(isinstance(altered, bool), "expected boolean",
                 line=line, field_name="altered")

    counterpart = obj.get("sli_counterpart_id")
    if counterpart is not None:
        counterpart = _check_str(counterpart, "sli_counterpart_id", line)

    return FeatureRecord(
        id=rec_id,
        lp=lp,
        system=system,
        task=task,
        src_tokens=src_tokens,
        hyp_tokens=hyp_tokens,
        alignment=alignment,
        pair_cos=pair_cos,
        seg_cos=seg_cos,
        domain=domain,
        position=position,
        src_pos=pos_fields["src_pos"],
        hyp_pos=pos_fields["hyp_pos"],
        src_arcs=arc_fields["src_arcs"],
        hyp_arcs=arc_fields["hyp_arcs"],
        quality=quality,
        altered=altered,
        sli_counterpart_id=counterpart,
    )


def parse_line(line: str, line_number: int | None = None) -> FeatureRecord | ProvenanceHeader:
    """Parse one JSONL line into a record or a provenance header."""
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"malformed JSON: {exc.msg}",
                          line_number=line_number, field_name=None) from exc
    if isinstance(obj, dict) and "provenance" in obj and "id" not in obj:
        _require(obj.get("fmt") == FORMAT_VERSION,
                 f"missing or unsupported format version (need {FORMAT_VERSION})",
                 line=line_number, field_name="fmt")
        _require(isinstance(obj["provenance"], dict), "expected object",
                 line=line_number, field_name="provenance")
        return ProvenanceHeader(provenance=obj["provenance"])
    return record_from_obj(obj, line_number)


def parse_record(line: str, line_number: int | None = None) -> FeatureRecord:
    """Parse one JSONL line; header lines are rejected."""
    parsed = parse_line(line, line_number)
    if isinstance(parsed, ProvenanceHeader):
        raise SchemaError("expected a segment record, found a provenance header",
                          line_number=line_number, field_name="record")
    return parsed


def record_to_obj(rec: FeatureRecord) -> dict[str, Any]:
    """Serialize to a plain dict with canonical field order."""
    obj: dict[str, Any] = {
        "fmt": FORMAT_VERSION,
        "id": rec.id,
        "lp": rec.lp,
        "system": rec.system,
        "task": rec.task,
    }
    if rec.position is not None:
        obj["position"] = rec.position
    obj["domain"] = rec.domain
    obj["src_tokens"] = list(rec.src_tokens)
    obj["hyp_tokens"] = list(rec.hyp_tokens)
    if rec.src_pos is not None:
        obj["src_pos"] = list(rec.src_pos)
    if rec.hyp_pos is not None:
        obj["hyp_pos"] = list(rec.hyp_pos)
    if rec.src_arcs is not None:
        obj["src_arcs"] = sorted(rec.src_arcs)
    if rec.hyp_arcs is not None:
        obj["hyp_arcs"] = sorted(rec.hyp_arcs)
    obj["alignment"] = [[i, j] for i, j in rec.alignment]
    obj["pair_cos"] = list(rec.pair_cos)
    obj["seg_cos"] = rec.seg_cos
    if rec.quality is not None:
        obj["quality"] = rec.quality
    if rec.altered is not None:
        obj["altered"] = rec.altered
    if rec.sli_counterpart_id is not None:
        obj["sli_counterpart_id"] = rec.sli_counterpart_id
    return obj


def serialize_record(rec: FeatureRecord) -> str:
    """One JSON line; `parse_record(serialize_record(r))` equals `r`."""
    return json.dumps(record_to_obj(rec), ensure_ascii=False)


@dataclass(slots=True)
class CorpusFilter:
    """Metadata predicate over records.

    Empty or absent dimensions do not constrain.  The quality threshold is
    exclusive by default (keep strictly-below); set `quality_inclusive` to
    keep records at the threshold too.  Records without a quality estimate
    pass only when `max_quality` is absent.
    """

    max_quality: float | None = None
    tasks: frozenset[str] | None = None
    systems: frozenset[str] | None = None
    lps: frozenset[str] | None = None
    domains: frozenset[str] | None = None
    quality_inclusive: bool = False

    def __post_init__(self) -> None:
        if self.max_quality is not None and self.max_quality < 0:
            raise ValueError(f"max_quality must be >= 0, got {self.max_quality}")
        for name in ("tasks", "systems", "lps", "domains"):
            value = getattr(self, name)
            if value is not None and not isinstance(value, frozenset):
                setattr(self, name, frozenset(value))

    def matches(self, rec: FeatureRecord) -> bool:
        if self.max_quality is not None:
            if rec.quality is None:
                return False
            if self.quality_inclusive:
                if rec.quality > self.max_quality:
                    return False
            elif rec.quality >= self.max_quality:
                return False
        if self.tasks and rec.task not in self.tasks:
            return False
        if self.systems and rec.system not in self.systems:
            return False
        if self.lps and rec.lp not in self.lps:
            return False
        if self.domains and rec.domain not in self.domains:
            return False
        return True


def stream_filter(records: Iterable[FeatureRecord],
                  flt: CorpusFilter) -> Iterator[FeatureRecord]:
    """Lazily yield matching records, preserving input order."""
    for rec in records:
        if flt.matches(rec):
            yield rec


def iter_lines(path: str | Path) -> Iterator[tuple[int, str]]:
    """Yield (1-based line number, line) for non-blank lines."""
    with open(path, "r", encoding="utf-8") as handle:
        for number, line in enumerate(handle, start=1):
            if line.strip():
                yield number, line


def read_records(path: str | Path, *,
                 headers: list[ProvenanceHeader] | None = None) -> Iterator[FeatureRecord]:
    """Stream records from a JSONL file, collecting any headers aside."""
    for number, line in iter_lines(path):
        parsed = parse_line(line, number)
        if isinstance(parsed, ProvenanceHeader):
            if headers is not None:
                headers.append(parsed)
            continue
        yield parsed


def load_records(path: str | Path) -> list[FeatureRecord]:
    return list(read_records(path))


def write_records(path: str | Path, records: Iterable[FeatureRecord]) -> int:
    """Write records as JSONL; returns the number written."""
    count = 0
    with open(path, "w", encoding="utf-8") as handle:
        for rec in records:
            handle.write(serialize_record(rec))
            handle.write("\n")
            count += 1
    return count


def validate_file(path: str | Path, *, max_errors: int | None = None) -> list[str]:
    """Collect schema diagnostics for a JSONL file.

    Returns one message per bad line, each carrying the line number.  An
    empty list means the file is schema-valid.
    """
    errors: list[str] = []
    for number, line in iter_lines(path):
        try:
            parse_line(line, number)
        except SchemaError as exc:
            errors.append(str(exc))
            if max_errors is not None and len(errors) >= max_errors:
                break
    return errors
