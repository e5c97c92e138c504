"""Bitext extraction and cosine verification.

``extract`` turns raw (source, hypothesis) bitext into the canonical
feature-record JSONL the scoring package consumes, by delegating every
annotation decision to the configured backends.  The adapter computes no
heuristics and no index; it only plumbs backend output into records.

The first output line is a provenance header naming each backend, so a
corpus stays attributable to the exact stack that produced it.  An
optional sidecar stores the raw unit vectors behind every cosine in the
same order, and ``verify`` recomputes those cosines with the scoring
package's own cosine operation to bound serialization or plumbing drift.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterator, TextIO

import numpy as np

from literalis.corpus import (FORMAT_VERSION, FeatureRecord, SchemaError,
                              iter_lines, parse_record, read_records,
                              serialize_record)
from literalis.signals import cosine

from .backends import BackendConfig, ResolvedBackends, resolve

logger = logging.getLogger("literalis_extractor")


class ExtractorError(Exception):
    """Base class for extraction-domain failures."""


class BitextError(ExtractorError):
    """An input bitext line is malformed; carries the 1-based line number."""

    def __init__(self, message: str, *, line_number: int | None = None) -> None:
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class VerifyError(ExtractorError):
    """The sidecar does not cover or match the records under check."""


class _RecordSkip(Exception):
    """Internal: abandon one record with a diagnostic, keep going."""


@dataclass(slots=True)
class BitextSegment:
    """One raw translation pair prior to annotation."""

    id: str
    lp: str
    src: str
    hyp: str
    system: str
    task: str = "single"
    position: int | None = None
    domain: str = "unknown"
    quality: float | None = None


_REQUIRED_BITEXT = ("id", "lp", "src", "hyp", "system")
_OPTIONAL_BITEXT = ("task", "position", "domain", "quality")


def _bitext_from_obj(obj: Any, number: int) -> BitextSegment:
    if not isinstance(obj, dict):
        raise BitextError("expected a JSON object", line_number=number)
    unknown = sorted(set(obj) - set(_REQUIRED_BITEXT) - set(_OPTIONAL_BITEXT))
    if unknown:
        raise BitextError(f"unknown fields {unknown}", line_number=number)
    for name in _REQUIRED_BITEXT:
        if name not in obj:
            raise BitextError(f"missing field {name!r}", line_number=number)
        if not isinstance(obj[name], str):
            raise BitextError(f"{name} must be a string", line_number=number)
    for name in ("id", "lp", "system"):
        if not obj[name].strip():
            raise BitextError(f"{name} must be non-blank", line_number=number)
    if "-" not in obj["lp"]:
        raise BitextError(
            f"lp {obj['lp']!r} is not of the form source-target",
            line_number=number)
    kwargs: dict[str, Any] = {name: obj[name] for name in _REQUIRED_BITEXT}
    if "task" in obj:
        if not isinstance(obj["task"], str) or not obj["task"].strip():
            raise BitextError("task must be a non-blank string",
                              line_number=number)
        kwargs["task"] = obj["task"]
    if "domain" in obj:
        if not isinstance(obj["domain"], str) or not obj["domain"].strip():
            raise BitextError("domain must be a non-blank string",
                              line_number=number)
        kwargs["domain"] = obj["domain"]
    if "position" in obj and obj["position"] is not None:
        if not isinstance(obj["position"], int) or isinstance(obj["position"], bool):
            raise BitextError("position must be an integer", line_number=number)
        kwargs["position"] = obj["position"]
    if "quality" in obj and obj["quality"] is not None:
        value = obj["quality"]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise BitextError("quality must be a number", line_number=number)
        kwargs["quality"] = float(value)
    return BitextSegment(**kwargs)


def read_bitext(path: str | Path) -> Iterator[BitextSegment]:
    """Stream bitext segments; malformed lines fail with their number."""
    for number, line in iter_lines(path):
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise BitextError(f"malformed JSON: {exc.msg}",
                              line_number=number) from exc
        yield _bitext_from_obj(obj, number)


@dataclass(slots=True)
class ExtractionJob:
    """One extraction run: input bitext, backend stack, output paths."""

    in_path: Path
    out_path: Path
    config: BackendConfig = field(default_factory=BackendConfig)
    vectors_path: Path | None = None


@dataclass(slots=True)
class ExtractionSummary:
    written: int
    skipped: list[str]
    out_path: Path
    vectors_path: Path | None


def _provenance(backends: ResolvedBackends, config: BackendConfig) -> dict[str, Any]:
    return {
        "tokenizer": backends.tokenizer.name,
        "tagger": backends.tagger.name if backends.tagger else "none",
        "aligner": backends.aligner.name,
        "encoder": backends.encoder.name,
        "pos_lps": sorted(config.pos_lps) if config.pos_lps is not None else None,
        "versions": dict(config.versions),
    }


def _side_langs(lp: str) -> tuple[str, str]:
    src, hyp = lp.split("-", 1)
    return src, hyp


def _token_matrix(encoder, tokens: list[str], lang: str, side: str) -> np.ndarray:
    matrix = np.asarray(encoder.encode_tokens(tokens, lang), dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] != len(tokens):
        raise _RecordSkip(
            f"encoder returned shape {matrix.shape} for {len(tokens)} "
            f"{side} tokens")
    return matrix


def _extract_one(seg: BitextSegment, backends: ResolvedBackends,
                 config: BackendConfig) -> tuple[FeatureRecord, dict[str, Any]]:
    src_lang, hyp_lang = _side_langs(seg.lp)
    src_tokens = backends.tokenizer.tokenize(seg.src, src_lang)
    hyp_tokens = backends.tokenizer.tokenize(seg.hyp, hyp_lang)
    if not src_tokens:
        raise _RecordSkip("source yields no tokens")
    if not hyp_tokens:
        raise _RecordSkip("hypothesis yields no tokens")

    src_pos = hyp_pos = None
    src_arcs = hyp_arcs = None
    tagger = backends.tagger
    if tagger is not None and (config.pos_lps is None or seg.lp in config.pos_lps):
        src_pos, src_arcs = tagger.tag(src_tokens, src_lang)
        hyp_pos, hyp_arcs = tagger.tag(hyp_tokens, hyp_lang)

    links = [(int(i), int(j))
             for i, j in backends.aligner.align(src_tokens, hyp_tokens, seg.lp)]
    for i, j in links:
        if not (1 <= i <= len(src_tokens) and 1 <= j <= len(hyp_tokens)):
            raise _RecordSkip(
                f"aligner link ({i}, {j}) out of bounds for "
                f"{len(src_tokens)}x{len(hyp_tokens)} tokens")

    try:
        src_vecs = _token_matrix(backends.encoder, src_tokens, src_lang, "source")
        hyp_vecs = _token_matrix(backends.encoder, hyp_tokens, hyp_lang, "hypothesis")
        seg_src = np.asarray(backends.encoder.encode_segment(seg.src, src_lang),
                             dtype=np.float64)
        seg_hyp = np.asarray(backends.encoder.encode_segment(seg.hyp, hyp_lang),
                             dtype=np.float64)
        pair_cos = [cosine(src_vecs[i - 1], hyp_vecs[j - 1]) for i, j in links]
        seg_cos = cosine(seg_src, seg_hyp)
    except ValueError as exc:
        raise _RecordSkip(f"encoding failure: {exc}") from exc

    rec = FeatureRecord(
        id=seg.id, lp=seg.lp, system=seg.system, task=seg.task,
        src_tokens=src_tokens, hyp_tokens=hyp_tokens,
        alignment=links, pair_cos=pair_cos, seg_cos=seg_cos,
        domain=seg.domain, position=seg.position, quality=seg.quality,
        src_pos=src_pos, hyp_pos=hyp_pos,
        src_arcs=src_arcs, hyp_arcs=hyp_arcs)
    vectors = {
        "id": seg.id,
        "seg_src": seg_src.tolist(),
        "seg_hyp": seg_hyp.tolist(),
        "links": [[i, j] for i, j in links],
        "pairs": [{"src": src_vecs[i - 1].tolist(),
                   "hyp": hyp_vecs[j - 1].tolist()} for i, j in links],
    }
    return rec, vectors


def extract(job: ExtractionJob) -> ExtractionSummary:
    """Run one extraction job; per-record failures skip, not abort.

    The output is schema-valid by construction: every record is round-
    tripped through the corpus parser before it is written, and a record
    that fails any stage is dropped with a diagnostic instead.
    """
    backends = resolve(job.config)
    header = {"fmt": FORMAT_VERSION,
              "provenance": _provenance(backends, job.config)}
    written = 0
    skipped: list[str] = []
    vec_handle: TextIO | None = None
    with open(job.out_path, "w", encoding="utf-8") as out_handle:
        try:
            if job.vectors_path is not None:
                vec_handle = open(job.vectors_path, "w", encoding="utf-8")
            out_handle.write(json.dumps(header, ensure_ascii=False,
                                        sort_keys=True) + "\n")
            for seg in read_bitext(job.in_path):
                try:
                    rec, vectors = _extract_one(seg, backends, job.config)
                    line = serialize_record(rec)
                    parse_record(line)
                except _RecordSkip as skip:
                    skipped.append(f"{seg.id}: {skip}")
                    logger.warning("skipping %s: %s", seg.id, skip)
                    continue
                except SchemaError as exc:
                    skipped.append(f"{seg.id}: schema violation: {exc}")
                    logger.warning("skipping %s: schema violation: %s",
                                   seg.id, exc)
                    continue
                out_handle.write(line + "\n")
                if vec_handle is not None:
                    vec_handle.write(json.dumps(vectors, sort_keys=True) + "\n")
                written += 1
        finally:
            if vec_handle is not None:
                vec_handle.close()
    logger.info("wrote %d records to %s (%d skipped)",
                written, job.out_path, len(skipped))
    return ExtractionSummary(written=written, skipped=skipped,
                             out_path=job.out_path,
                             vectors_path=job.vectors_path)


@dataclass(slots=True)
class Discrepancy:
    record_id: str
    which: str
    stored: float
    recomputed: float

    @property
    def delta(self) -> float:
        return abs(self.stored - self.recomputed)


@dataclass(slots=True)
class VerifyReport:
    """Cosine recomputation outcome over a record/sidecar pair.

    ``max_abs_delta`` is None when nothing was checked.  ``flagged``
    holds only the discrepancies above the tolerance.
    """

    n_records: int
    n_cosines: int
    max_abs_delta: float | None
    flagged: list[Discrepancy]

    @property
    def ok(self) -> bool:
        return not self.flagged


def _load_sidecar(path: str | Path) -> list[dict[str, Any]]:
    entries: list[dict[str, Any]] = []
    for number, line in iter_lines(path):
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise VerifyError(f"sidecar line {number}: malformed JSON: "
                              f"{exc.msg}") from exc
        if not isinstance(obj, dict) or "id" not in obj:
            raise VerifyError(f"sidecar line {number}: expected an object "
                              f"with an id")
        entries.append(obj)
    return entries


def verify(records_path: str | Path, vectors_path: str | Path, *,
           tolerance: float = 1e-6,
           limit: int | None = None) -> VerifyReport:
    """Recompute every stored cosine from the raw-vector sidecar.

    Sidecar lines correspond to records positionally (the extraction run
    writes both in the same order); record ids may legitimately repeat
    across systems, so each line's id is only cross-checked against the
    record it lines up with.  Raises VerifyError when the sidecar runs
    short, an id disagrees, or a pair list does not match a record's
    alignment; value disagreement is reported, not raised.
    """
    sidecar = _load_sidecar(vectors_path)
    n_records = n_cosines = 0
    max_delta: float | None = None
    flagged: list[Discrepancy] = []

    def check(rec_id: str, which: str, stored: float,
              recomputed: float) -> None:
        nonlocal n_cosines, max_delta
        n_cosines += 1
        item = Discrepancy(rec_id, which, stored, recomputed)
        if max_delta is None or item.delta > max_delta:
            max_delta = item.delta
        if item.delta > tolerance:
            flagged.append(item)

    for index, rec in enumerate(read_records(records_path)):
        if limit is not None and n_records >= limit:
            break
        if index >= len(sidecar):
            raise VerifyError(f"no sidecar vectors for record {rec.id!r} "
                              f"(sidecar ends after {len(sidecar)} entries)")
        entry = sidecar[index]
        if entry["id"] != rec.id:
            raise VerifyError(
                f"sidecar line {index + 1} is for {entry['id']!r}, "
                f"expected record {rec.id!r}")
        pairs = entry.get("pairs", [])
        if len(pairs) != len(rec.alignment):
            raise VerifyError(
                f"record {rec.id!r}: sidecar has {len(pairs)} pair vectors "
                f"for {len(rec.alignment)} links")
        n_records += 1
        check(rec.id, "seg_cos", rec.seg_cos,
              cosine(entry["seg_src"], entry["seg_hyp"]))
        for k, pair in enumerate(pairs):
            check(rec.id, f"pair_cos[{k}]", rec.pair_cos[k],
                  cosine(pair["src"], pair["hyp"]))

    return VerifyReport(n_records=n_records, n_cosines=n_cosines,
                        max_abs_delta=max_delta, flagged=flagged)
