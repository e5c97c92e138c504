"""Signal validation against idiom triplets and synthetic mixtures.

A triplet holds one source sentence with two reference translations: a
word-for-word literal rendering and an idiomatic one.  Each signal is
judged by whether it ranks the literal candidate above the idiomatic
candidate (polarity-adjusted); the fraction of triplets where it does is
that signal's hit rate.

Triplets also seed synthetic mixtures: three base triplets are concatenated
and the literal segments are swapped out one at a time, yielding four
variants at 100 / 66 / 33 / 0 percent literal content.  A signal that
tracks literality should fall monotonically across the four levels; the
gradient table reports per-level means with a Friedman test over the
matched instances.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from .corpus import FeatureRecord, LiteralisError, record_from_obj, record_to_obj
from .signals import SIGNAL_NAMES, DegenerateInputError, SignalVector, score_record
from .stats import friedman

# Signal polarity: +1 when larger values read as more literal, -1 when
# smaller values do.  Only crossings grows with reordering.
POLARITY: dict[str, int] = {name: 1 for name in SIGNAL_NAMES}
POLARITY["crossings"] = -1

# Literality levels of the four mixture variants, in fixed report order:
# percentage of segments still in their literal rendering.
MIXTURE_LEVELS = (100, 66, 33, 0)

_SEGMENTS_PER_MIXTURE = 3

HIT = "hit"
MISS = "miss"
TIE = "tie"


class ValidationError(LiteralisError, ValueError):
    """Invalid harness input (bad polarity, too few triplets, bad counts)."""


@dataclass(slots=True)
class TripletInstance:
    """Source plus literal and idiomatic candidate translations.

    Candidate feature records are optional; they are required only for
    scoring (hit rates), not for mixture generation.
    """

    source: str
    literal: str
    idiomatic: str
    tgt_lang: str
    literal_record: FeatureRecord | None = None
    idiomatic_record: FeatureRecord | None = None


@dataclass(slots=True)
class MixtureInstance:
    """Three concatenated triplets with level-keyed candidate texts.

    ``variants`` maps literality level to the concatenated hypothesis text;
    all variants share ``source`` and ``tgt_lang``.  ``provenance`` records
    the base triplet indices, the seeded flip order, the master seed and
    the instance index, enough to regenerate the instance exactly.
    """

    source: str
    variants: dict[int, str]
    tgt_lang: str
    provenance: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True, slots=True)
class HitRateEntry:
    """Hit/miss/tie fractions for one signal in one scope."""

    signal: str
    scope: str
    n: int
    hit: float
    miss: float
    tie: float


@dataclass(frozen=True, slots=True)
class GradientRow:
    """Per-level means and Friedman test for one signal."""

    signal: str
    n: int
    means: dict[int, float]
    excluded: int
    statistic: float | None
    p_value: float | None


def hit_outcome(value_literal: float, value_idiomatic: float, polarity: int) -> str:
    """Judge one triplet for one signal.

    A hit requires the literal candidate to score strictly on the literal
    side of the idiomatic one after polarity adjustment; exact equality is
    a tie, never a hit.
    """
    if polarity not in (1, -1):
        raise ValidationError(f"polarity must be +1 or -1, got {polarity}")
    lit = polarity * value_literal
    idio = polarity * value_idiomatic
    if lit > idio:
        return HIT
    if lit < idio:
        return MISS
    return TIE


def _candidate_signals(rec: FeatureRecord | None) -> SignalVector:
    if rec is None:
        return SignalVector()
    try:
        return score_record(rec)
    except DegenerateInputError:
        return SignalVector()


def hit_rates(triplets: Sequence[TripletInstance],
              signals: Iterable[str] = SIGNAL_NAMES) -> list[HitRateEntry]:
    """Score triplets and tabulate hit/miss/tie fractions per signal.

    Returns the overall scope first, then one entry per target language in
    sorted order.  A triplet missing a signal on either side is excluded
    from that signal's denominator; the three fractions of each entry sum
    to 1 over what remains.
    """
    wanted = tuple(signals)
    for name in wanted:
        if name not in POLARITY:
            raise ValidationError(f"unknown signal {name!r}")

    scored = [
        (t.tgt_lang, _candidate_signals(t.literal_record),
         _candidate_signals(t.idiomatic_record))
        for t in triplets
    ]

    entries: list[HitRateEntry] = []
    languages = sorted({lang for lang, _, _ in scored})
    for name in wanted:
        polarity = POLARITY[name]
        counts: dict[str, dict[str, int]] = {
            scope: {HIT: 0, MISS: 0, TIE: 0}
            for scope in ("overall", *languages)
        }
        for lang, lit_vec, idio_vec in scored:
            lit = lit_vec.get(name)
            idio = idio_vec.get(name)
            if lit is None or idio is None:
                continue
            outcome = hit_outcome(float(lit), float(idio), polarity)
            counts["overall"][outcome] += 1
            counts[lang][outcome] += 1
        for scope in ("overall", *languages):
            tally = counts[scope]
            n = tally[HIT] + tally[MISS] + tally[TIE]
            if n == 0:
                entries.append(HitRateEntry(name, scope, 0, 0.0, 0.0, 0.0))
            else:
                entries.append(HitRateEntry(
                    name, scope, n,
                    tally[HIT] / n, tally[MISS] / n, tally[TIE] / n))
    return entries


def _grouped_by_language(base: Sequence[TripletInstance]) -> dict[str, list[int]]:
    groups: dict[str, list[int]] = {}
    for idx, triplet in enumerate(base):
        groups.setdefault(triplet.tgt_lang, []).append(idx)
    return groups


def augment(base: Sequence[TripletInstance], n: int, seed: int) -> list[MixtureInstance]:
    """Generate ``n`` seeded three-segment mixture instances.

    Each instance concatenates three distinct base triplets sharing a
    target language (sampling is with replacement across instances) and
    flips literal segments to idiomatic ones in a seeded random slot
    order: the 100 percent variant is all-literal, each following level
    flips one more slot, and the 0 percent variant is all-idiomatic.
    """
    if n < 1:
        raise ValidationError(f"instance count must be >= 1, got {n}")
    if len(base) < _SEGMENTS_PER_MIXTURE:
        raise ValidationError(
            f"need at least {_SEGMENTS_PER_MIXTURE} base triplets, got {len(base)}")
    groups = _grouped_by_language(base)
    if not any(len(g) >= _SEGMENTS_PER_MIXTURE for g in groups.values()):
        raise ValidationError(
            f"no target language has {_SEGMENTS_PER_MIXTURE} base triplets")

    rng = random.Random(seed)
    instances: list[MixtureInstance] = []
    for index in range(n):
        # First draw picks the language (weighted by corpus share); draws
        # landing in a too-small group are redrawn.
        while True:
            first = rng.randrange(len(base))
            group = groups[base[first].tgt_lang]
            if len(group) >= _SEGMENTS_PER_MIXTURE:
                break
        rest = [i for i in group if i != first]
        chosen = [first] + rng.sample(rest, _SEGMENTS_PER_MIXTURE - 1)

        flip_order = list(range(_SEGMENTS_PER_MIXTURE))
        rng.shuffle(flip_order)

        segments = [base[i] for i in chosen]
        source = " ".join(s.source for s in segments)
        candidates = [s.literal for s in segments]
        variants: dict[int, str] = {MIXTURE_LEVELS[0]: " ".join(candidates)}
        for step, level in enumerate(MIXTURE_LEVELS[1:]):
            slot = flip_order[step]
            candidates[slot] = segments[slot].idiomatic
            variants[level] = " ".join(candidates)

        instances.append(MixtureInstance(
            source=source,
            variants=variants,
            tgt_lang=segments[0].tgt_lang,
            provenance={
                "base": chosen,
                "flip_order": flip_order,
                "seed": seed,
                "index": index,
            },
        ))
    return instances


def gradient_table(scored: Sequence[Mapping[int, SignalVector]],
                   signals: Iterable[str] = SIGNAL_NAMES) -> list[GradientRow]:
    """Tabulate per-level signal means over scored mixture instances.

    Each element of ``scored`` maps literality level to the signal vector
    of that variant.  Instances missing a variant, or missing the signal in
    any variant, are excluded from that signal's rows and counted.  The
    Friedman test treats instances as subjects and levels as treatments; it
    needs at least two complete instances.
    """
    wanted = tuple(signals)
    rows: list[GradientRow] = []
    for name in wanted:
        if name not in POLARITY:
            raise ValidationError(f"unknown signal {name!r}")
        matrix: list[list[float]] = []
        excluded = 0
        for instance in scored:
            values: list[float] = []
            for level in MIXTURE_LEVELS:
                vec = instance.get(level)
                value = vec.get(name) if vec is not None else None
                if value is None:
                    break
                values.append(float(value))
            if len(values) == len(MIXTURE_LEVELS):
                matrix.append(values)
            else:
                excluded += 1
        if not matrix:
            rows.append(GradientRow(name, 0, {}, excluded, None, None))
            continue
        n = len(matrix)
        means = {
            level: sum(row[k] for row in matrix) / n
            for k, level in enumerate(MIXTURE_LEVELS)
        }
        if n >= 2:
            statistic, p_value = friedman(matrix)
        else:
            statistic, p_value = None, None
        rows.append(GradientRow(name, n, means, excluded, statistic, p_value))
    return rows


def triplet_from_obj(obj: Mapping[str, Any],
                     line_number: int | None = None) -> TripletInstance:
    """Build a triplet from a decoded JSON object.

    Candidate records, when embedded under ``literal_record`` and
    ``idiomatic_record``, are validated with the corpus schema.
    """
    for name in ("source", "literal", "idiomatic", "tgt_lang"):
        if not isinstance(obj.get(name), str) or not obj[name]:
            raise ValidationError(
                f"line {line_number}: triplet field {name!r} missing or not a "
                f"non-empty string")
    lit_rec = obj.get("literal_record")
    idio_rec = obj.get("idiomatic_record")
    return TripletInstance(
        source=obj["source"],
        literal=obj["literal"],
        idiomatic=obj["idiomatic"],
        tgt_lang=obj["tgt_lang"],
        literal_record=record_from_obj(lit_rec, line_number) if lit_rec else None,
        idiomatic_record=record_from_obj(idio_rec, line_number) if idio_rec else None,
    )


def load_triplets(path: str | Path) -> list[TripletInstance]:
    triplets: list[TripletInstance] = []
    with open(path, "r", encoding="utf-8") as handle:
        for number, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValidationError(
                    f"line {number}: malformed JSON: {exc.msg}") from exc
            triplets.append(triplet_from_obj(obj, number))
    return triplets


def mixture_to_obj(mix: MixtureInstance) -> dict[str, Any]:
    return {
        "source": mix.source,
        "tgt_lang": mix.tgt_lang,
        "variants": {str(level): mix.variants[level]
                     for level in MIXTURE_LEVELS if level in mix.variants},
        "provenance": mix.provenance,
    }


def write_mixtures(path: str | Path, mixtures: Iterable[MixtureInstance]) -> int:
    count = 0
    with open(path, "w", encoding="utf-8") as handle:
        for mix in mixtures:
            handle.write(json.dumps(mixture_to_obj(mix), ensure_ascii=False))
            handle.write("\n")
            count += 1
    return count


def load_scored_mixtures(path: str | Path) -> list[dict[int, SignalVector]]:
    """Read annotated mixtures: variants carry embedded feature records.

    Each line must hold ``variants`` mapping level to a feature record
    object; records are scored on load.  Variants that are unscorable
    (degenerate tokens) are dropped, which excludes the instance from the
    affected signals downstream.
    """
    scored: list[dict[int, SignalVector]] = []
    with open(path, "r", encoding="utf-8") as handle:
        for number, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValidationError(
                    f"line {number}: malformed JSON: {exc.msg}") from exc
            variants = obj.get("variants")
            if not isinstance(variants, dict):
                raise ValidationError(
                    f"line {number}: annotated mixture needs a variants object")
            per_level: dict[int, SignalVector] = {}
            for key, rec_obj in variants.items():
                try:
                    level = int(key)
                except (TypeError, ValueError) as exc:
                    raise ValidationError(
                        f"line {number}: variant level {key!r} is not an "
                        f"integer") from exc
                if level not in MIXTURE_LEVELS:
                    raise ValidationError(
                        f"line {number}: unknown literality level {level}")
                rec = record_from_obj(rec_obj, number)
                try:
                    per_level[level] = score_record(rec)
                except DegenerateInputError:
                    continue
            scored.append(per_level)
    return scored


def annotated_triplet_to_obj(triplet: TripletInstance) -> dict[str, Any]:
    obj: dict[str, Any] = {
        "source": triplet.source,
        "literal": triplet.literal,
        "idiomatic": triplet.idiomatic,
        "tgt_lang": triplet.tgt_lang,
    }
    if triplet.literal_record is not None:
        obj["literal_record"] = record_to_obj(triplet.literal_record)
    if triplet.idiomatic_record is not None:
        obj["idiomatic_record"] = record_to_obj(triplet.idiomatic_record)
    return obj


def write_triplets(path: str | Path, triplets: Iterable[TripletInstance]) -> int:
    count = 0
    with open(path, "w", encoding="utf-8") as handle:
        for triplet in triplets:
            handle.write(json.dumps(annotated_triplet_to_obj(triplet),
                                    ensure_ascii=False))
            handle.write("\n")
            count += 1
    return count
