"""Synthetic literality index: normalization, weighting, scoring.

Raw signals live on incomparable scales, so each is min-max normalized per
language pair using ranges fitted over a reference corpus.  Normalized
signals are combined by a softmax weighting of per-signal validity scores
(triplet hit rates): signals that separate literal from idiomatic
translations more reliably get more weight.  The result is a single score
in [0, 1]; higher reads as more literal.

``crossings`` never enters the index.  It is the one negative-polarity
signal and its raw count scale is unbounded; it stays a diagnostic.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Mapping

from .corpus import LiteralisError
from .signals import SignalVector

# Signals eligible for index aggregation, with their default validity
# scores (fraction of validation triplets where the signal ranks the
# literal candidate above the idiomatic one).
DEFAULT_HIT_RATES: dict[str, float] = {
    "seg_sem": 0.99,
    "tok_sim_pen": 0.98,
    "tok_sim_raw": 0.95,
    "density": 0.90,
    "tree_sim": 0.75,
    "pos_sim": 0.73,
}

DEFAULT_TEMPERATURE = 0.5

ELIGIBLE_SIGNALS = tuple(DEFAULT_HIT_RATES)


class SliError(LiteralisError, ValueError):
    """Index computation is impossible for a record (no usable signal)."""


@dataclass(frozen=True)
class SliConfig:
    """Weighting configuration: per-signal validity scores and temperature."""

    hit_rates: Mapping[str, float] = field(
        default_factory=lambda: dict(DEFAULT_HIT_RATES))
    temperature: float = DEFAULT_TEMPERATURE

    def __post_init__(self) -> None:
        if self.temperature <= 0.0:
            raise ValueError(f"temperature must be > 0, got {self.temperature}")
        if not self.hit_rates:
            raise ValueError("hit_rates must not be empty")
        for name, value in self.hit_rates.items():
            if name == "crossings":
                raise ValueError("crossings is not eligible for the index")
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"hit rate for {name} outside [0, 1]: {value}")

    @property
    def eligible(self) -> tuple[str, ...]:
        return tuple(self.hit_rates)

    def to_obj(self) -> dict:
        return {"temperature": self.temperature,
                "hit_rates": dict(self.hit_rates)}

    @classmethod
    def from_obj(cls, obj: Mapping) -> "SliConfig":
        return cls(hit_rates=dict(obj.get("hit_rates", DEFAULT_HIT_RATES)),
                   temperature=obj.get("temperature", DEFAULT_TEMPERATURE))

    @classmethod
    def load(cls, path: str | Path) -> "SliConfig":
        with open(path, "r", encoding="utf-8") as handle:
            return cls.from_obj(json.load(handle))

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as handle:
            json.dump(self.to_obj(), handle, ensure_ascii=False, indent=2,
                      sort_keys=True)
            handle.write("\n")


class Normalizer:
    """Per-group min/max ranges for each signal.

    Groups are language pairs by default; fitting with per-task splits uses
    composite group keys.  A signal absent from a group's ranges was never
    observed there and is treated as unavailable when scoring.
    """

    def __init__(self, *, per_task: bool = False) -> None:
        self.per_task = per_task
        self._ranges: dict[str, dict[str, tuple[float, float]]] = {}

    @staticmethod
    def group_key(lp: str, task: str | None = None, *, per_task: bool = False) -> str:
        if per_task:
            if task is None:
                raise ValueError("per-task normalizer needs a task")
            return f"{lp}/{task}"
        return lp

    def observe(self, group: str, signal: str, value: float) -> None:
        ranges = self._ranges.setdefault(group, {})
        current = ranges.get(signal)
        if current is None:
            ranges[signal] = (value, value)
        else:
            lo, hi = current
            ranges[signal] = (value if value < lo else lo,
                              value if value > hi else hi)

    def range(self, group: str, signal: str) -> tuple[float, float] | None:
        ranges = self._ranges.get(group)
        if ranges is None:
            return None
        return ranges.get(signal)

    def groups(self) -> tuple[str, ...]:
        return tuple(sorted(self._ranges))

    def merge(self, other: "Normalizer") -> None:
        """Fold another normalizer in; fitting shards then merging equals
        fitting the concatenated stream."""
        if other.per_task != self.per_task:
            raise ValueError("cannot merge normalizers with different grouping")
        for group, ranges in other._ranges.items():
            for signal, (lo, hi) in ranges.items():
                self.observe(group, signal, lo)
                self.observe(group, signal, hi)

    def to_obj(self) -> dict:
        groups = {
            group: {
                signal: {"min": lo, "max": hi}
                for signal, (lo, hi) in sorted(ranges.items())
            }
            for group, ranges in sorted(self._ranges.items())
        }
        return {"fmt": 1, "per_task": self.per_task, "groups": groups}

    @classmethod
    def from_obj(cls, obj: Mapping) -> "Normalizer":
        if obj.get("fmt") != 1:
            raise ValueError("unsupported normalizer format")
        norm = cls(per_task=bool(obj.get("per_task", False)))
        for group, ranges in obj.get("groups", {}).items():
            for signal, bounds in ranges.items():
                lo, hi = float(bounds["min"]), float(bounds["max"])
                if lo > hi:
                    raise ValueError(
                        f"invalid range for ({group}, {signal}): min {lo} > max {hi}")
                norm.observe(group, signal, lo)
                norm.observe(group, signal, hi)
        return norm

    @classmethod
    def load(cls, path: str | Path) -> "Normalizer":
        with open(path, "r", encoding="utf-8") as handle:
            return cls.from_obj(json.load(handle))

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as handle:
            json.dump(self.to_obj(), handle, ensure_ascii=False, indent=2,
                      sort_keys=True)
            handle.write("\n")


def fit_normalizers(stream: Iterable[tuple[str, SignalVector]], *,
                    signals: Iterable[str] = ELIGIBLE_SIGNALS,
                    per_task: bool = False) -> Normalizer:
    """Fit per-group ranges from a stream of (group, signal vector).

    Missing values are skipped, so a signal only ever observed as missing
    stays unavailable for its group.  The result is insensitive to stream
    order and to sharding (ranges are merged extrema).
    """
    wanted = tuple(signals)
    norm = Normalizer(per_task=per_task)
    for group, vec in stream:
        for signal in wanted:
            value = getattr(vec, signal)
            if value is not None:
                norm.observe(group, signal, float(value))
    return norm


def normalize(x: float, lo: float, hi: float) -> float:
    """Min-max normalize into [0, 1], clamping out-of-range inputs.

    A zero-width range carries no ordering information; every value maps to
    the neutral 0.5.
    """
    if lo > hi:
        raise ValueError(f"invalid range: min {lo} > max {hi}")
    if lo == hi:
        return 0.5
    if x <= lo:
        return 0.0
    if x >= hi:
        return 1.0
    return (x - lo) / (hi - lo)


def softmax_weights(cfg: SliConfig,
                    available: Iterable[str] | None = None) -> dict[str, float]:
    """Softmax of validity scores over the available signal subset.

    Weights are strictly positive and sum to 1.  Temperature sharpens
    (small) or flattens (large) the distribution; as it grows the weights
    approach uniform.
    """
    names = tuple(available) if available is not None else cfg.eligible
    if not names:
        raise SliError("no signals available for weighting")
    scores = []
    for name in names:
        if name not in cfg.hit_rates:
            raise SliError(f"signal {name!r} has no configured hit rate")
        scores.append(cfg.hit_rates[name] / cfg.temperature)
    # Shift by the max so extreme temperatures cannot overflow exp.
    top = max(scores)
    exps = [math.exp(s - top) for s in scores]
    total = sum(exps)
    return {name: e / total for name, e in zip(names, exps)}


def sli(vec: SignalVector, norm: Normalizer, cfg: SliConfig, lp: str, *,
        task: str | None = None) -> float:
    """Index value for one record's signals.

    Uses the eligible signals that are present in the vector and have a
    fitted range for the record's group; weights are renormalized over that
    subset.  Raises :class:`SliError` when no eligible signal is usable.
    """
    return SliModel(norm, cfg).score(vec, lp, task=task)


class SliModel:
    """Bundles normalizer and config; caches weights, counts clamps.

    ``clamp_count`` tracks raw values falling outside their fitted range
    (possible when the normalizer was fitted on a different corpus);
    ``renormalized_count`` tracks records scored from a proper subset of
    the eligible signals.
    """

    def __init__(self, norm: Normalizer, cfg: SliConfig | None = None) -> None:
        self.norm = norm
        self.cfg = cfg if cfg is not None else SliConfig()
        self.clamp_count = 0
        self.renormalized_count = 0
        self._weight_cache: dict[tuple[str, ...], dict[str, float]] = {}

    def _weights(self, names: tuple[str, ...]) -> dict[str, float]:
        cached = self._weight_cache.get(names)
        if cached is None:
            cached = softmax_weights(self.cfg, names)
            self._weight_cache[names] = cached
        return cached

    def score(self, vec: SignalVector, lp: str, *, task: str | None = None) -> float:
        group = Normalizer.group_key(lp, task, per_task=self.norm.per_task)
        names: list[str] = []
        values: list[float] = []
        for signal in self.cfg.eligible:
            raw = getattr(vec, signal)
            if raw is None:
                continue
            bounds = self.norm.range(group, signal)
            if bounds is None:
                continue
            lo, hi = bounds
            x = float(raw)
            if lo != hi and (x < lo or x > hi):
                self.clamp_count += 1
            names.append(signal)
            values.append(normalize(x, lo, hi))
        if not names:
            raise SliError(
                f"no eligible signal usable for group {group!r}; "
                f"present={vec.present()}")
        if len(names) < len(self.cfg.eligible):
            self.renormalized_count += 1
        weights = self._weights(tuple(names))
        value = 0.0
        for name, x in zip(names, values):
            value += weights[name] * x
        # Weighted mean of values in [0, 1]; trim float residue.
        if value < 0.0:
            return 0.0
        if value > 1.0:
            return 1.0
        return value

    def score_stream(self, stream: Iterable[tuple[str, str | None, SignalVector]]
                     ) -> Iterator[float]:
        for lp, task, vec in stream:
            yield self.score(vec, lp, task=task)
