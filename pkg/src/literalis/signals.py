"""Per-record literality heuristics.

Seven signals are computed from a feature record:

- ``pos_sim``: normalized longest-common-subsequence ratio of the two POS
  tag sequences, ``2 * |LCS| / (|src| + |hyp|)``.
- ``tree_sim``: Jaccard overlap of dependency arc-type sets.
- ``density``: aligned pairs per token, ``|A| / max(|src|, |hyp|)``,
  clamped into [0, 1].
- ``crossings``: number of inverted alignment pairs, i.e. pairs of links
  that cross when the alignment is sorted by source index.
- ``seg_sem``: segment-level embedding cosine (taken from the record).
- ``tok_sim_raw``: mean cosine over aligned token pairs.
- ``tok_sim_pen``: coverage-penalized token similarity,
  ``tok_sim_raw * density``, floored at 0.

All but ``crossings`` are oriented so that larger means more literal;
``crossings`` grows with reordering, so its polarity is negative.  Signals
that need annotations a record lacks come back as missing (``None``) rather
than failing: a corpus mixing parsed and parser-less languages scores
cleanly either way.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .corpus import FeatureRecord, LiteralisError

SIGNAL_NAMES = (
    "pos_sim",
    "tree_sim",
    "density",
    "crossings",
    "seg_sem",
    "tok_sim_raw",
    "tok_sim_pen",
)

# Inversion counting switches to vectorized comparison above this size.
_CROSSINGS_NUMPY_MIN = 32


class DegenerateInputError(LiteralisError, ValueError):
    """A record cannot be scored because a token sequence is empty."""


@dataclass(slots=True)
class SignalVector:
    """Signal values for one record; ``None`` marks a missing signal.

    ``density_clamped`` reports that the raw alignment density exceeded 1
    (many-to-many alignments) and was clamped; it is bookkeeping, not a
    signal.
    """

    pos_sim: float | None = None
    tree_sim: float | None = None
    density: float | None = None
    crossings: int | None = None
    seg_sem: float | None = None
    tok_sim_raw: float | None = None
    tok_sim_pen: float | None = None
    density_clamped: bool = False

    def get(self, name: str) -> float | int | None:
        if name not in SIGNAL_NAMES:
            raise KeyError(f"unknown signal {name!r}")
        return getattr(self, name)

    def present(self) -> tuple[str, ...]:
        return tuple(s for s in SIGNAL_NAMES if getattr(self, s) is not None)

    def to_obj(self) -> dict[str, float | int | None]:
        return {s: getattr(self, s) for s in SIGNAL_NAMES}


def _lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    """Length of the longest common subsequence.

    Bit-parallel row update: the DP row is carried in one arbitrary-precision
    integer, one bit per position of ``b``, so each row costs a handful of
    integer operations instead of |b| cell updates.
    """
    if not a or not b:
        return 0
    masks: dict[str, int] = {}
    bit = 1
    for symbol in b:
        masks[symbol] = masks.get(symbol, 0) | bit
        bit <<= 1
    row = 0
    get = masks.get
    for symbol in a:
        x = row | get(symbol, 0)
        row = x & ~(x - ((row << 1) | 1))
    return row.bit_count()


def lcs_ratio(a: Sequence[str], b: Sequence[str]) -> float | None:
    """Normalized LCS similarity ``2 * |LCS| / (|a| + |b|)``.

    Missing (``None``) when both sequences are empty; 0.0 when exactly one
    is.  Symmetric in its arguments and equal to 1.0 iff the sequences are
    identical.
    """
    if not a and not b:
        return None
    if not a or not b:
        return 0.0
    return 2.0 * _lcs_length(a, b) / (len(a) + len(b))


def pos_sim(rec: FeatureRecord) -> float | None:
    """POS-sequence similarity; missing without tags on both sides."""
    if rec.src_pos is None or rec.hyp_pos is None:
        return None
    return lcs_ratio(rec.src_pos, rec.hyp_pos)


def tree_sim(rec: FeatureRecord) -> float | None:
    """Jaccard overlap of arc-type sets; missing without parses.

    Two empty sets give no evidence either way, so the value is missing
    rather than 0 or 1.
    """
    if rec.src_arcs is None or rec.hyp_arcs is None:
        return None
    union = len(rec.src_arcs | rec.hyp_arcs)
    if union == 0:
        return None
    return len(rec.src_arcs & rec.hyp_arcs) / union


def _density_parts(n_links: int, n_src: int, n_hyp: int) -> tuple[float, bool]:
    if n_src == 0 or n_hyp == 0:
        raise DegenerateInputError(
            f"cannot score a segment with empty tokens "
            f"(src has {n_src}, hyp has {n_hyp})")
    value = n_links / (n_src if n_src > n_hyp else n_hyp)
    if value > 1.0:
        return 1.0, True
    return value, False


def density(rec: FeatureRecord) -> float:
    """Alignment coverage ``|A| / max(|src|, |hyp|)`` clamped into [0, 1].

    Many-to-many alignments can push the raw ratio above 1; the value is
    clamped and the event is reported through ``score_record``.
    """
    value, _ = _density_parts(len(rec.alignment), len(rec.src_tokens),
                              len(rec.hyp_tokens))
    return value


def _count_inversions(js: list[int]) -> int:
    n = len(js)
    if n < _CROSSINGS_NUMPY_MIN:
        count = 0
        seen: list[int] = []
        right = bisect.bisect_right
        insort = bisect.insort
        for jm in js:
            count += len(seen) - right(seen, jm)
            insort(seen, jm)
        return count
    arr = np.asarray(js)
    greater = arr[:, None] > arr[None, :]
    return int(np.triu(greater, k=1).sum())


def crossings(rec: FeatureRecord) -> int:
    """Count crossing link pairs in the alignment.

    Links are sorted by (source index, target index); the count is the
    number of inversions in the resulting target-index sequence.  Ties in
    either coordinate never count as crossings, so monotone alignments and
    pure fan-outs score 0.
    """
    links = rec.alignment
    if len(links) < 2:
        return 0
    ordered = sorted(links)
    return _count_inversions([j for _, j in ordered])


def cosine(u: Sequence[float] | np.ndarray, v: Sequence[float] | np.ndarray) -> float:
    """Cosine similarity of two equal-dimension vectors, clamped to [-1, 1].

    Raises ValueError for a zero vector or a dimensionality mismatch.
    """
    a = np.asarray(u, dtype=np.float64)
    b = np.asarray(v, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    norm_a = math.sqrt(float(a @ a))
    norm_b = math.sqrt(float(b @ b))
    if norm_a == 0.0 or norm_b == 0.0:
        raise ValueError("cosine undefined for a zero vector")
    value = float(a @ b) / (norm_a * norm_b)
    # Rounding can push |value| a few ulp past 1.
    return max(-1.0, min(1.0, value))


def tok_sim_raw(rec: FeatureRecord) -> float | None:
    """Mean cosine over aligned token pairs; missing when nothing aligns."""
    if not rec.pair_cos:
        return None
    return sum(rec.pair_cos) / len(rec.pair_cos)


def tok_sim_pen(rec: FeatureRecord) -> float:
    """Coverage-penalized token similarity ``tok_sim_raw * density``.

    An empty alignment scores 0: no aligned mass, no credit.  Negative mean
    cosines are floored at 0 so the signal stays in [0, 1].
    """
    value, _ = _density_parts(len(rec.alignment), len(rec.src_tokens),
                              len(rec.hyp_tokens))
    if not rec.pair_cos:
        return 0.0
    raw = sum(rec.pair_cos) / len(rec.pair_cos)
    pen = raw * value
    return pen if pen > 0.0 else 0.0


def score_record(rec: FeatureRecord) -> SignalVector:
    """Compute all seven signals for one record.

    Signals whose inputs are absent come back missing; the only error is a
    degenerate record with an empty token sequence.  Equivalent to calling
    the per-signal functions one by one, but shares intermediate values.
    """
    n_src = len(rec.src_tokens)
    n_hyp = len(rec.hyp_tokens)
    links = rec.alignment
    dens, clamped = _density_parts(len(links), n_src, n_hyp)

    if rec.pair_cos:
        raw: float | None = sum(rec.pair_cos) / len(rec.pair_cos)
        pen = raw * dens
        if pen < 0.0:
            pen = 0.0
    else:
        raw = None
        pen = 0.0

    if len(links) < 2:
        n_cross = 0
    else:
        n_cross = _count_inversions([j for _, j in sorted(links)])

    return SignalVector(
        pos_sim=pos_sim(rec),
        tree_sim=tree_sim(rec),
        density=dens,
        crossings=n_cross,
        seg_sem=rec.seg_cos,
        tok_sim_raw=raw,
        tok_sim_pen=pen,
        density_clamped=clamped,
    )
