"""Post-editing dynamics: who edits, what direction literality moves.

An edit pair joins an initial machine translation with its post-edited
version, each carrying an index score.  Pairs whose text did not change are
"unchanged"; altered pairs are split by the index delta into
deliteralizing (index fell), reliteralizing (index rose) and neutral moves,
using a small epsilon band so float jitter never flips a class.

The module also covers revision triggers (does a more literal draft get
edited more often?) and iterative-translation trajectories (does the index
fall across successive passes?).
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .corpus import FeatureRecord, LiteralisError
from .stats import CorrelationResult, point_biserial, spearman

DEFAULT_EPSILON = 0.005

UNCHANGED = "unchanged"
DELITERALIZING = "deliteralizing"
RELITERALIZING = "reliteralizing"
NEUTRAL = "neutral"

ALL_DOMAINS = "all"


class DynamicsError(LiteralisError, ValueError):
    """Invalid dynamics input (bad pairing, missing scores)."""


@dataclass(frozen=True, slots=True)
class DynamicsConfig:
    """Classification band: index moves within ``epsilon`` are neutral."""

    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self) -> None:
        if self.epsilon <= 0.0:
            raise ValueError(f"epsilon must be > 0, got {self.epsilon}")


@dataclass(slots=True)
class EditPair:
    """One initial translation matched with its post-edited version."""

    init_id: str
    pe_id: str
    lp: str
    system: str
    domain: str
    sli_init: float
    sli_pe: float
    same_text: bool
    init_record: FeatureRecord | None = None
    pe_record: FeatureRecord | None = None


def texts_match(a: str, b: str) -> bool:
    """Equality after NFC normalization and whitespace trimming."""
    return (unicodedata.normalize("NFC", a).strip()
            == unicodedata.normalize("NFC", b).strip())


def classify_edit(pair: EditPair, cfg: DynamicsConfig | None = None) -> str:
    """Classify one pair: unchanged, deliteralizing, reliteralizing, neutral.

    Unchanged is decided by text identity alone.  For altered pairs the
    delta must clear the epsilon band in either direction; deltas landing
    exactly on a band edge stay neutral.
    """
    if cfg is None:
        cfg = DynamicsConfig()
    if pair.same_text:
        return UNCHANGED
    if pair.sli_pe < pair.sli_init - cfg.epsilon:
        return DELITERALIZING
    if pair.sli_pe > pair.sli_init + cfg.epsilon:
        return RELITERALIZING
    return NEUTRAL


def build_edit_pairs(records: Iterable[FeatureRecord],
                     sli_by_id: Mapping[str, float]) -> list[EditPair]:
    """Join post-edit records to their initial counterparts.

    The link field may sit on either side of a pair; the record with the
    post-edit task is always treated as the edited version.  Pairs missing
    an index score on either side, or spanning two language pairs, are
    rejected.
    """
    by_id: dict[str, FeatureRecord] = {}
    for rec in records:
        by_id[rec.id] = rec

    pairs: list[EditPair] = []
    seen: set[tuple[str, str]] = set()
    for rec in by_id.values():
        counterpart_id = rec.sli_counterpart_id
        if counterpart_id is None:
            continue
        other = by_id.get(counterpart_id)
        if other is None:
            raise DynamicsError(
                f"record {rec.id!r} links to unknown id {counterpart_id!r}")
        if rec.task == "post_edit":
            init, pe = other, rec
        else:
            init, pe = rec, other
        key = (init.id, pe.id)
        if key in seen:
            continue
        seen.add(key)
        if init.lp != pe.lp:
            raise DynamicsError(
                f"pair ({init.id!r}, {pe.id!r}) spans language pairs "
                f"{init.lp!r} and {pe.lp!r}")
        for rec_id in key:
            if rec_id not in sli_by_id:
                raise DynamicsError(f"no index score for record {rec_id!r}")
        if pe.altered is not None:
            same_text = not pe.altered
        else:
            same_text = texts_match(init.hyp_text(), pe.hyp_text())
        pairs.append(EditPair(
            init_id=init.id,
            pe_id=pe.id,
            lp=init.lp,
            system=pe.system,
            domain=pe.domain,
            sli_init=sli_by_id[init.id],
            sli_pe=sli_by_id[pe.id],
            same_text=same_text,
            init_record=init,
            pe_record=pe,
        ))
    pairs.sort(key=lambda p: (p.pe_id, p.init_id))
    return pairs


@dataclass(frozen=True, slots=True)
class AlterationShare:
    """Fraction of pairs whose text changed, per LP and overall."""

    per_lp: dict[str, float]
    overall: float
    record_weighted: bool


def alteration_share(pairs: Sequence[EditPair], *,
                     record_weighted: bool = False) -> AlterationShare:
    """Share of altered pairs per language pair plus an overall figure.

    The overall number is the unweighted mean of the per-LP shares by
    default, so small language pairs count as much as large ones; the
    record-weighted variant pools all pairs.
    """
    if not pairs:
        raise DynamicsError("need at least one edit pair")
    totals: dict[str, int] = {}
    altered: dict[str, int] = {}
    for pair in pairs:
        totals[pair.lp] = totals.get(pair.lp, 0) + 1
        if not pair.same_text:
            altered[pair.lp] = altered.get(pair.lp, 0) + 1
    per_lp = {lp: altered.get(lp, 0) / totals[lp] for lp in sorted(totals)}
    if record_weighted:
        overall = sum(altered.values()) / sum(totals.values())
    else:
        overall = sum(per_lp.values()) / len(per_lp)
    return AlterationShare(per_lp=per_lp, overall=overall,
                           record_weighted=record_weighted)


@dataclass(frozen=True, slots=True)
class DynamicsRow:
    """Edit-direction tabulation for one (domain, system) group.

    Percentages are on a 0..100 scale.  Direction percentages cover altered
    pairs only; they are suppressed (None) when the group has no altered
    pairs, as is the unchanged/altered split for an empty group.
    """

    domain: str
    system: str
    n: int
    unchanged_n: int
    unchanged_pct: float | None
    altered_n: int
    altered_pct: float | None
    delit_pct: float | None
    relit_pct: float | None
    neutral_pct: float | None


def _tabulate(pairs: Sequence[EditPair], cfg: DynamicsConfig,
              domain: str, system: str) -> DynamicsRow:
    n = len(pairs)
    classes = [classify_edit(p, cfg) for p in pairs]
    unchanged_n = sum(1 for c in classes if c == UNCHANGED)
    altered_n = n - unchanged_n
    if n == 0:
        return DynamicsRow(domain, system, 0, 0, None, 0, None, None, None, None)
    unchanged_pct = 100.0 * unchanged_n / n
    altered_pct = 100.0 * altered_n / n
    if altered_n == 0:
        return DynamicsRow(domain, system, n, unchanged_n, unchanged_pct,
                           0, altered_pct, None, None, None)
    delit = sum(1 for c in classes if c == DELITERALIZING)
    relit = sum(1 for c in classes if c == RELITERALIZING)
    neutral = altered_n - delit - relit
    return DynamicsRow(
        domain, system, n, unchanged_n, unchanged_pct, altered_n, altered_pct,
        100.0 * delit / altered_n, 100.0 * relit / altered_n,
        100.0 * neutral / altered_n)


def dynamics_table(pairs: Sequence[EditPair],
                   cfg: DynamicsConfig | None = None) -> list[DynamicsRow]:
    """Edit-direction table grouped by system, overall and per domain.

    Rows for the all-domains scope come first, then per-domain blocks in
    sorted order; systems are sorted within each block.  Only observed
    groups are emitted.
    """
    if cfg is None:
        cfg = DynamicsConfig()
    if not pairs:
        raise DynamicsError("need at least one edit pair")
    by_group: dict[tuple[str, str], list[EditPair]] = {}
    for pair in pairs:
        by_group.setdefault((ALL_DOMAINS, pair.system), []).append(pair)
        by_group.setdefault((pair.domain, pair.system), []).append(pair)

    def sort_key(key: tuple[str, str]) -> tuple[int, str, str]:
        domain, system = key
        return (0 if domain == ALL_DOMAINS else 1, domain, system)

    return [_tabulate(by_group[key], cfg, *key)
            for key in sorted(by_group, key=sort_key)]


@dataclass(frozen=True, slots=True)
class TriggerRow:
    """Revision-trigger correlations for one system.

    Correlates the initial index score with whether the pair was altered.
    Systems whose pairs are all altered or all unchanged admit no
    correlation and carry a note instead.
    """

    system: str
    n: int
    pb: CorrelationResult | None
    sp: CorrelationResult | None
    note: str | None = None


def revision_trigger(pairs: Sequence[EditPair], *, seed: int,
                     n_permutations: int = 10_000) -> list[TriggerRow]:
    """Per-system correlation of initial literality with being edited."""
    if not pairs:
        raise DynamicsError("need at least one edit pair")
    by_system: dict[str, list[EditPair]] = {}
    for pair in pairs:
        by_system.setdefault(pair.system, []).append(pair)

    rows: list[TriggerRow] = []
    for system in sorted(by_system):
        group = by_system[system]
        altered = [0 if p.same_text else 1 for p in group]
        scores = [p.sli_init for p in group]
        n = len(group)
        if len(set(altered)) < 2:
            rows.append(TriggerRow(system, n, None, None,
                                   note="single-class: every pair "
                                        + ("altered" if altered[0] else "unchanged")))
            continue
        try:
            pb = point_biserial(altered, scores, seed=seed,
                                n_permutations=n_permutations)
            sp = spearman(scores, altered, seed=seed,
                          n_permutations=n_permutations)
        except ValueError as exc:
            rows.append(TriggerRow(system, n, None, None, note=str(exc)))
            continue
        rows.append(TriggerRow(system, n, pb, sp))
    return rows


@dataclass(frozen=True, slots=True)
class TrajectoryCell:
    """Mean index for one (system, position) in iterative translation."""

    system: str
    position: int
    mean_sli: float
    n: int
    n_lps: int


@dataclass(frozen=True, slots=True)
class TrajectoryReport:
    cells: list[TrajectoryCell]
    strictly_decreasing: dict[str, bool]
    record_weighted: bool


def trajectory(rows: Iterable[tuple[str, str, int, float]], *,
               record_weighted: bool = False) -> TrajectoryReport:
    """Mean index per (system, position) over iterative passes.

    Input rows are (lp, system, position, score).  Cell means average the
    per-LP means by default so every language pair weighs equally; the
    record-weighted variant pools records.  A system is flagged strictly
    decreasing when each successive position mean is lower than the last
    (at least two positions required).
    """
    cells_by_key: dict[tuple[str, int], dict[str, list[float]]] = {}
    for lp, system, position, score in rows:
        if position is None or position < 1:
            raise DynamicsError(f"position must be an integer >= 1, got {position!r}")
        cells_by_key.setdefault((system, position), {}).setdefault(
            lp, []).append(score)
    if not cells_by_key:
        raise DynamicsError("no iterative rows to aggregate")

    cells: list[TrajectoryCell] = []
    for system, position in sorted(cells_by_key):
        per_lp = cells_by_key[(system, position)]
        n = sum(len(v) for v in per_lp.values())
        if record_weighted:
            mean = sum(sum(v) for v in per_lp.values()) / n
        else:
            lp_means = [sum(v) / len(v) for v in per_lp.values()]
            mean = sum(lp_means) / len(lp_means)
        cells.append(TrajectoryCell(system, position, mean, n, len(per_lp)))

    flags: dict[str, bool] = {}
    by_system: dict[str, list[TrajectoryCell]] = {}
    for cell in cells:
        by_system.setdefault(cell.system, []).append(cell)
    for system, group in by_system.items():
        means = [c.mean_sli for c in sorted(group, key=lambda c: c.position)]
        flags[system] = len(means) >= 2 and all(
            later < earlier for earlier, later in zip(means, means[1:]))

    return TrajectoryReport(cells=cells, strictly_decreasing=flags,
                            record_weighted=record_weighted)
