"""Nonparametric significance testing and agreement measures.

Everything here is deterministic given (inputs, seed, resample count):
resampling draws come from a single seeded PCG64 generator consumed in a
fixed schedule, so results do not depend on worker counts or chunk sizes.

Resampling p-values use add-one smoothing, (r + 1) / (n + 1), which keeps
reported significance honest at the resolution the resample count supports
(never exactly zero).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Hashable, Mapping, Sequence

import numpy as np

# Cap on elements materialized per resampling block; the block schedule is
# a pure function of the input sizes, so results stay deterministic.
_BLOCK_ELEMENTS = 2_000_000


@dataclass(frozen=True, slots=True)
class BootstrapResult:
    """Outcome of a bootstrap mean-difference test."""

    mean_diff: float
    p_value: float
    n_resamples: int
    seed: int
    n: int
    method: str

    @property
    def significant(self) -> bool:
        return self.p_value < 0.05


@dataclass(frozen=True, slots=True)
class CorrelationResult:
    """A correlation coefficient with a permutation p-value."""

    coefficient: float
    p_value: float
    n: int
    method: str


def _two_sided_opposite_tail(mean_diff: float, opposite: int, n_resamples: int) -> float:
    if mean_diff == 0.0:
        return 1.0
    p = 2.0 * (opposite + 1) / (n_resamples + 1)
    return min(1.0, p)


def paired_bootstrap(a: Mapping[str, float], b: Mapping[str, float], *,
                     n_resamples: int = 10_000, seed: int) -> BootstrapResult:
    """Paired bootstrap test on per-segment score differences.

    Scores are matched over the shared ids; the statistic is the mean of
    the paired differences.  The two-sided p-value is the smoothed fraction
    of resampled means falling on the opposite side of zero from the
    observed mean.
    """
    if n_resamples < 1:
        raise ValueError(f"n_resamples must be >= 1, got {n_resamples}")
    ids = sorted(set(a) & set(b))
    if not ids:
        raise ValueError("no shared ids between the two score maps")
    diffs = np.array([a[i] - b[i] for i in ids], dtype=np.float64)
    mean_diff = float(diffs.mean())

    rng = np.random.default_rng(seed)
    n = diffs.size
    block = max(1, min(n_resamples, _BLOCK_ELEMENTS // n))
    opposite = 0
    done = 0
    while done < n_resamples:
        rows = min(block, n_resamples - done)
        idx = rng.integers(0, n, size=(rows, n))
        means = diffs[idx].mean(axis=1)
        if mean_diff > 0.0:
            opposite += int(np.count_nonzero(means <= 0.0))
        elif mean_diff < 0.0:
            opposite += int(np.count_nonzero(means >= 0.0))
        done += rows

    p = _two_sided_opposite_tail(mean_diff, opposite, n_resamples)
    return BootstrapResult(mean_diff=mean_diff, p_value=p,
                           n_resamples=n_resamples, seed=seed, n=n,
                           method="paired_bootstrap")


def unpaired_bootstrap(a: Sequence[float], b: Sequence[float], *,
                       n_resamples: int = 10_000, seed: int) -> BootstrapResult:
    """Two-sample bootstrap fallback for score sets with no shared ids.

    Each group is resampled independently; otherwise mirrors
    :func:`paired_bootstrap`.  The method tag marks results as unpaired so
    reports cannot silently pass them off as matched comparisons.
    """
    if n_resamples < 1:
        raise ValueError(f"n_resamples must be >= 1, got {n_resamples}")
    xs = np.asarray(a, dtype=np.float64)
    ys = np.asarray(b, dtype=np.float64)
    if xs.size == 0 or ys.size == 0:
        raise ValueError("both groups must be non-empty")
    mean_diff = float(xs.mean() - ys.mean())

    rng = np.random.default_rng(seed)
    per_row = xs.size + ys.size
    block = max(1, min(n_resamples, _BLOCK_ELEMENTS // per_row))
    opposite = 0
    done = 0
    while done < n_resamples:
        rows = min(block, n_resamples - done)
        idx_a = rng.integers(0, xs.size, size=(rows, xs.size))
        idx_b = rng.integers(0, ys.size, size=(rows, ys.size))
        means = xs[idx_a].mean(axis=1) - ys[idx_b].mean(axis=1)
        if mean_diff > 0.0:
            opposite += int(np.count_nonzero(means <= 0.0))
        elif mean_diff < 0.0:
            opposite += int(np.count_nonzero(means >= 0.0))
        done += rows

    p = _two_sided_opposite_tail(mean_diff, opposite, n_resamples)
    return BootstrapResult(mean_diff=mean_diff, p_value=p,
                           n_resamples=n_resamples, seed=seed,
                           n=min(xs.size, ys.size), method="unpaired_bootstrap")


def _average_ranks(row: np.ndarray) -> np.ndarray:
    """Ranks 1..k with ties sharing their average rank."""
    order = np.argsort(row, kind="stable")
    ranks = np.empty(row.size, dtype=np.float64)
    i = 0
    while i < row.size:
        j = i
        while j + 1 < row.size and row[order[j + 1]] == row[order[i]]:
            j += 1
        avg = (i + j) / 2.0 + 1.0
        for m in range(i, j + 1):
            ranks[order[m]] = avg
        i = j + 1
    return ranks


def _gamma_upper_series(a: float, x: float) -> float:
    # Lower-tail series, returned as 1 - P(a, x); converges fast for x < a + 1.
    term = 1.0 / a
    total = term
    n = 0
    while True:
        n += 1
        term *= x / (a + n)
        total += term
        if abs(term) < abs(total) * 1e-16 or n > 10_000:
            break
    log_p = -x + a * math.log(x) - math.lgamma(a)
    return 1.0 - total * math.exp(log_p)


def _gamma_upper_contfrac(a: float, x: float) -> float:
    # Modified Lentz continued fraction for Q(a, x); best for x >= a + 1.
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 10_001):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    log_q = -x + a * math.log(x) - math.lgamma(a)
    return math.exp(log_q) * h


def gammaincc_regularized(a: float, x: float) -> float:
    """Regularized upper incomplete gamma Q(a, x) for a > 0, x >= 0."""
    if a <= 0.0:
        raise ValueError(f"shape parameter must be > 0, got {a}")
    if x < 0.0:
        raise ValueError(f"argument must be >= 0, got {x}")
    if x == 0.0:
        return 1.0
    if x < a + 1.0:
        q = _gamma_upper_series(a, x)
    else:
        q = _gamma_upper_contfrac(a, x)
    return max(0.0, min(1.0, q))


def chi2_sf(x: float, df: int) -> float:
    """Chi-square upper tail probability with ``df`` degrees of freedom."""
    if df < 1:
        raise ValueError(f"degrees of freedom must be >= 1, got {df}")
    if x <= 0.0:
        return 1.0
    return gammaincc_regularized(df / 2.0, x / 2.0)


def friedman(scores: Sequence[Sequence[float]] | np.ndarray) -> tuple[float, float]:
    """Tie-corrected Friedman test over an (n subjects, k treatments) matrix.

    Subjects are ranked within rows (average ranks for ties).  Returns the
    chi-square statistic with k - 1 degrees of freedom and its upper-tail
    p-value.  A matrix whose rows are all fully tied carries no ordering
    information: statistic 0, p-value 1.
    """
    arr = np.asarray(scores, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {arr.shape}")
    n, k = arr.shape
    if n < 2:
        raise ValueError(f"need at least 2 subjects, got {n}")
    if k < 2:
        raise ValueError(f"need at least 2 treatments, got {k}")
    if not np.isfinite(arr).all():
        raise ValueError("matrix has missing or non-finite cells")

    rank_sums = np.zeros(k, dtype=np.float64)
    tie_mass = 0.0
    for row in arr:
        ranks = _average_ranks(row)
        rank_sums += ranks
        _, counts = np.unique(row, return_counts=True)
        tie_mass += float((counts.astype(np.float64) ** 3 - counts).sum())

    correction = 1.0 - tie_mass / (n * k * (k * k - 1))
    if correction == 0.0:
        return 0.0, 1.0
    raw = 12.0 / (n * k * (k + 1)) * float((rank_sums ** 2).sum()) - 3.0 * n * (k + 1)
    statistic = raw / correction
    if statistic < 0.0:
        statistic = 0.0
    return statistic, chi2_sf(statistic, k - 1)


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Pearson correlation coefficient (no p-value)."""
    xs = np.asarray(x, dtype=np.float64)
    ys = np.asarray(y, dtype=np.float64)
    if xs.size != ys.size:
        raise ValueError(f"length mismatch: {xs.size} vs {ys.size}")
    if xs.size < 2:
        raise ValueError("need at least 2 observations")
    dx = xs - xs.mean()
    dy = ys - ys.mean()
    sx = math.sqrt(float(dx @ dx))
    sy = math.sqrt(float(dy @ dy))
    if sx == 0.0 or sy == 0.0:
        raise ValueError("correlation undefined for a constant vector")
    r = float(dx @ dy) / (sx * sy)
    return max(-1.0, min(1.0, r))


def _permutation_p(observed: float, permuted: np.ndarray) -> float:
    extreme = int(np.count_nonzero(np.abs(permuted) >= abs(observed)))
    return (extreme + 1) / (permuted.size + 1)


def point_biserial(binary: Sequence[int], cont: Sequence[float], *,
                   n_permutations: int = 10_000, seed: int) -> CorrelationResult:
    """Point-biserial correlation with a permutation p-value.

    The coefficient equals the Pearson correlation of the 0/1 coding with
    the continuous variable; it is computed from the two group means, which
    makes negating the coding flip the sign exactly.  The p-value permutes
    the binary labels and counts permutations at least as extreme in
    absolute value.
    """
    b = np.asarray(binary)
    c = np.asarray(cont, dtype=np.float64)
    if b.size != c.size:
        raise ValueError(f"length mismatch: {b.size} vs {c.size}")
    if not np.isin(b, (0, 1)).all():
        raise ValueError("binary vector must contain only 0 and 1")
    b = b.astype(np.int64)
    n1 = int(b.sum())
    n0 = b.size - n1
    if n1 == 0 or n0 == 0:
        raise ValueError("binary vector has a single class")
    sd = float(c.std())
    if sd == 0.0:
        raise ValueError("correlation undefined for a constant vector")

    n = b.size
    mask = b == 1
    mean_1 = float(c[mask].mean())
    mean_0 = float(c[~mask].mean())
    r = (mean_1 - mean_0) * math.sqrt(n1 * n0) / (n * sd)
    r = max(-1.0, min(1.0, r))

    # Permutations share one centered copy of the data; each draw costs
    # one shuffle and one dot product.
    rng = np.random.default_rng(seed)
    dc = c - c.mean()
    denom = math.sqrt(n1 * n0) * sd
    work = (b - n1 / n).astype(np.float64)
    permuted = np.empty(n_permutations, dtype=np.float64)
    for t in range(n_permutations):
        rng.shuffle(work)
        permuted[t] = float(work @ dc) / denom

    return CorrelationResult(coefficient=r,
                             p_value=_permutation_p(r, permuted),
                             n=n, method="point_biserial")


def _rank_vector(values: np.ndarray) -> np.ndarray:
    return _average_ranks(values)


def spearman(x: Sequence[float], y: Sequence[float], *,
             n_permutations: int = 10_000, seed: int) -> CorrelationResult:
    """Spearman rank correlation with a permutation p-value.

    Values are converted to average ranks (ties share ranks) and the
    coefficient is the Pearson correlation of the rank vectors.
    """
    xs = np.asarray(x, dtype=np.float64)
    ys = np.asarray(y, dtype=np.float64)
    if xs.size != ys.size:
        raise ValueError(f"length mismatch: {xs.size} vs {ys.size}")
    if xs.size < 2:
        raise ValueError("need at least 2 observations")
    rx = _rank_vector(xs)
    ry = _rank_vector(ys)
    if np.all(rx == rx[0]) or np.all(ry == ry[0]):
        raise ValueError("correlation undefined for fully tied ranks")
    rho = pearson(rx, ry)

    rng = np.random.default_rng(seed)
    n = rx.size
    dx = rx - rx.mean()
    dy = ry - ry.mean()
    denom = math.sqrt(float(dx @ dx)) * math.sqrt(float(dy @ dy))
    permuted = np.empty(n_permutations, dtype=np.float64)
    work = dx.copy()
    for t in range(n_permutations):
        rng.shuffle(work)
        permuted[t] = float(work @ dy) / denom

    return CorrelationResult(coefficient=rho,
                             p_value=_permutation_p(rho, permuted),
                             n=n, method="spearman")


def cohen_kappa(a: Sequence[Hashable], b: Sequence[Hashable]) -> float:
    """Chance-corrected agreement between two label sequences.

    kappa = (observed agreement - chance agreement) / (1 - chance
    agreement), with chance agreement computed from the two marginal label
    distributions.  Degenerate marginals (chance agreement of 1) admit no
    correction and raise ValueError.
    """
    if len(a) != len(b):
        raise ValueError(f"length mismatch: {len(a)} vs {len(b)}")
    n = len(a)
    if n == 0:
        raise ValueError("need at least 1 observation")
    observed = sum(1 for u, v in zip(a, b) if u == v) / n
    counts_a: dict[Hashable, int] = {}
    counts_b: dict[Hashable, int] = {}
    for u in a:
        counts_a[u] = counts_a.get(u, 0) + 1
    for v in b:
        counts_b[v] = counts_b.get(v, 0) + 1
    expected = sum((counts_a.get(label, 0) / n) * (counts_b.get(label, 0) / n)
                   for label in set(counts_a) | set(counts_b))
    if expected == 1.0:
        raise ValueError("chance agreement is 1; kappa undefined")
    return (observed - expected) / (1.0 - expected)
