"""Signal functions against independent reference implementations.

The oracles here are deliberately naive: a quadratic DP table for the LCS,
a definitional pairwise loop for crossings, and explicit element counting
for the arc overlap.  The production code must agree with them exactly.
"""

from __future__ import annotations

import itertools
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from literalis import (DegenerateInputError, SignalVector, cosine, crossings,
                       density, lcs_ratio, pos_sim, score_record, tok_sim_pen,
                       tok_sim_raw, tree_sim)
from literalis.signals import SIGNAL_NAMES

from support import identity_record, make_record

UPOS_TAGS = ("ADJ", "ADP", "ADV", "AUX", "CCONJ", "DET", "INTJ", "NOUN",
             "NUM", "PART", "PRON", "PROPN", "PUNCT", "SCONJ", "SYM",
             "VERB", "X")


def lcs_length_dp(a, b):
    """Classic quadratic DP table; the reference for LCS length."""
    m, n = len(a), len(b)
    table = [[0] * (n + 1) for _ in range(m + 1)]
    for i in range(1, m + 1):
        for j in range(1, n + 1):
            if a[i - 1] == b[j - 1]:
                table[i][j] = table[i - 1][j - 1] + 1
            else:
                table[i][j] = max(table[i - 1][j], table[i][j - 1])
    return table[m][n]


def crossings_oracle(links):
    """Definitional count: link pairs whose source and target orders disagree."""
    links = list(links)
    count = 0
    for (i1, j1), (i2, j2) in itertools.combinations(links, 2):
        if (i1 < i2 and j1 > j2) or (i2 < i1 and j2 > j1):
            count += 1
    return count


def jaccard_oracle(a, b):
    common = sum(1 for x in a if x in b)
    total = len(set(list(a) + list(b)))
    return common / total if total else None


class TestLcsRatio:
    def test_identical_sequences(self):
        assert lcs_ratio(["NOUN", "VERB", "NOUN"], ["NOUN", "VERB", "NOUN"]) == 1.0

    def test_disjoint_sequences(self):
        assert lcs_ratio(["NOUN"], ["VERB", "ADV"]) == 0.0

    def test_partial_overlap(self):
        # LCS of (N, V, N) and (N, N) is (N, N): 2 * 2 / 5.
        assert lcs_ratio(["NOUN", "VERB", "NOUN"], ["NOUN", "NOUN"]) == 0.8

    def test_both_empty_is_missing(self):
        assert lcs_ratio([], []) is None

    def test_one_empty_is_zero(self):
        assert lcs_ratio([], ["NOUN"]) == 0.0
        assert lcs_ratio(["NOUN"], []) == 0.0

    def test_matches_dp_oracle_on_random_pairs(self):
        rng = random.Random(1234)
        for _ in range(500):
            a = [rng.choice(UPOS_TAGS) for _ in range(rng.randint(0, 12))]
            b = [rng.choice(UPOS_TAGS) for _ in range(rng.randint(0, 12))]
            if not a and not b:
                continue
            expected = 2.0 * lcs_length_dp(a, b) / (len(a) + len(b))
            assert lcs_ratio(a, b) == expected

    def test_long_sequences_cross_word_boundaries(self):
        # Above 64 tokens the bit row spans several machine words.
        rng = random.Random(7)
        a = [rng.choice(UPOS_TAGS) for _ in range(200)]
        b = [rng.choice(UPOS_TAGS) for _ in range(150)]
        expected = 2.0 * lcs_length_dp(a, b) / (len(a) + len(b))
        assert lcs_ratio(a, b) == expected

    @given(st.lists(st.sampled_from(UPOS_TAGS), max_size=10),
           st.lists(st.sampled_from(UPOS_TAGS), max_size=10))
    @settings(max_examples=150, deadline=None)
    def test_symmetry_and_bounds(self, a, b):
        value = lcs_ratio(a, b)
        assert value == lcs_ratio(b, a)
        if value is not None:
            assert 0.0 <= value <= 1.0
            assert (value == 1.0) == (a == b)


class TestPosSim:
    def test_missing_without_tags(self, record):
        assert pos_sim(make_record(src_pos=None)) is None
        assert pos_sim(make_record(hyp_pos=None)) is None

    def test_equal_tag_sequences(self, record):
        assert pos_sim(record) == 1.0


class TestTreeSim:
    def test_identical_sets(self, record):
        assert tree_sim(record) == 1.0

    def test_disjoint_sets(self):
        rec = make_record(src_arcs=frozenset({"a"}), hyp_arcs=frozenset({"b"}))
        assert tree_sim(rec) == 0.0

    def test_half_overlap(self):
        rec = make_record(src_arcs=frozenset({"a", "b", "c"}),
                          hyp_arcs=frozenset({"b", "c", "d"}))
        assert tree_sim(rec) == 0.5

    def test_missing_without_parses(self):
        assert tree_sim(make_record(src_arcs=None)) is None
        assert tree_sim(make_record(hyp_arcs=None)) is None

    def test_two_empty_sets_are_missing(self):
        rec = make_record(src_arcs=frozenset(), hyp_arcs=frozenset())
        assert tree_sim(rec) is None

    def test_matches_enumeration_oracle(self):
        rng = random.Random(99)
        universe = [f"arc{i}" for i in range(12)]
        for _ in range(300):
            a = frozenset(rng.sample(universe, rng.randint(0, 8)))
            b = frozenset(rng.sample(universe, rng.randint(0, 8)))
            rec = make_record(src_arcs=a, hyp_arcs=b)
            assert tree_sim(rec) == jaccard_oracle(a, b)


class TestDensity:
    def test_ratio_uses_longer_side(self):
        rec = make_record(src_tokens=list("abcd"), hyp_tokens=list("vwxyz"),
                          alignment=[(1, 1), (2, 2), (3, 3), (4, 4)],
                          pair_cos=[0.5] * 4,
                          src_pos=None, hyp_pos=None)
        assert density(rec) == 0.8

    def test_full_coverage_is_one(self, record):
        assert density(record) == 1.0

    def test_empty_alignment_is_zero(self):
        rec = make_record(alignment=[], pair_cos=[])
        assert density(rec) == 0.0

    def test_empty_tokens_raise(self):
        rec = make_record(src_tokens=[], src_pos=None, alignment=[], pair_cos=[])
        with pytest.raises(DegenerateInputError):
            density(rec)
        with pytest.raises(DegenerateInputError):
            score_record(rec)

    def test_many_to_many_clamps_and_flags(self):
        links = [(i, j) for i in range(1, 4) for j in range(1, 3)]
        rec = make_record(src_tokens=list("abc"), hyp_tokens=list("xy"),
                          alignment=links, pair_cos=[1.0] * len(links),
                          src_pos=None, hyp_pos=None)
        assert density(rec) == 1.0
        vec = score_record(rec)
        assert vec.density == 1.0
        assert vec.density_clamped is True

    def test_unaligned_token_lowers_density(self):
        rec = make_record()
        longer = make_record(hyp_tokens=rec.hyp_tokens + ["extra"],
                             hyp_pos=None, src_pos=None)
        assert density(longer) < density(rec)


class TestCrossings:
    def test_monotone_alignment(self, record):
        assert crossings(record) == 0

    def test_single_swap(self):
        rec = make_record(alignment=[(1, 2), (2, 1), (3, 3)],
                          pair_cos=[0.5] * 3)
        assert crossings(rec) == 1

    def test_full_reversal(self):
        for k in (2, 3, 4):
            links = [(i, k + 1 - i) for i in range(1, k + 1)]
            rec = make_record(src_tokens=list("abcd")[:k],
                              hyp_tokens=list("wxyz")[:k],
                              alignment=links, pair_cos=[0.5] * k,
                              src_pos=None, hyp_pos=None)
            assert crossings(rec) == k * (k - 1) // 2

    def test_fan_out_ties_do_not_cross(self):
        rec = make_record(alignment=[(1, 1), (1, 2)], pair_cos=[0.5, 0.5])
        assert crossings(rec) == 0
        rec = make_record(alignment=[(1, 1), (2, 1)], pair_cos=[0.5, 0.5])
        assert crossings(rec) == 0

    def test_empty_and_singleton(self):
        assert crossings(make_record(alignment=[], pair_cos=[])) == 0
        assert crossings(make_record(alignment=[(2, 3)], pair_cos=[0.5])) == 0

    def test_exhaustive_small_grids(self):
        cells = [(i, j) for i in range(1, 4) for j in range(1, 4)]
        for size in range(0, 4):
            for combo in itertools.combinations(cells, size):
                rec = make_record(src_tokens=list("abc"), hyp_tokens=list("xyz"),
                                  alignment=list(combo),
                                  pair_cos=[0.5] * size,
                                  src_pos=None, hyp_pos=None)
                assert crossings(rec) == crossings_oracle(combo)

    def test_matches_oracle_on_large_random_alignments(self):
        # Exercises the vectorized path above the small-input cutoff.
        rng = random.Random(5)
        cells = [(i, j) for i in range(1, 13) for j in range(1, 16)]
        for _ in range(50):
            links = rng.sample(cells, rng.randint(33, 60))
            rec = make_record(src_tokens=["s"] * 12, hyp_tokens=["h"] * 15,
                              alignment=links, pair_cos=[0.5] * len(links),
                              src_pos=None, hyp_pos=None)
            assert crossings(rec) == crossings_oracle(links)

    def test_order_of_input_links_is_irrelevant(self):
        links = [(1, 3), (2, 1), (3, 2), (4, 4)]
        base = make_record(alignment=links, pair_cos=[0.5] * 4)
        shuffled = make_record(alignment=list(reversed(links)),
                               pair_cos=[0.5] * 4)
        assert crossings(base) == crossings(shuffled)


class TestCosine:
    def test_identical_vectors(self):
        assert cosine([1.0, 2.0, 3.0], [1.0, 2.0, 3.0]) == pytest.approx(1.0)

    def test_orthogonal_vectors(self):
        assert cosine([1.0, 0.0], [0.0, 1.0]) == 0.0

    def test_known_value(self):
        assert cosine([1, 2, 2], [2, 1, 2]) == pytest.approx(8 / 9)

    def test_zero_vector_rejected(self):
        with pytest.raises(ValueError, match="zero vector"):
            cosine([0.0, 0.0], [1.0, 0.0])

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ValueError, match="dimension"):
            cosine([1.0, 0.0], [1.0, 0.0, 0.0])

    @given(st.lists(st.floats(min_value=-10, max_value=10), min_size=2,
                    max_size=8))
    @settings(max_examples=100, deadline=None)
    def test_self_similarity_clamped_to_one(self, values):
        # Guard against squared-norm underflow, which counts as a zero vector.
        if sum(x * x for x in values) == 0.0:
            return
        assert cosine(values, values) <= 1.0
        assert cosine(values, values) == pytest.approx(1.0)


class TestTokSim:
    def test_raw_is_mean(self):
        rec = make_record(alignment=[(1, 1), (2, 2)], pair_cos=[0.5, 0.7])
        assert tok_sim_raw(rec) == pytest.approx(0.6)

    def test_raw_single_pair(self):
        rec = make_record(alignment=[(1, 1)], pair_cos=[0.5])
        assert tok_sim_raw(rec) == 0.5

    def test_raw_missing_when_unaligned(self):
        assert tok_sim_raw(make_record(alignment=[], pair_cos=[])) is None

    def test_penalized_is_product(self):
        rec = make_record(src_tokens=list("abcd"), hyp_tokens=list("vwxyz"),
                          alignment=[(1, 1), (2, 2), (3, 3), (4, 4)],
                          pair_cos=[0.5, 0.5, 0.5, 0.5],
                          src_pos=None, hyp_pos=None)
        assert tok_sim_pen(rec) == pytest.approx(0.5 * 0.8)

    def test_penalized_zero_when_unaligned(self):
        assert tok_sim_pen(make_record(alignment=[], pair_cos=[])) == 0.0

    def test_penalized_floors_negative_means_at_zero(self):
        rec = make_record(alignment=[(1, 1)], pair_cos=[-0.5])
        assert tok_sim_pen(rec) == 0.0

    def test_penalized_never_exceeds_raw(self):
        rng = random.Random(17)
        for _ in range(100):
            n = rng.randint(1, 4)
            links = [(i, i) for i in range(1, n + 1)]
            rec = make_record(alignment=links,
                              pair_cos=[rng.uniform(-1, 1) for _ in links])
            raw = tok_sim_raw(rec)
            pen = tok_sim_pen(rec)
            assert 0.0 <= pen <= max(0.0, raw)


class TestScoreRecord:
    def test_maximal_literality_fixture(self):
        vec = score_record(identity_record(["a", "b", "c", "d"]))
        assert vec.pos_sim == 1.0
        assert vec.tree_sim == 1.0
        assert vec.density == 1.0
        assert vec.crossings == 0
        assert vec.seg_sem == 1.0
        assert vec.tok_sim_raw == 1.0
        assert vec.tok_sim_pen == 1.0
        assert vec.density_clamped is False

    def test_parser_less_record_has_missing_syntax_signals(self):
        rec = make_record(src_pos=None, hyp_pos=None, src_arcs=None,
                          hyp_arcs=None)
        vec = score_record(rec)
        assert vec.pos_sim is None
        assert vec.tree_sim is None
        assert vec.density is not None
        assert vec.present() == ("density", "crossings", "seg_sem",
                                 "tok_sim_raw", "tok_sim_pen")

    def test_agrees_with_standalone_functions(self):
        rng = random.Random(23)
        for _ in range(200):
            m, n = rng.randint(1, 8), rng.randint(1, 8)
            cells = [(i, j) for i in range(1, m + 1) for j in range(1, n + 1)]
            links = rng.sample(cells, rng.randint(0, min(len(cells), 10)))
            rec = make_record(
                src_tokens=["s"] * m, hyp_tokens=["h"] * n,
                alignment=links,
                pair_cos=[rng.uniform(-1, 1) for _ in links],
                seg_cos=rng.uniform(-1, 1),
                src_pos=[rng.choice(UPOS_TAGS) for _ in range(m)],
                hyp_pos=[rng.choice(UPOS_TAGS) for _ in range(n)],
                src_arcs=frozenset(rng.sample([f"a{k}" for k in range(9)],
                                              rng.randint(0, 5))),
                hyp_arcs=frozenset(rng.sample([f"a{k}" for k in range(9)],
                                              rng.randint(0, 5))),
            )
            vec = score_record(rec)
            assert vec.pos_sim == pos_sim(rec)
            assert vec.tree_sim == tree_sim(rec)
            assert vec.density == density(rec)
            assert vec.crossings == crossings(rec)
            assert vec.seg_sem == rec.seg_cos
            assert vec.tok_sim_raw == tok_sim_raw(rec)
            assert vec.tok_sim_pen == tok_sim_pen(rec)

    def test_alignment_permutation_invariance(self):
        links = [(1, 3), (2, 1), (3, 2), (4, 4)]
        cos = [0.9, -0.2, 0.4, 0.7]
        base = make_record(alignment=links, pair_cos=cos)
        order = [2, 0, 3, 1]
        permuted = make_record(alignment=[links[k] for k in order],
                               pair_cos=[cos[k] for k in order])
        left, right = score_record(base), score_record(permuted)
        for name in SIGNAL_NAMES:
            a, b = left.get(name), right.get(name)
            if a is None:
                assert b is None
            else:
                assert a == pytest.approx(b, abs=1e-12)

    def test_signal_vector_accessors(self):
        vec = SignalVector(density=0.5)
        assert vec.get("density") == 0.5
        assert vec.get("pos_sim") is None
        with pytest.raises(KeyError):
            vec.get("nope")
        assert vec.to_obj()["density"] == 0.5
