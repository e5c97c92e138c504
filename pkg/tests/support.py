"""Shared record builders for the test suite."""

from __future__ import annotations

import json
from typing import Any

from literalis import FeatureRecord


def minimal_obj(**overrides: Any) -> dict[str, Any]:
    """A schema-valid record as a plain JSON object."""
    obj: dict[str, Any] = {
        "fmt": 1,
        "id": "seg-1",
        "lp": "en-fr_FR",
        "system": "mt",
        "task": "single",
        "src_tokens": ["a", "b"],
        "hyp_tokens": ["x", "y", "z"],
        "alignment": [[1, 1], [2, 3]],
        "pair_cos": [0.5, 0.25],
        "seg_cos": 0.5,
    }
    obj.update(overrides)
    return obj


def minimal_line(**overrides: Any) -> str:
    return json.dumps(minimal_obj(**overrides), ensure_ascii=False)


def make_record(**overrides: Any) -> FeatureRecord:
    """A fully annotated in-memory record."""
    base: dict[str, Any] = {
        "id": "seg-1",
        "lp": "en-fr_FR",
        "system": "mt",
        "task": "single",
        "src_tokens": ["the", "cat", "sat", "down"],
        "hyp_tokens": ["le", "chat", "assis", "bas"],
        "alignment": [(1, 1), (2, 2), (3, 3), (4, 4)],
        "pair_cos": [0.9, 0.8, 0.7, 0.6],
        "seg_cos": 0.85,
        "domain": "news",
        "src_pos": ["DET", "NOUN", "VERB", "ADV"],
        "hyp_pos": ["DET", "NOUN", "VERB", "ADV"],
        "src_arcs": frozenset({"VERB-nsubj-NOUN", "NOUN-det-DET", "VERB-advmod-ADV"}),
        "hyp_arcs": frozenset({"VERB-nsubj-NOUN", "NOUN-det-DET", "VERB-advmod-ADV"}),
    }
    base.update(overrides)
    return FeatureRecord(**base)


def identity_record(tokens: list[str], rec_id: str = "seg-1", *,
                    lp: str = "en-fr_FR", **overrides: Any) -> FeatureRecord:
    """A maximally literal record: hypothesis is a token-level copy."""
    n = len(tokens)
    base: dict[str, Any] = {
        "id": rec_id,
        "lp": lp,
        "system": "mt",
        "task": "single",
        "src_tokens": list(tokens),
        "hyp_tokens": list(tokens),
        "alignment": [(i, i) for i in range(1, n + 1)],
        "pair_cos": [1.0] * n,
        "seg_cos": 1.0,
        "src_pos": ["NOUN"] * n,
        "hyp_pos": ["NOUN"] * n,
        "src_arcs": frozenset({f"NOUN-dep-NOUN:{i}" for i in range(1, n)}),
        "hyp_arcs": frozenset({f"NOUN-dep-NOUN:{i}" for i in range(1, n)}),
    }
    base.update(overrides)
    return FeatureRecord(**base)
