"""Pluggable annotation backends.

The extraction pipeline needs four capabilities: tokenization, POS/arc
tagging, word alignment, and embedding.  Each is a small protocol so real
model stacks (language-specific tokenizers, neural taggers and parsers,
contextual aligners, multilingual sentence encoders) can be dropped in
without touching the pipeline.

The built-in backends are deterministic stand-ins: they derive every
choice from a content hash, so two runs over the same input produce the
same bytes, on any machine, with no model downloads.  That makes them
suitable for fixtures, plumbing tests and offline development, not for
linguistic conclusions.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Protocol

import numpy as np


class BackendUnavailableError(RuntimeError):
    """A configured backend cannot be constructed or loaded."""


class Tokenizer(Protocol):
    name: str

    def tokenize(self, text: str, lang: str) -> list[str]: ...


class Tagger(Protocol):
    name: str

    def tag(self, tokens: list[str], lang: str) -> tuple[list[str], frozenset[str]]:
        """Return (one POS tag per token, dependency arc-type set)."""
        ...


class Aligner(Protocol):
    name: str

    def align(self, src_tokens: list[str], hyp_tokens: list[str],
              lp: str) -> list[tuple[int, int]]:
        """Return 1-based (source, hypothesis) link pairs."""
        ...


class Encoder(Protocol):
    name: str

    def encode_tokens(self, tokens: list[str], lang: str) -> np.ndarray:
        """Unit-normalized row vectors, one per token."""
        ...

    def encode_segment(self, text: str, lang: str) -> np.ndarray:
        """One unit-normalized vector for the whole segment."""
        ...


def _digest(*parts: str) -> int:
    """Stable 64-bit hash of the given strings; never the builtin hash."""
    payload = "\x1f".join(parts).encode("utf-8")
    return int.from_bytes(hashlib.blake2b(payload, digest_size=8).digest(), "big")


class WhitespaceTokenizer:
    """Fallback tokenizer used where no language-specific one exists."""

    name = "whitespace/1"

    def tokenize(self, text: str, lang: str) -> list[str]:
        return text.split()


_STUB_TAGS = ("NOUN", "VERB", "ADJ", "ADV", "DET", "ADP", "PRON", "PROPN")
_STUB_DEPS = ("nsubj", "obj", "amod", "advmod", "det", "case", "nmod")


class HashedTagger:
    """Deterministic POS tags and arcs derived from token content.

    Each token's tag is a hash over (token, lang); each non-initial token
    attaches to its left neighbor, and the arc is rendered as the
    delexicalized triple head-label-child.  Purely structural: good for
    exercising the POS/arc plumbing, meaningless linguistically.
    """

    name = "hashed-tags/1"

    def tag(self, tokens: list[str], lang: str) -> tuple[list[str], frozenset[str]]:
        pos = [_STUB_TAGS[_digest("pos", token, lang) % len(_STUB_TAGS)]
               for token in tokens]
        arcs = set()
        for child in range(1, len(tokens)):
            head = child - 1
            label = _STUB_DEPS[_digest("dep", tokens[head], tokens[child])
                               % len(_STUB_DEPS)]
            arcs.add(f"{pos[head]}-{label}-{pos[child]}")
        return pos, frozenset(arcs)


class IdentityAligner:
    """Position-for-position links over the shorter side."""

    name = "identity/1"

    def align(self, src_tokens: list[str], hyp_tokens: list[str],
              lp: str) -> list[tuple[int, int]]:
        n = min(len(src_tokens), len(hyp_tokens))
        return [(k, k) for k in range(1, n + 1)]


class HashedEncoder:
    """Pseudo-embeddings: a unit Gaussian vector seeded by content.

    The same (text, lang) always maps to the same vector, so cosines are
    reproducible and identical texts in the same language embed
    identically (self-similarity exactly 1).
    """

    def __init__(self, dim: int = 32) -> None:
        if dim < 2:
            raise BackendUnavailableError(f"encoder dimension {dim} < 2")
        self.dim = dim
        self.name = f"hashed-unit/1:dim={dim}"

    def _vector(self, kind: str, text: str, lang: str) -> np.ndarray:
        rng = np.random.default_rng(_digest(kind, text, lang))
        vec = rng.standard_normal(self.dim)
        return vec / np.linalg.norm(vec)

    def encode_tokens(self, tokens: list[str], lang: str) -> np.ndarray:
        if not tokens:
            return np.empty((0, self.dim))
        return np.stack([self._vector("tok", t, lang) for t in tokens])

    def encode_segment(self, text: str, lang: str) -> np.ndarray:
        return self._vector("seg", text, lang)


class SentenceEncoder:
    """Multilingual sentence-transformer wrapper, loaded on first use.

    Determinism is the caller's responsibility: pin the model identifier
    (and its revision) in the backend config.
    """

    def __init__(self, model_id: str) -> None:
        self.model_id = model_id
        self.name = f"sentence-transformers:{model_id}"
        self._model = None

    def _load(self):
        if self._model is None:
            try:
                from sentence_transformers import SentenceTransformer
                self._model = SentenceTransformer(self.model_id)
            except Exception as exc:
                raise BackendUnavailableError(
                    f"cannot load sentence-transformers model "
                    f"{self.model_id!r}: {exc}") from exc
        return self._model

    def _encode(self, texts: list[str]) -> np.ndarray:
        model = self._load()
        return np.asarray(model.encode(texts, normalize_embeddings=True,
                                       show_progress_bar=False))

    def encode_tokens(self, tokens: list[str], lang: str) -> np.ndarray:
        return self._encode(tokens)

    def encode_segment(self, text: str, lang: str) -> np.ndarray:
        return self._encode([text])[0]


@dataclass(slots=True)
class BackendConfig:
    """Named backend selection plus the availability map.

    ``pos_lps`` lists the language pairs whose records get POS tags and
    arcs; ``None`` means the tagger covers every pair.  ``versions`` is a
    free-form pin block copied verbatim into the output provenance.
    """

    tokenizer: str = "whitespace"
    tagger: str = "hashed-tags"
    aligner: str = "identity"
    encoder: str = "hashed-unit"
    encoder_dim: int = 32
    encoder_model: str | None = None
    pos_lps: tuple[str, ...] | None = None
    versions: dict[str, str] = field(default_factory=dict)

    @classmethod
    def from_obj(cls, obj: dict[str, Any]) -> "BackendConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = sorted(set(obj) - known)
        if unknown:
            raise BackendUnavailableError(
                f"unknown config keys {unknown}; expected a subset of "
                f"{sorted(known)}")
        kwargs = dict(obj)
        if kwargs.get("pos_lps") is not None:
            lps = kwargs["pos_lps"]
            if not isinstance(lps, (list, tuple)) or \
                    not all(isinstance(v, str) for v in lps):
                raise BackendUnavailableError("pos_lps must be a list of strings")
            kwargs["pos_lps"] = tuple(lps)
        try:
            return cls(**kwargs)
        except TypeError as exc:
            raise BackendUnavailableError(f"bad config: {exc}") from exc

    @classmethod
    def load(cls, path: str | Path) -> "BackendConfig":
        with open(path, "r", encoding="utf-8") as handle:
            try:
                obj = json.load(handle)
            except json.JSONDecodeError as exc:
                raise BackendUnavailableError(
                    f"config is not valid JSON: {exc}") from exc
        if not isinstance(obj, dict):
            raise BackendUnavailableError("config must be a JSON object")
        return cls.from_obj(obj)


@dataclass(slots=True)
class ResolvedBackends:
    tokenizer: Tokenizer
    tagger: Tagger | None
    aligner: Aligner
    encoder: Encoder


_TOKENIZERS = {
    "whitespace": lambda cfg: WhitespaceTokenizer(),
}
_TAGGERS = {
    "hashed-tags": lambda cfg: HashedTagger(),
    "none": lambda cfg: None,
}
_ALIGNERS = {
    "identity": lambda cfg: IdentityAligner(),
}
_ENCODERS = {
    "hashed-unit": lambda cfg: HashedEncoder(cfg.encoder_dim),
    "sentence-transformers": lambda cfg: SentenceEncoder(
        cfg.encoder_model or "sentence-transformers/LaBSE"),
}


def _pick(registry: dict[str, Any], kind: str, name: str,
          config: BackendConfig) -> Any:
    try:
        factory = registry[name]
    except KeyError:
        raise BackendUnavailableError(
            f"unknown {kind} backend {name!r}; "
            f"known: {sorted(registry)}") from None
    return factory(config)


def resolve(config: BackendConfig) -> ResolvedBackends:
    """Instantiate the configured backend stack.

    Raises BackendUnavailableError when a name is unknown or a backend
    cannot be constructed; never returns a partially usable stack.
    """
    return ResolvedBackends(
        tokenizer=_pick(_TOKENIZERS, "tokenizer", config.tokenizer, config),
        tagger=_pick(_TAGGERS, "tagger", config.tagger, config),
        aligner=_pick(_ALIGNERS, "aligner", config.aligner, config),
        encoder=_pick(_ENCODERS, "encoder", config.encoder, config),
    )
