"""Feature-extraction adapter for the literalis scoring package.

Converts raw bitext into scoring-ready feature records through pluggable
tokenizer, tagger, aligner and encoder backends, and verifies stored
cosines against raw-vector sidecars.
"""

from .backends import (Aligner, BackendConfig, BackendUnavailableError,
                       Encoder, HashedEncoder, HashedTagger, IdentityAligner,
                       ResolvedBackends, SentenceEncoder, Tagger, Tokenizer,
                       WhitespaceTokenizer, resolve)
from .pipeline import (BitextError, BitextSegment, Discrepancy,
                       ExtractionJob, ExtractionSummary, ExtractorError,
                       VerifyError, VerifyReport, extract, read_bitext,
                       verify)

__all__ = [name for name in dir() if not name.startswith("_")]

__version__ = "0.1.0"
