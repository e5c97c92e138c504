"""Literality measurement for machine translation corpora.

The package turns per-segment translation features (tokens, POS tags,
dependency arcs, alignments, embedding cosines) into interpretable
literality signals, aggregates them into a single synthetic index per
segment, and ships the statistical harness used to validate the signals
and analyze post-editing behavior.
"""

from .corpus import (CorpusFilter, FeatureRecord, LiteralisError,
                     ProvenanceHeader, SchemaError, parse_record,
                     serialize_record, stream_filter)
from .signals import (SIGNAL_NAMES, DegenerateInputError, SignalVector,
                      cosine, crossings, density, lcs_ratio, pos_sim,
                      score_record, tok_sim_pen, tok_sim_raw, tree_sim)
from .sli import (DEFAULT_HIT_RATES, DEFAULT_TEMPERATURE, ELIGIBLE_SIGNALS,
                  Normalizer, SliConfig, SliError, SliModel, fit_normalizers,
                  normalize, sli, softmax_weights)
from .stats import (BootstrapResult, CorrelationResult, chi2_sf, cohen_kappa,
                    friedman, paired_bootstrap, pearson, point_biserial,
                    spearman, unpaired_bootstrap)
from .validation import (HIT, MISS, MIXTURE_LEVELS, POLARITY, TIE,
                         GradientRow, HitRateEntry, MixtureInstance,
                         TripletInstance, ValidationError, augment,
                         gradient_table, hit_outcome, hit_rates,
                         load_scored_mixtures, load_triplets, write_mixtures,
                         write_triplets)
from .dynamics import (DEFAULT_EPSILON, AlterationShare, DynamicsConfig,
                       DynamicsError, DynamicsRow, EditPair, TrajectoryReport,
                       TriggerRow, alteration_share, build_edit_pairs,
                       classify_edit, dynamics_table, revision_trigger,
                       trajectory)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
