"""Simpler-substitute generation, ranking, and evaluation for complex words."""

from . import errors
from .backends import (
    Backend,
    BoundaryConvention,
    ModelInfo,
    RemoteBackend,
    SourceEncoding,
    SpecialTokens,
    TokenDistribution,
    ToyBackend,
    ToyLexicon,
    demo_lexicon,
)
from .evaluation import (
    GoldInstance,
    MetricsReport,
    Prediction,
    TsarDataset,
    evaluate,
    load_tsar,
)
from .generator import (
    CandidateWord,
    DecoderPrefix,
    GeneratorConfig,
    SimplificationTask,
    build_decoder_prefix,
    complete_word,
    first_token_candidates,
    generate_candidates,
)
from .ranker import (
    FeatureVector,
    LexicalResources,
    RankingWeights,
    compute_features,
    rank,
    rank_passthrough,
    weights_for_language,
)

__version__ = "0.1.0"

__all__ = [
    "Backend",
    "BoundaryConvention",
    "CandidateWord",
    "DecoderPrefix",
    "FeatureVector",
    "GeneratorConfig",
    "GoldInstance",
    "LexicalResources",
    "MetricsReport",
    "ModelInfo",
    "Prediction",
    "RankingWeights",
    "RemoteBackend",
    "SimplificationTask",
    "SourceEncoding",
    "SpecialTokens",
    "TokenDistribution",
    "ToyBackend",
    "ToyLexicon",
    "TsarDataset",
    "build_decoder_prefix",
    "complete_word",
    "compute_features",
    "demo_lexicon",
    "errors",
    "evaluate",
    "first_token_candidates",
    "generate_candidates",
    "load_tsar",
    "rank",
    "rank_passthrough",
    "weights_for_language",
]
