from .base import (
    Backend,
    BoundaryConvention,
    ModelInfo,
    SourceEncoding,
    SpecialTokens,
    TokenDistribution,
    TokenId,
)
from .remote import RemoteBackend
from .toy import ToyBackend, ToyLexicon, demo_lexicon

__all__ = [
    "Backend",
    "BoundaryConvention",
    "ModelInfo",
    "RemoteBackend",
    "SourceEncoding",
    "SpecialTokens",
    "TokenDistribution",
    "TokenId",
    "ToyBackend",
    "ToyLexicon",
    "demo_lexicon",
]
