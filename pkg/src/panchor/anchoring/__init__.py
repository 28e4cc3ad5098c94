from .attributes import (
    DEFAULT_HISTOGRAM_BINS,
    AttributeError_,
    Deterministic,
    Probabilistic,
    as_category,
    as_histogram,
    as_position,
    as_size,
    color_similarity,
    position_point_similarity,
    position_similarity,
    size_similarity,
    top_category,
)
from .store import (
    Anchor,
    AnchorId,
    AnchorStore,
    Decision,
    MatcherConfig,
    PerceptCandidate,
    SimilarityVector,
    UnknownAnchorError,
    attribute_compare,
    category_compatible,
    combined_score,
)

__all__ = [
    "DEFAULT_HISTOGRAM_BINS", "AttributeError_", "Deterministic", "Probabilistic",
    "as_category", "as_histogram", "as_position", "as_size",
    "color_similarity", "position_point_similarity", "position_similarity",
    "size_similarity", "top_category",
    "Anchor", "AnchorId", "AnchorStore", "Decision", "MatcherConfig",
    "PerceptCandidate", "SimilarityVector", "UnknownAnchorError",
    "attribute_compare", "category_compatible", "combined_score",
]
