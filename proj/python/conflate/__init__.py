from ._core import (
    FOLD_COUNT,
    VOCABULARY,
    EncodingError,
    Model,
    ModelFormatError,
    TrainingDivergence,
    cross_validate,
    fold_case,
    generate_pairs,
    posterior,
    rank_statistics,
    recall_at_k,
    suggest_threshold,
    train,
)

__all__ = [
    "FOLD_COUNT",
    "VOCABULARY",
    "EncodingError",
    "Model",
    "ModelFormatError",
    "TrainingDivergence",
    "cross_validate",
    "fold_case",
    "generate_pairs",
    "posterior",
    "rank_statistics",
    "recall_at_k",
    "suggest_threshold",
    "train",
]
