from .logistic import fit_logistic, log_likelihood, predict_prob
from .tree import (
    BiasError,
    DeclarativeBias,
    Internal,
    Leaf,
    LearnConfig,
    LearnError,
    LearnerInput,
    TargetBias,
    learn_tree,
    load_bias,
    parse_target_spec,
    score_split,
    target_key,
    tree_text,
    tree_to_clauses,
)

__all__ = [
    "fit_logistic", "log_likelihood", "predict_prob",
    "BiasError", "DeclarativeBias", "Internal", "Leaf", "LearnConfig",
    "LearnError", "LearnerInput", "TargetBias", "learn_tree", "load_bias",
    "parse_target_spec", "score_split", "target_key", "tree_text",
    "tree_to_clauses",
]
