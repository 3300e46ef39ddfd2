"""Python bindings for the auvmae core library."""

from ._core import (
    DataError,
    NumericError,
    UsageError,
    analytic_knowledge,
    class_weights,
    estimate_inter_knowledge,
    estimate_intra_knowledge,
    f1_scores,
    learned_cooccurrence,
    mean_state_tensor,
    run_cli,
    sample_labels,
    state_function,
    state_tensor,
    total_loss,
    transition_state,
    tube_mask,
    weighted_bce,
)

__all__ = [
    "DataError",
    "NumericError",
    "UsageError",
    "analytic_knowledge",
    "class_weights",
    "estimate_inter_knowledge",
    "estimate_intra_knowledge",
    "f1_scores",
    "learned_cooccurrence",
    "mean_state_tensor",
    "run_cli",
    "sample_labels",
    "state_function",
    "state_tensor",
    "total_loss",
    "transition_state",
    "tube_mask",
    "weighted_bce",
]
