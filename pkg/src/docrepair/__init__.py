"""Sentence-level MT plus monolingual group repair, desk scale."""

from .bpe import SubwordTokenizer
from .decoding import Hypothesis, beam_search, sample, score
from .evaluation import bleu, change_stats, contrastive_accuracy
from .optim import AdamState, OptimizerConfig, adam_step, lr_at
from .pipeline import ExperimentConfig, run_experiment, toy_experiment_config
from .tensor import Tensor
from .transformer import Checkpoint, TransformerConfig, average_checkpoints, forward

__version__ = "0.1.0"

__all__ = [
    "AdamState",
    "Checkpoint",
    "ExperimentConfig",
    "Hypothesis",
    "OptimizerConfig",
    "SubwordTokenizer",
    "Tensor",
    "TransformerConfig",
    "adam_step",
    "average_checkpoints",
    "beam_search",
    "bleu",
    "change_stats",
    "contrastive_accuracy",
    "forward",
    "lr_at",
    "run_experiment",
    "sample",
    "score",
    "toy_experiment_config",
    "__version__",
]
