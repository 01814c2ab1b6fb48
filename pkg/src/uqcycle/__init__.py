"""Uncertainty-aware unpaired image translation on a small numpy autodiff core.

Mean/variance generators trained with a Gaussian-NLL cycle loss, made
stochastic by MC dropout, MC DropConnect, Flipout or deep ensembles; predictive
variance split into aleatoric and epistemic parts and scored for OOD detection.
"""
from .checkpoint import CheckpointError
from .layers import Method, StochasticConfig
from .model import CycleMode, DivergenceError, ModelConfig, TrainConfig, TranslationModel, sample_predictions, train
from .tensor import NonFiniteError, ShapeError, Tensor, backward, no_grad
from .uncertainty import AggMode, SampleSet, UncertaintyMaps, aggregate_score, combine, minmax_normalize

__version__ = "0.1.0"

__all__ = [
    "AggMode",
    "CheckpointError",
    "CycleMode",
    "DivergenceError",
    "Method",
    "ModelConfig",
    "NonFiniteError",
    "SampleSet",
    "ShapeError",
    "StochasticConfig",
    "Tensor",
    "TrainConfig",
    "TranslationModel",
    "UncertaintyMaps",
    "aggregate_score",
    "backward",
    "combine",
    "minmax_normalize",
    "no_grad",
    "sample_predictions",
    "train",
]
