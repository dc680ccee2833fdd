"""Supporting hyperplane machine: a generalized SVM over paired inputs (x, y = f(x))."""
from .errors import ShmError
from .model import HyperplaneCoeffs, ShmModel, ShmWeights, TrainMeta
from .train import (
    GramProjector,
    KernelSpec,
    TrainConfig,
    TrainingSet,
    hessian,
    kernel_matrix,
    projector,
    recover_threshold,
    recover_weights,
    train,
)
from .fileio import load_dataset, load_model, save_model

__version__ = "0.1.0"

__all__ = [
    "GramProjector", "HyperplaneCoeffs", "KernelSpec", "ShmError", "ShmModel", "ShmWeights",
    "TrainConfig", "TrainMeta", "TrainingSet", "hessian", "kernel_matrix", "load_dataset",
    "load_model", "projector", "recover_threshold", "recover_weights", "save_model", "train",
]
