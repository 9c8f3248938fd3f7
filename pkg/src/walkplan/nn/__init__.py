from .models import (
    EccConfig,
    EccNet,
    EncDec,
    EncDecConfig,
    load_checkpoint,
    model_fingerprint,
    save_checkpoint,
)
from .tensor import Tensor, backward, finite_diff_check, set_nan_guard, softmax
from .train import Adam, TrainConfig, TrainingDiverged, curriculum_train, evaluate_accuracy, train

__all__ = [
    "Adam",
    "EccConfig",
    "EccNet",
    "EncDec",
    "EncDecConfig",
    "Tensor",
    "TrainConfig",
    "TrainingDiverged",
    "backward",
    "curriculum_train",
    "evaluate_accuracy",
    "finite_diff_check",
    "load_checkpoint",
    "model_fingerprint",
    "save_checkpoint",
    "set_nan_guard",
    "softmax",
    "train",
]
