"""Reverse-mode array engine, optimizer, gradient checks, and model files."""

from .gradcheck import GradCheckReport, grad_check, has_active_dropout, relu_preactivation_margin
from .modelfile import FORMAT_VERSION, MAGIC, ModelFormatError, load_model, save_model
from .optim import MissingGradient, ParameterStore, TrainSchedule, adam_step, lr_at
from .tensor import (
    DEFAULT_DTYPE,
    ShapeMismatch,
    Tensor,
    add,
    as_tensor,
    concat,
    conv1d,
    cross_entropy,
    dropout,
    graph_nodes,
    matmul,
    max_over_time,
    mean,
    mul,
    relu,
    reshape,
    softmax,
    sum_,
    take_rows,
    tanh,
    transpose,
)

__all__ = [
    "DEFAULT_DTYPE",
    "FORMAT_VERSION",
    "GradCheckReport",
    "MAGIC",
    "MissingGradient",
    "ModelFormatError",
    "ParameterStore",
    "ShapeMismatch",
    "Tensor",
    "TrainSchedule",
    "adam_step",
    "add",
    "as_tensor",
    "concat",
    "conv1d",
    "cross_entropy",
    "dropout",
    "grad_check",
    "graph_nodes",
    "has_active_dropout",
    "load_model",
    "lr_at",
    "matmul",
    "max_over_time",
    "mean",
    "mul",
    "relu",
    "relu_preactivation_margin",
    "reshape",
    "save_model",
    "softmax",
    "sum_",
    "take_rows",
    "tanh",
    "transpose",
]
