"""Numpy autograd core and the ViT / ResNet / sequence classifiers."""
from .flops import count_flops
from .functional import cross_entropy
from .models import (
    ResNet,
    ResNetConfig,
    SeqClassifier,
    SeqConfig,
    ShapeError,
    ViT,
    ViTConfig,
    build_model,
)
from .optim import Adam, AdamState, adam_step
from .tensor import GraphError, Tensor, no_grad

__all__ = [
    "Adam",
    "AdamState",
    "GraphError",
    "ResNet",
    "ResNetConfig",
    "SeqClassifier",
    "SeqConfig",
    "ShapeError",
    "Tensor",
    "ViT",
    "ViTConfig",
    "adam_step",
    "build_model",
    "count_flops",
    "cross_entropy",
    "no_grad",
]
