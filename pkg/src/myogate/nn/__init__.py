"""Minimal deterministic neural-network engine.

Float32 by default; ``Network.astype(np.float64)`` switches a copy into the
64-bit verification mode that ``gradient_check`` requires.
"""

from .gradcheck import gradient_check
from .layers import (
    Conv2d,
    Dense,
    Flatten,
    LeakyReLU,
    ReLU,
    Sigmoid,
    Softmax,
    conv2d_forward,
    dense_forward,
    softmax,
)
from .losses import EPS, bce_loss, cross_entropy_loss
from .modelio import load_model, save_model
from .network import Network
from .optim import Adam, Sgd
from .rng import make_rng, sample_gaussian

__all__ = [
    "Adam",
    "Conv2d",
    "Dense",
    "EPS",
    "Flatten",
    "LeakyReLU",
    "Network",
    "ReLU",
    "Sgd",
    "Sigmoid",
    "Softmax",
    "bce_loss",
    "conv2d_forward",
    "cross_entropy_loss",
    "dense_forward",
    "gradient_check",
    "load_model",
    "make_rng",
    "sample_gaussian",
    "save_model",
    "softmax",
]
