from .attention import AttentionKVCache, CacheMissError, attend, softmax
from .autoencoder import ToyAutoencoder
from .ddim import InversionResult, continue_inversion, invert, sample
from .predictor import ToyNoisePredictor, ZeroPredictor, weights_checksum
from .schedule import DiffusionSchedule

__all__ = [
    "AttentionKVCache",
    "CacheMissError",
    "attend",
    "softmax",
    "ToyAutoencoder",
    "InversionResult",
    "continue_inversion",
    "invert",
    "sample",
    "ToyNoisePredictor",
    "ZeroPredictor",
    "weights_checksum",
    "DiffusionSchedule",
]
