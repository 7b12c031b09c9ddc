"""Time-frequency toolkit: sampled fields, STFT, mixed norms and Gabor scans."""
from . import errors, field, gabor, mixed_norm, stft

__all__ = ["errors", "field", "stft", "mixed_norm", "gabor"]
__version__ = "0.1.0"
