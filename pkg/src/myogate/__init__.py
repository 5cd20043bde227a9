"""GAN-gated open-set recognition for surface-EMG gesture control."""

__version__ = "0.1.0"
