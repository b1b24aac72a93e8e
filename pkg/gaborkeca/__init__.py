"""Gabor wavelet + Kernel Entropy Component Analysis recognition pipeline."""

__version__ = "1.0.0"
