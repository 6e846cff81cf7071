"""Texture randomization for domain-generalized segmentation, at toy scale."""

from .errors import TexrandError
from .imaging import Image, Kernel2D, channel_stats, convolve, gaussian_kernel, read_image, to_grayscale, write_image
from .rng import RngStream

__version__ = "0.1.0"

__all__ = [
    "Image", "Kernel2D", "RngStream", "TexrandError", "channel_stats", "convolve",
    "gaussian_kernel", "read_image", "to_grayscale", "write_image",
]
