"""Global texture randomization: encode, AdaIN fusion, decode.

Two codec backends are provided. ``identity`` passes pixels straight through,
so AdaIN re-targets the per-channel RGB statistics of the source image to
those of the painting. ``conv`` is a small fixed encoder/decoder whose weights
come from a TXRW file::

    enc0  3x3  3 -> 16  stride 1  ReLU
    enc1  3x3 16 -> 32  stride 2  ReLU
    enc2  3x3 32 -> 64  stride 2  ReLU        features: (H/4, W/4, 64)
    dec0  3x3 64 -> 32  ReLU, nearest x2
    dec1  3x3 32 -> 16  ReLU, nearest x2
    dec2  3x3 16 ->  3  clamp to [0, 1]
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import tensorio
from .errors import DegenerateError, ShapeError, WeightsFormatError
from .imaging import Image, channel_stats
from .nn import conv2d, he_normal, relu, upsample_nearest
from .rng import RngStream

CONTENT_STD_FLOOR = 1e-8

# name, c_in, c_out, stride
ENCODER_LAYERS = (("enc0", 3, 16, 1), ("enc1", 16, 32, 2), ("enc2", 32, 64, 2))
DECODER_LAYERS = (("dec0", 64, 32), ("dec1", 32, 16), ("dec2", 16, 3))
TOTAL_STRIDE = 4


@dataclass(eq=False)
class CodecWeights:
    backend: str = "identity"
    tensors: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        if self.backend not in ("identity", "conv"):
            raise ValueError(f"unknown codec backend {self.backend!r}")
        if self.backend == "conv":
            _check_conv_tensors(self.tensors)

    @classmethod
    def identity(cls) -> CodecWeights:
        return cls("identity")

    @classmethod
    def load(cls, path) -> CodecWeights:
        return cls("conv", tensorio.load(path))

    def save(self, path) -> None:
        if self.backend != "conv":
            raise ValueError("identity backend has no weights to save")
        tensorio.save(path, self.tensors)

    @classmethod
    def random_conv(cls, seed: int) -> CodecWeights:
        """He-initialized conv weights; useful for tests and shape checks."""
        rng = RngStream(seed)
        tensors = {}
        for name, cin, cout, _ in ENCODER_LAYERS:
            tensors[f"{name}.w"] = he_normal(rng, (3, 3, cin, cout))
            tensors[f"{name}.b"] = rng.uniform(cout, -0.1, 0.1)
        for name, cin, cout in DECODER_LAYERS:
            tensors[f"{name}.w"] = he_normal(rng, (3, 3, cin, cout))
            tensors[f"{name}.b"] = rng.uniform(cout, -0.1, 0.1)
        return cls("conv", tensors)


def _check_conv_tensors(tensors: dict[str, np.ndarray]) -> None:
    specs = [(n, ci, co) for n, ci, co, _ in ENCODER_LAYERS] + list(DECODER_LAYERS)
    for name, cin, cout in specs:
        w, b = tensors.get(f"{name}.w"), tensors.get(f"{name}.b")
        if w is None or b is None:
            raise WeightsFormatError(f"conv codec is missing tensor {name}.w / {name}.b")
        if w.shape != (3, 3, cin, cout) or b.shape != (cout,):
            raise WeightsFormatError(
                f"{name}: expected weight (3, 3, {cin}, {cout}) and bias ({cout},), "
                f"got {w.shape} and {b.shape}"
            )


def encode(img: Image, w: CodecWeights) -> np.ndarray:
    """Feature map ``(h, w, c)`` of a unit- or byte-range image."""
    x = img.to_unit().data if img.value_range != "real" else img.data
    if w.backend == "identity":
        return x.copy()
    if img.channels != 3:
        raise ShapeError("conv encoder expects 3-channel input")
    if img.height % TOTAL_STRIDE or img.width % TOTAL_STRIDE:
        raise ShapeError(
            f"image size {img.height}x{img.width} is not divisible by the encoder stride {TOTAL_STRIDE}"
        )
    h = x
    for name, _, _, stride in ENCODER_LAYERS:
        h, _ = conv2d(h, w.tensors[f"{name}.w"], w.tensors[f"{name}.b"], stride=stride)
        h = relu(h)
    return h


def decode(f: np.ndarray, w: CodecWeights) -> Image:
    f = np.asarray(f, dtype=np.float64)
    if w.backend == "identity":
        if f.ndim != 3 or f.shape[2] not in (1, 3):
            raise ShapeError(f"identity decoder needs 1 or 3 channels, got {f.shape}")
        return Image(np.clip(f, 0.0, 1.0), "unit")
    if f.ndim != 3 or f.shape[2] != DECODER_LAYERS[0][1]:
        raise ShapeError(f"conv decoder expects (h, w, {DECODER_LAYERS[0][1]}) features, got {f.shape}")
    h = f
    for i, (name, _, _) in enumerate(DECODER_LAYERS):
        h, _ = conv2d(h, w.tensors[f"{name}.w"], w.tensors[f"{name}.b"])
        if i < len(DECODER_LAYERS) - 1:
            h = upsample_nearest(relu(h))
    return Image(np.clip(h, 0.0, 1.0), "unit")


def adain_with_stats(content: np.ndarray, style_mean: np.ndarray, style_std: np.ndarray) -> np.ndarray:
    c_mean, c_std = channel_stats(content)
    bad = np.flatnonzero(c_std <= CONTENT_STD_FLOOR)
    if bad.size:
        raise DegenerateError(f"content channel(s) {bad.tolist()} have zero variance")
    return style_std * (content - c_mean) / c_std + style_mean


def adain(content: np.ndarray, style: np.ndarray) -> np.ndarray:
    """Re-scale each content channel to the style channel's mean and std.

    Statistics are population moments over the whole spatial extent; content
    and style may differ in size but must have the same channel count.
    """
    content = np.asarray(content, dtype=np.float64)
    style = np.asarray(style, dtype=np.float64)
    if content.shape[-1] != style.shape[-1]:
        raise ShapeError(f"channel mismatch: content {content.shape[-1]}, style {style.shape[-1]}")
    s_mean, s_std = channel_stats(style)
    return adain_with_stats(content, s_mean, s_std)


def gtr_stylize(x: Image, t: Image, w: CodecWeights) -> Image:
    return decode(adain(encode(x, w), encode(t, w)), w)
