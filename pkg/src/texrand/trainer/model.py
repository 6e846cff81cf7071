"""Toy fully-convolutional segmentation network with manual backprop.

Layout: 3x3 conv blocks (ReLU after each) followed by a 1x1 logits layer.
The default widths (16, 32) give ``3 -> 16 -> 32 -> num_classes``.
Spatial size is preserved (stride 1, zero padding 1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import tensorio
from ..errors import ShapeError, WeightsFormatError
from ..imaging import Image
from ..nn import conv2d, conv2d_backward, he_normal
from ..rng import RngStream


@dataclass(eq=False)
class SegModel:
    params: dict[str, np.ndarray]

    @classmethod
    def init(cls, num_classes: int = 4, widths=(16, 32), seed: int = 0, in_channels: int = 3) -> SegModel:
        rng = RngStream(seed)
        params = {}
        cin = in_channels
        for i, cout in enumerate(widths):
            params[f"conv{i}.w"] = he_normal(rng, (3, 3, cin, cout))
            params[f"conv{i}.b"] = np.zeros(cout)
            cin = cout
        params["head.w"] = he_normal(rng, (1, 1, cin, num_classes))
        params["head.b"] = np.zeros(num_classes)
        return cls(params)

    @property
    def depth(self) -> int:
        return sum(1 for k in self.params if k.startswith("conv") and k.endswith(".w"))

    @property
    def num_classes(self) -> int:
        return self.params["head.w"].shape[3]

    @property
    def widths(self) -> tuple[int, ...]:
        return tuple(self.params[f"conv{i}.w"].shape[3] for i in range(self.depth))

    def num_parameters(self) -> int:
        return sum(p.size for p in self.params.values())

    @property
    def dtype(self):
        return self.params["head.w"].dtype

    def copy(self) -> SegModel:
        return SegModel({k: v.copy() for k, v in self.params.items()})

    def astype(self, dtype) -> SegModel:
        return SegModel({k: v.astype(dtype) for k, v in self.params.items()})

    def save(self, path) -> None:
        tensorio.save(path, self.params)

    @classmethod
    def load(cls, path) -> SegModel:
        params = tensorio.load(path)
        model = cls(params)
        if "head.w" not in params or any(
            f"conv{i}.b" not in params for i in range(model.depth)
        ):
            raise WeightsFormatError(f"{path}: not a segmentation model file")
        return model


def _layer_names(model: SegModel):
    return [f"conv{i}" for i in range(model.depth)] + ["head"]


def forward_cached(model: SegModel, x: np.ndarray):
    """Logits for an ``(N, H, W, 3)`` batch plus what backward needs."""
    if x.ndim != 4 or x.shape[3] != model.params["conv0.w"].shape[2]:
        raise ShapeError(f"expected (N, H, W, {model.params['conv0.w'].shape[2]}) batch, got {x.shape}")
    caches = []
    h = x
    names = _layer_names(model)
    for name in names:
        h, cache = conv2d(h, model.params[f"{name}.w"], model.params[f"{name}.b"])
        if name != "head":
            mask = h > 0
            h = h * mask
        else:
            mask = None
        caches.append((name, cache, mask))
    return h, caches


def backward(model: SegModel, caches, dlogits: np.ndarray) -> dict[str, np.ndarray]:
    grads = {}
    g = dlogits
    for name, cache, mask in reversed(caches):
        if mask is not None:
            g = g * mask
        g, dw, db = conv2d_backward(g, cache, need_dx=name != "conv0")
        grads[f"{name}.w"] = dw
        grads[f"{name}.b"] = db
    return grads


def forward(model: SegModel, img) -> np.ndarray:
    """Pre-softmax logits, ``(H, W, C)`` for one image or ``(N, H, W, C)`` for a batch."""
    x = img.to_unit().data if isinstance(img, Image) else img
    x = np.asarray(x, dtype=model.dtype)
    single = x.ndim == 3
    logits, _ = forward_cached(model, x[None] if single else x)
    return logits[0] if single else logits


def predict(model: SegModel, x, batch: int = 16) -> np.ndarray:
    x = np.asarray(x, dtype=model.dtype)
    single = x.ndim == 3
    if single:
        x = x[None]
    out = [forward(model, x[i : i + batch]).argmax(axis=-1) for i in range(0, len(x), batch)]
    labels = np.concatenate(out)
    return labels[0] if single else labels
