"""Batched NHWC convolution with manual backward pass.

Weights are laid out ``(kh, kw, c_in, c_out)``. Padding is zero padding,
as is usual inside networks (only image-level filters use reflected borders).
float32 inputs stay float32; everything else is computed in float64.
"""

from __future__ import annotations

import numpy as np

from .errors import ShapeError


def _as_batch(x: np.ndarray) -> tuple[np.ndarray, bool]:
    x = np.asarray(x)
    if x.dtype != np.float32:
        x = x.astype(np.float64, copy=False)
    if x.ndim == 3:
        return x[None], True
    if x.ndim != 4:
        raise ShapeError(f"expected (H, W, C) or (N, H, W, C), got {x.shape}")
    return x, False


def _im2col(xp: np.ndarray, kh: int, kw: int, stride: int, ho: int, wo: int) -> np.ndarray:
    # columns ordered (kh, kw, c) to match a reshaped (kh, kw, c_in, c_out) weight
    if kh == 1 and kw == 1:
        return xp[:, : stride * ho : stride, : stride * wo : stride]
    return np.concatenate(
        [xp[:, i : i + stride * ho : stride, j : j + stride * wo : stride] for i in range(kh) for j in range(kw)],
        axis=3,
    )


def conv2d(x: np.ndarray, w: np.ndarray, b: np.ndarray, stride: int = 1, pad: int | None = None):
    """Cross-correlation of an NHWC batch. Returns ``(y, cache)``."""
    x, squeeze = _as_batch(x)
    kh, kw, cin, cout = w.shape
    if x.shape[3] != cin:
        raise ShapeError(f"input has {x.shape[3]} channels, layer expects {cin}")
    if pad is None:
        pad = kh // 2
    xp = np.pad(x, ((0, 0), (pad, pad), (pad, pad), (0, 0))) if pad else x
    ho = (xp.shape[1] - kh) // stride + 1
    wo = (xp.shape[2] - kw) // stride + 1
    if stride == 1 and kh > 1:
        # stack only the kw horizontal shifts; the kh vertical taps become row
        # offsets into that buffer, a third of the copying of full im2col
        cols = _im2col(xp, 1, kw, 1, xp.shape[1], wo)
        wr = w.reshape(kh, kw * cin, cout)
        y = cols[:, :ho] @ wr[0]
        for i in range(1, kh):
            y += cols[:, i : i + ho] @ wr[i]
        y += b
    else:
        cols = _im2col(xp, kh, kw, stride, ho, wo)
        y = cols @ w.reshape(kh * kw * cin, cout) + b
    cache = (x.shape, cols, w, stride, pad, squeeze)
    return (y[0] if squeeze else y), cache


def conv2d_backward(dy: np.ndarray, cache, need_dx: bool = True):
    """Gradients ``(dx, dw, db)`` for :func:`conv2d`."""
    xshape, cols, w, stride, pad, squeeze = cache
    if squeeze:
        dy = dy[None]
    kh, kw, cin, cout = w.shape
    k = kh * kw * cin
    n, ho, wo = dy.shape[:3]
    if stride == 1 and kh > 1:
        # per-image row windows of the shift buffer are contiguous, so no copy
        dyr = dy.reshape(n, ho * wo, cout)
        dw = np.stack([
            (cols[:, i : i + ho].reshape(n, ho * wo, kw * cin).transpose(0, 2, 1) @ dyr).sum(axis=0)
            for i in range(kh)
        ]).reshape(w.shape)
    else:
        dw = (cols.reshape(-1, k).T @ dy.reshape(-1, cout)).reshape(w.shape)
    db = dy.reshape(-1, cout).sum(axis=0)
    if not need_dx:
        return None, dw, db
    h, wd = xshape[1], xshape[2]
    if stride == 1 and kh == kw and pad <= kh - 1:
        # full correlation of dy with the flipped, channel-transposed kernel
        wt = np.ascontiguousarray(w[::-1, ::-1].transpose(0, 1, 3, 2))
        dx, _ = conv2d(dy, wt, np.zeros(cin, dtype=wt.dtype), pad=kh - 1 - pad)
    else:
        dcols = dy @ w.reshape(k, cout).T
        dxp = np.zeros((n, h + 2 * pad, wd + 2 * pad, cin), dtype=dcols.dtype)
        for i in range(kh):
            for j in range(kw):
                c0 = (i * kw + j) * cin
                dxp[:, i : i + stride * ho : stride, j : j + stride * wo : stride] += dcols[..., c0 : c0 + cin]
        dx = dxp[:, pad : pad + h, pad : pad + wd] if pad else dxp
    return (dx[0] if squeeze else dx), dw, db


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def upsample_nearest(x: np.ndarray, factor: int = 2) -> np.ndarray:
    axes = (0, 1) if x.ndim == 3 else (1, 2)
    return np.repeat(np.repeat(x, factor, axis=axes[0]), factor, axis=axes[1])


def he_normal(rng, shape: tuple[int, ...]) -> np.ndarray:
    fan_in = int(np.prod(shape[:-1]))
    return rng.normal(shape) * np.sqrt(2.0 / fan_in)
