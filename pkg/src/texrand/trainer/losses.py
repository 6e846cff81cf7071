"""Segmentation and consistency losses with their gradients."""

from __future__ import annotations

import numpy as np

from ..errors import ShapeError
from .model import SegModel, backward, forward_cached

STREAMS = ("raw", "gtr", "ltr")


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def weighted_ce(logits: np.ndarray, label: np.ndarray, class_weights=None):
    """Mean over pixels of ``w[y] * -log softmax(logits)[y]``.

    Returns ``(loss, dloss/dlogits)``.
    """
    logits = np.asarray(logits, dtype=np.float64)
    label = np.asarray(label)
    if logits.shape[:-1] != label.shape:
        raise ShapeError(f"logits {logits.shape} and labels {label.shape} disagree")
    c = logits.shape[-1]
    w = np.ones(c) if class_weights is None else np.asarray(class_weights, dtype=np.float64)
    z = logits - logits.max(axis=-1, keepdims=True)
    lse = np.log(np.exp(z).sum(axis=-1, keepdims=True))
    logp = z - lse
    onehot = np.eye(c)[label]
    wy = w[label]
    n = label.size
    loss = float(-(wy * (logp * onehot).sum(axis=-1)).sum() / n)
    grad = (np.exp(logp) - onehot) * (wy / n)[..., None]
    return loss, grad


def cgl_loss(feat_gtr: np.ndarray, feat_ltr: np.ndarray):
    """Mean absolute difference. Returns ``(loss, d/dfeat_gtr, d/dfeat_ltr)``; zero subgradient at ties."""
    a = np.asarray(feat_gtr, dtype=np.float64)
    b = np.asarray(feat_ltr, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeError(f"feature shapes differ: {a.shape} vs {b.shape}")
    d = a - b
    g = np.sign(d) / d.size
    return float(np.abs(d).mean()), g, -g


def total_loss(model: SegModel, streams: dict, label: np.ndarray, beta: float = 1e-5,
               class_weights=None, consistency: bool = True):
    """Three-stream objective ``(1 - beta) * L_seg + beta * L_con`` and its parameter gradients.

    ``streams`` maps ``"raw"``, ``"gtr"``, ``"ltr"`` to ``(N, H, W, 3)`` batches
    sharing ``label``; missing streams are skipped. The consistency term needs
    both ``gtr`` and ``ltr`` and is only used when ``consistency`` is set,
    otherwise the loss is plain ``L_seg``.

    Returns ``(loss, grads, parts)`` with ``parts = {"l_seg", "l_con"}``.
    """
    names = [s for s in STREAMS if s in streams]
    unknown = set(streams) - set(STREAMS)
    if unknown or "raw" not in names:
        raise ValueError(f"streams must include 'raw' and only {STREAMS}, got {sorted(streams)}")
    use_con = consistency and "gtr" in streams and "ltr" in streams
    seg_scale = (1.0 - beta) if use_con else 1.0

    dtype = model.params["conv0.w"].dtype
    batch = np.concatenate([np.asarray(streams[s], dtype=dtype) for s in names])
    n = len(streams["raw"])
    logits, caches = forward_cached(model, batch)
    per = {s: logits[i * n : (i + 1) * n] for i, s in enumerate(names)}

    dlogits = np.zeros_like(logits)
    l_seg = 0.0
    for i, s in enumerate(names):
        loss, g = weighted_ce(per[s], label, class_weights)
        l_seg += loss
        dlogits[i * n : (i + 1) * n] += seg_scale * g
    l_con = 0.0
    if use_con:
        l_con, ga, gb = cgl_loss(per["gtr"], per["ltr"])
        ig, il = names.index("gtr"), names.index("ltr")
        dlogits[ig * n : (ig + 1) * n] += beta * ga
        dlogits[il * n : (il + 1) * n] += beta * gb
    total = seg_scale * l_seg + (beta * l_con if use_con else 0.0)
    grads = backward(model, caches, dlogits)
    return total, grads, {"l_seg": l_seg, "l_con": l_con}
