"""Confusion matrix and mean intersection-over-union."""

from __future__ import annotations

import numpy as np

from ..errors import DegenerateError, InvalidParameterError, ShapeError


def confusion_matrix(pred, gt, num_classes: int) -> np.ndarray:
    """``cm[g, p]`` counts pixels with ground truth ``g`` predicted as ``p``."""
    pred = np.asarray(pred).ravel()
    gt = np.asarray(gt).ravel()
    if pred.shape != gt.shape:
        raise ShapeError("prediction and ground truth differ in size")
    if pred.size and (max(pred.max(), gt.max()) >= num_classes or min(pred.min(), gt.min()) < 0):
        raise InvalidParameterError(f"labels must lie in [0, {num_classes})")
    return np.bincount(gt * num_classes + pred, minlength=num_classes**2).reshape(num_classes, num_classes)


def miou(pred, gt, num_classes: int) -> tuple[np.ndarray, float]:
    """Per-class IoU (NaN where the class never occurs in either map) and their mean."""
    if np.shape(pred) != np.shape(gt):
        raise ShapeError(f"shapes differ: {np.shape(pred)} vs {np.shape(gt)}")
    cm = confusion_matrix(pred, gt, num_classes)
    tp = np.diag(cm).astype(np.float64)
    union = cm.sum(axis=0) + cm.sum(axis=1) - tp
    present = union > 0
    if not present.any():
        raise DegenerateError("mIoU undefined: no class occurs in prediction or ground truth")
    iou = np.full(num_classes, np.nan)
    iou[present] = tp[present] / union[present]
    return iou, float(iou[present].mean())
