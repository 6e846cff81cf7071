"""Momentum SGD with coupled weight decay and a poly learning-rate schedule."""

from __future__ import annotations

import numpy as np

from ..errors import InvalidParameterError


def poly_lr(t: int, lr0: float, total: int, power: float = 0.9) -> float:
    """``lr0 * (1 - t / total) ** power`` for ``0 <= t < total``."""
    if not 0 <= t < total:
        raise InvalidParameterError(f"iteration {t} outside [0, {total})")
    return lr0 * (1.0 - t / total) ** power


class MomentumSGD:
    def __init__(self, lr0: float, total: int, momentum: float = 0.9,
                 weight_decay: float = 5e-4, power: float = 0.9):
        self.lr0 = lr0
        self.total = total
        self.momentum = momentum
        self.weight_decay = weight_decay
        self.power = power
        self.velocity: dict[str, np.ndarray] = {}

    def lr(self, t: int) -> float:
        return poly_lr(t, self.lr0, self.total, self.power)

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray], t: int) -> float:
        """Update ``params`` in place; returns the learning rate used."""
        lr = self.lr(t)
        for name, p in params.items():
            g = grads[name] + self.weight_decay * p
            v = self.velocity.get(name)
            v = g if v is None else self.momentum * v + g
            self.velocity[name] = v
            p -= lr * v
        return lr


def sgd_step(model, grads, iteration: int, cfg, optimizer: MomentumSGD | None = None):
    """One update of ``model`` under ``cfg``'s schedule.

    Pass the same ``optimizer`` across calls to carry momentum; without one a
    fresh (zero-velocity) optimizer is used.
    """
    if optimizer is None:
        optimizer = MomentumSGD(cfg.lr0, cfg.iterations, cfg.momentum, cfg.weight_decay, cfg.poly_power)
    optimizer.step(model.params, grads, iteration)
    return model
