"""Toy ablation: baseline vs. +GTR vs. +GTR+LTR+CGL on the texture-shift benchmark."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from ..imaging import Image
from ..rng import RngStream
from ..tcps import SelectionConfig, synthetic_painting, texture_complexity
from .toydata import gen_toy_dataset
from .train import TrainConfig, evaluate, train

ABLATIONS = {
    "baseline": dict(gtr=False, ltr=False, cgl=False),
    "+gtr": dict(gtr=True, ltr=False, cgl=False),
    "+gtr+ltr+cgl": dict(gtr=True, ltr=True, cgl=True),
}

SOURCE_SEED = 1
TARGET_SEED = 2
POOL_SEED = 77


@dataclass
class BenchmarkConfig:
    iterations: int = 5000
    seeds: tuple[int, ...] = (0, 1, 2)
    n_source: int = 500
    n_target: int = 200
    lr0: float = 0.01
    precision: str = "float32"
    pool_size: int = 15
    painting_size: int = 96
    ablations: tuple[str, ...] = tuple(ABLATIONS)


@dataclass
class BenchmarkResult:
    target_miou: dict[str, list[float]] = field(default_factory=dict)
    source_miou: dict[str, list[float]] = field(default_factory=dict)
    seconds: dict[str, float] = field(default_factory=dict)

    def mean(self, name: str) -> float:
        return float(np.mean(self.target_miou[name]))


def painting_pool(k: int = 15, size: int = 96, seed: int = POOL_SEED) -> list[Image]:
    """Draw procedural paintings until ``k`` fall inside the default complexity band."""
    cfg = SelectionConfig()
    rng = RngStream(seed)
    pool = []
    while len(pool) < k:
        p = synthetic_painting(size, size, 0.42, rng)
        if cfg.in_band(texture_complexity(p, cfg.epsilon)):
            pool.append(p)
    return pool


def run_ablation(cfg: BenchmarkConfig | None = None, progress=None) -> BenchmarkResult:
    cfg = cfg or BenchmarkConfig()
    source = gen_toy_dataset("source", cfg.n_source, SOURCE_SEED)
    target = gen_toy_dataset("target", cfg.n_target, TARGET_SEED)
    pool = painting_pool(cfg.pool_size, cfg.painting_size)
    result = BenchmarkResult()
    for name in cfg.ablations:
        t0 = time.perf_counter()
        result.target_miou[name], result.source_miou[name] = [], []
        for seed in cfg.seeds:
            tc = TrainConfig(iterations=cfg.iterations, lr0=cfg.lr0, seed=seed, precision=cfg.precision,
                             log_every=max(1, cfg.iterations), **ABLATIONS[name])
            model, _ = train(tc, pool, source)
            tgt = evaluate(model, target)[1]
            src = evaluate(model, source[: cfg.n_target])[1]
            result.target_miou[name].append(tgt)
            result.source_miou[name].append(src)
            if progress is not None:
                progress(name, seed, tgt, src)
        result.seconds[name] = time.perf_counter() - t0
    return result
