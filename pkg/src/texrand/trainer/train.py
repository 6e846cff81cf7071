"""Training loop wiring raw, globally- and locally-randomized streams."""

from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import InvalidParameterError, NumericalError
from ..gtr import CodecWeights, adain_with_stats, decode, encode, gtr_stylize
from ..imaging import Image, channel_stats, convolve_array, gaussian_kernel
from ..ltr import LtrConfig, generate_mask
from ..rng import RngStream
from .losses import total_loss
from .metrics import miou
from .model import SegModel, predict
from .optim import MomentumSGD
from .toydata import ToySample, stack

log = logging.getLogger(__name__)

LOG_HEADER = "iter,lr,l_seg,l_con"

# child-stream indices under the training seed
SEED_INIT, SEED_BATCH, SEED_PAINTING, SEED_MASK, SEED_PREPROC = range(5)


@dataclass
class TrainConfig:
    beta: float = 1e-5
    class_weights: tuple[float, ...] | None = None
    lr0: float = 1e-5
    poly_power: float = 0.9
    momentum: float = 0.9
    weight_decay: float = 5e-4
    iterations: int = 200000
    batch_size: int = 2
    seed: int = 0
    gtr: bool = False
    ltr: bool = False
    cgl: bool = False
    mirror: bool = False
    blur: bool = False
    mirror_prob: float = 0.5
    blur_prob: float = 0.5
    blur_max: float = 1.0
    num_classes: int = 4
    widths: tuple[int, ...] = (16, 32)
    lambda_min: float = 4.0
    lambda_max: float = 16.0
    p: float = 0.5
    log_base: float = 2.0
    log_every: int = 100
    precision: str = "float64"

    def __post_init__(self):
        if not 0.0 <= self.beta <= 1.0:
            raise InvalidParameterError(f"beta must lie in [0, 1], got {self.beta}")
        if self.class_weights is not None:
            self.class_weights = tuple(float(w) for w in self.class_weights)
            if len(self.class_weights) != self.num_classes or min(self.class_weights) <= 0:
                raise InvalidParameterError("class_weights needs one positive weight per class")
        if self.iterations < 1 or self.batch_size < 1:
            raise InvalidParameterError("iterations and batch_size must be >= 1")
        if self.cgl and not (self.gtr and self.ltr):
            raise InvalidParameterError("cgl needs both gtr and ltr streams")
        self.widths = tuple(int(w) for w in self.widths)
        if self.precision not in ("float64", "float32"):
            raise InvalidParameterError(f"precision must be float64 or float32, got {self.precision!r}")

    @property
    def ltr_config(self) -> LtrConfig:
        return LtrConfig(self.lambda_min, self.lambda_max, self.p, self.log_base)

    @property
    def uses_paintings(self) -> bool:
        return self.gtr or self.ltr


_BOOL_WORDS = {"1": True, "true": True, "yes": True, "on": True,
               "0": False, "false": False, "no": False, "off": False}


def _coerce(name: str, raw: str):
    fields = {f.name: f for f in dataclasses.fields(TrainConfig)}
    if name not in fields:
        raise InvalidParameterError(f"unknown config key {name!r}")
    default = fields[name].default
    raw = raw.strip()
    if name in ("class_weights", "widths"):
        if name == "class_weights" and raw.lower() in ("", "none", "uniform"):
            return None
        cast = float if name == "class_weights" else int
        return tuple(cast(v) for v in raw.replace(";", ",").split(",") if v.strip())
    if isinstance(default, bool):
        try:
            return _BOOL_WORDS[raw.lower()]
        except KeyError:
            raise InvalidParameterError(f"{name}: expected a boolean, got {raw!r}") from None
    if isinstance(default, str):
        return raw
    if isinstance(default, int):
        return int(raw)
    return float(raw)


def parse_config_text(text: str) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidParameterError(f"config line {lineno}: expected key=value")
        key, raw = line.split("=", 1)
        key = key.strip().replace("-", "_")
        try:
            values[key] = _coerce(key, raw)
        except ValueError as exc:
            raise InvalidParameterError(f"config line {lineno}: {exc}") from exc
    return values


def load_config(path, **overrides) -> TrainConfig:
    values = parse_config_text(Path(path).read_text()) if path else {}
    values.update({k: v for k, v in overrides.items() if v is not None})
    return TrainConfig(**values)


def dump_config(cfg: TrainConfig) -> str:
    lines = []
    for f in dataclasses.fields(cfg):
        v = getattr(cfg, f.name)
        if isinstance(v, tuple):
            v = ",".join(repr(x) if isinstance(x, float) else str(x) for x in v)
        elif v is None:
            v = "uniform"
        elif isinstance(v, bool):
            v = str(v).lower()
        lines.append(f"{f.name} = {v}")
    return "\n".join(lines) + "\n"


class _Painting:
    """A pool painting with its per-channel statistics cached."""

    def __init__(self, image: Image, codec: CodecWeights):
        self.image = image.to_unit()
        self.codec = codec
        if codec.backend == "identity":
            self.mean, self.std = channel_stats(self.image.data)

    def stylize(self, x: np.ndarray) -> np.ndarray:
        if self.codec.backend == "identity":
            return decode(adain_with_stats(encode(Image(x), self.codec), self.mean, self.std), self.codec).data
        return gtr_stylize(Image(x), self.image, self.codec).data


def _preprocess(x: np.ndarray, y: np.ndarray, cfg: TrainConfig, rng: RngStream):
    if cfg.mirror and rng.uniform() < cfg.mirror_prob:
        x, y = x[:, ::-1], y[:, ::-1]
    if cfg.blur and rng.uniform() < cfg.blur_prob:
        sigma = rng.uniform(low=0.0, high=cfg.blur_max)
        if sigma > 0:
            x = np.clip(convolve_array(x, gaussian_kernel(sigma, max(1, math.ceil(3 * sigma)))), 0.0, 1.0)
    return np.ascontiguousarray(x), np.ascontiguousarray(y)


def train(cfg: TrainConfig, pool, data, codec: CodecWeights | None = None, progress=None):
    """Train a fresh model; returns ``(model, rows)`` with rows ``(iter, lr, l_seg, l_con)``.

    ``pool`` is a list of painting images (may be empty when neither
    randomization is enabled). ``data`` is a list of :class:`ToySample` or an
    ``(images, labels)`` pair of arrays.
    """
    codec = codec or CodecWeights.identity()
    if cfg.uses_paintings and not pool:
        raise InvalidParameterError("gtr/ltr training needs a non-empty painting pool")
    if isinstance(data, (list, tuple)) and data and isinstance(data[0], ToySample):
        images, labels = stack(data)
    else:
        images, labels = data
    paintings = [_Painting(p, codec) for p in pool] if cfg.uses_paintings else []

    root = RngStream(cfg.seed)
    model = SegModel.init(cfg.num_classes, cfg.widths, seed=root.child(SEED_INIT).seed,
                          in_channels=images.shape[3]).astype(cfg.precision)
    batch_rng = root.child(SEED_BATCH)
    paint_rng = root.child(SEED_PAINTING)
    mask_rng = root.child(SEED_MASK)
    pre_rng = root.child(SEED_PREPROC)
    ltr_cfg = cfg.ltr_config
    opt = MomentumSGD(cfg.lr0, cfg.iterations, cfg.momentum, cfg.weight_decay, cfg.poly_power)
    rows = []

    for t in range(cfg.iterations):
        idx = batch_rng.integers(len(images), size=cfg.batch_size)
        xs, ys = zip(*(_preprocess(images[i], labels[i], cfg, pre_rng) for i in idx))
        x = np.stack(xs)
        y = np.stack(ys)
        streams = {"raw": x}
        if cfg.uses_paintings:
            painting = paintings[paint_rng.integers(len(paintings))]
            x_gtr = np.stack([painting.stylize(xi) for xi in x])
            if cfg.gtr:
                streams["gtr"] = x_gtr
            if cfg.ltr:
                h, w = x.shape[1:3]
                bits = np.stack([generate_mask(h, w, ltr_cfg, mask_rng).bits for _ in range(len(x))])
                streams["ltr"] = np.where(bits[..., None] != 0, x_gtr, x)

        loss, grads, parts = total_loss(model, streams, y, cfg.beta, cfg.class_weights, cfg.cgl)
        if not np.isfinite(loss):
            raise NumericalError(
                f"non-finite loss at iteration {t}: l_seg={parts['l_seg']}, l_con={parts['l_con']}, "
                f"lr={opt.lr(t)}"
            )
        lr = opt.step(model.params, grads, t)
        if t % cfg.log_every == 0 or t == cfg.iterations - 1:
            rows.append((t, lr, parts["l_seg"], parts["l_con"]))
            log.debug("iter %d lr %.3e l_seg %.5f l_con %.5f", t, lr, parts["l_seg"], parts["l_con"])
            if progress is not None:
                progress(rows[-1])
    return model, rows


def format_log(rows) -> str:
    lines = [LOG_HEADER]
    lines += [f"{t},{lr:.10e},{ls:.10e},{lc:.10e}" for t, lr, ls, lc in rows]
    return "\n".join(lines) + "\n"


def evaluate(model: SegModel, data) -> tuple[np.ndarray, float]:
    if isinstance(data, (list, tuple)) and data and isinstance(data[0], ToySample):
        images, labels = stack(data)
    else:
        images, labels = data
    return miou(predict(model, images), labels, model.num_classes)
