"""Local texture randomization: random-boundary masks and masked mixing.

A mask is made by smoothing standard normal noise with a Gaussian whose
standard deviation is ``gamma = exp(log_base(lambda))``, then thresholding the
smoothed field at the value that leaves a fraction ``p`` of pixels white.
The threshold comes from the normal quantile of the field's own mean and
standard deviation, so no sort is needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateError, InvalidParameterError, NumericalError, ShapeError
from .gtr import CodecWeights, gtr_stylize
from .imaging import Image, channel_stats, convolve_array, gaussian_kernel
from .rng import RngStream
from .special import erf_inv

MIN_MASK_SIDE = 32
MAX_ATTEMPTS = 3


@dataclass
class LtrConfig:
    lambda_min: float = 4.0
    lambda_max: float = 16.0
    p: float = 0.5
    log_base: float = 2.0
    kernel_radius: int | None = None  # None: ceil(3 * gamma)

    def __post_init__(self):
        if not 0 < self.lambda_min <= self.lambda_max:
            raise InvalidParameterError(f"need 0 < lambda_min <= lambda_max, got {self.lambda_min}, {self.lambda_max}")
        if not 0 < self.p < 1:
            raise InvalidParameterError(f"p must lie in (0, 1), got {self.p}")
        if not (self.log_base > 0 and self.log_base != 1):
            raise InvalidParameterError(f"invalid log base {self.log_base}")
        if self.kernel_radius is not None and self.kernel_radius < 1:
            raise InvalidParameterError("kernel_radius must be >= 1")


@dataclass(eq=False)
class Mask:
    bits: np.ndarray  # (H, W) uint8 in {0, 1}
    lambda_used: float
    p: float
    seed: int
    position: int = 0

    @property
    def white_fraction(self) -> float:
        return float(self.bits.mean())


def gamma_from_lambda(lam: float, log_base: float = 2.0) -> float:
    if not lam > 0:
        raise InvalidParameterError(f"lambda must be positive, got {lam}")
    return math.exp(math.log(lam) / math.log(log_base))


def threshold_for_proportion(s, p: float) -> float:
    """Threshold leaving a fraction ``p`` of a near-Gaussian field at or above it.

    White pixels are those ``>= alpha``, so the quantile taken is ``1 - p``.
    """
    if not 0 < p < 1:
        raise InvalidParameterError(f"p must lie in (0, 1), got {p}")
    data = s.data if isinstance(s, Image) else np.asarray(s, dtype=np.float64)
    if data.ndim == 3:
        if data.shape[2] != 1:
            raise ShapeError("threshold needs a single-channel field")
        data = data[:, :, 0]
    mean, std = channel_stats(data)
    mu, sigma = float(mean[0]), float(std[0])
    if not sigma > 0:
        raise DegenerateError("smoothed field has zero variance")
    return erf_inv(1.0 - 2.0 * p) * math.sqrt(2.0) * sigma + mu


def smoothed_noise(h: int, w: int, gamma: float, rng: RngStream, radius: int | None = None) -> np.ndarray:
    radius = math.ceil(3.0 * gamma) if radius is None else radius
    return convolve_array(rng.normal((h, w)), gaussian_kernel(gamma, radius))


def generate_mask(h: int, w: int, cfg: LtrConfig, rng: RngStream) -> Mask:
    """Draw lambda, smooth fresh noise, and binarize at the calibrated threshold."""
    if h < MIN_MASK_SIDE or w < MIN_MASK_SIDE:
        raise InvalidParameterError(f"mask must be at least {MIN_MASK_SIDE}x{MIN_MASK_SIDE}, got {h}x{w}")
    seed, position = rng.seed, rng.position
    lam = rng.uniform(low=cfg.lambda_min, high=cfg.lambda_max)
    gamma = gamma_from_lambda(lam, cfg.log_base)
    stream = rng
    for attempt in range(MAX_ATTEMPTS):
        if attempt:
            stream = rng.child(attempt)
        s = smoothed_noise(h, w, gamma, stream, cfg.kernel_radius)
        try:
            alpha = threshold_for_proportion(s, cfg.p)
        except DegenerateError:
            continue
        bits = (s >= alpha).astype(np.uint8)
        return Mask(bits, lam, cfg.p, seed, position)
    raise NumericalError(f"smoothed noise stayed degenerate after {MAX_ATTEMPTS} attempts")


def mask_from_metadata(h: int, w: int, cfg: LtrConfig, mask: Mask) -> Mask:
    return generate_mask(h, w, cfg, RngStream(mask.seed, mask.position))


def mix(x: Image, x_gtr: Image, m: Mask | np.ndarray) -> Image:
    """Take stylized pixels where the mask is 1 and source pixels where it is 0."""
    bits = m.bits if isinstance(m, Mask) else np.asarray(m)
    if x.shape != x_gtr.shape or bits.shape != x.shape[:2]:
        raise ShapeError(f"shape mismatch: {x.shape}, {x_gtr.shape}, mask {bits.shape}")
    if x.value_range != x_gtr.value_range:
        raise InvalidParameterError("images must share a range tag")
    return Image(np.where(bits[:, :, None] != 0, x_gtr.data, x.data), x.value_range)


def ltr_randomize(x: Image, t: Image, w: CodecWeights, cfg: LtrConfig, rng: RngStream) -> Image:
    x = x.to_unit()
    x_gtr = gtr_stylize(x, t, w)
    return mix(x, x_gtr, generate_mask(x.height, x.width, cfg, rng))
