"""Texture-complexity scoring and painting pool selection.

Texture complexity is the fraction of pixels whose Sobel gradient magnitude,
measured on byte-scale luma, reaches ``epsilon``. Paintings whose complexity
falls inside a band are accepted, and ``k`` of them are drawn uniformly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage

from .errors import InsufficientPoolError, InvalidParameterError, ShapeError
from .imaging import BORDER_MODE, Image, convolve_array, gaussian_kernel, read_image, to_grayscale
from .rng import RngStream

IMAGE_SUFFIXES = (".png", ".ppm", ".pgm", ".pnm")

SOBEL_X = np.array([[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]])
SOBEL_Y = SOBEL_X.T


@dataclass
class SelectionConfig:
    epsilon: float = 20.0
    band_min: float = 0.55
    band_max: float = 0.65
    k: int = 15
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.band_min < self.band_max <= 1.0:
            raise InvalidParameterError(f"bad complexity band [{self.band_min}, {self.band_max}]")
        if self.k < 1:
            raise InvalidParameterError("k must be >= 1")
        if not self.epsilon > 0:
            raise InvalidParameterError("epsilon must be positive")

    def in_band(self, complexity: float) -> bool:
        return self.band_min <= complexity <= self.band_max


@dataclass
class PaintingRecord:
    path: str
    image: Image
    texture_complexity: float
    accepted: bool


def _byte_luma(img: Image) -> np.ndarray:
    if img.height < 3 or img.width < 3:
        raise InvalidParameterError(f"gradient needs at least 3x3 pixels, got {img.height}x{img.width}")
    if img.channels == 3:
        img = to_grayscale(img)
    if img.value_range == "unit":
        img = img.to_byte()
    return img.data[:, :, 0]


def gradient_field(img: Image) -> np.ndarray:
    """Sobel gradient magnitude on byte-scale luma, shape ``(H, W)``."""
    luma = _byte_luma(img)
    gx = ndimage.correlate(luma, SOBEL_X, mode=BORDER_MODE)
    gy = ndimage.correlate(luma, SOBEL_Y, mode=BORDER_MODE)
    return np.hypot(gx, gy)


def texture_complexity(img: Image, epsilon: float = 20.0) -> float:
    if not epsilon > 0:
        raise InvalidParameterError("epsilon must be positive")
    grad = gradient_field(img)
    # Grad == epsilon counts as unsmooth
    return float(np.count_nonzero(grad >= epsilon)) / grad.size


def list_images(directory) -> list[Path]:
    directory = Path(directory)
    if not directory.is_dir():
        raise InvalidParameterError(f"{directory} is not a directory")
    return sorted(
        (p for p in directory.iterdir() if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES),
        key=lambda p: p.name,
    )


def score_paintings(paths, cfg: SelectionConfig) -> list[PaintingRecord]:
    records = []
    for path in paths:
        img = read_image(path)
        tc = texture_complexity(img, cfg.epsilon)
        records.append(PaintingRecord(str(path), img, tc, cfg.in_band(tc)))
    return records


def select_paintings(directory, cfg: SelectionConfig) -> list[PaintingRecord]:
    """Score every image in ``directory`` and draw ``cfg.k`` accepted ones uniformly."""
    records = score_paintings(list_images(directory), cfg)
    accepted = [r for r in records if r.accepted]
    if len(accepted) < cfg.k:
        raise InsufficientPoolError(
            f"only {len(accepted)} of {len(records)} paintings fall in "
            f"[{cfg.band_min}, {cfg.band_max}]; need {cfg.k} (short by {cfg.k - len(accepted)})"
        )
    order = RngStream(cfg.seed).permutation(len(accepted))
    return [accepted[i] for i in sorted(order[: cfg.k])]


def sample_painting(pool: list, rng: RngStream):
    if not pool:
        raise InvalidParameterError("painting pool is empty")
    return pool[rng.integers(len(pool))]


def write_manifest(path, records: list[PaintingRecord]) -> None:
    entries = [{"path": r.path, "texture_complexity": round(r.texture_complexity, 6)} for r in records]
    Path(path).write_text(json.dumps(entries, indent=2) + "\n")


def read_manifest(path) -> list[dict]:
    path = Path(path)
    entries = json.loads(path.read_text())
    if not isinstance(entries, list) or not all("path" in e for e in entries):
        raise InvalidParameterError(f"{path}: expected a JSON array of {{path, texture_complexity}}")
    for e in entries:
        p = Path(e["path"])
        if not p.is_absolute():
            e["path"] = str(path.parent / p)
    return entries


def load_pool(path) -> list[Image]:
    return [read_image(e["path"]) for e in read_manifest(path)]


def synthetic_painting(height: int, width: int, detail: float, rng: RngStream,
                       palette_range: tuple[float, float] = (0.15, 0.85), grain: float = 0.18) -> Image:
    """Procedural "painting": smooth color washes with a textured region.

    ``detail`` is the approximate fraction of the canvas covered by
    high-frequency brushwork, so it roughly tracks texture complexity at
    ``epsilon = 20``.
    """
    if not 0.0 <= detail <= 1.0:
        raise InvalidParameterError("detail must lie in [0, 1]")
    if height < 8 or width < 8:
        raise ShapeError("synthetic paintings need at least 8x8 pixels")
    sigma = max(height, width) / 6.0
    k = gaussian_kernel(sigma, math.ceil(2 * sigma))
    palette = rng.uniform((2, 3), *palette_range)
    wash = convolve_array(rng.normal((height, width)), k)
    wash = (wash - wash.mean()) / (wash.std() + 1e-12)
    t = 0.5 + 0.5 * np.tanh(wash)[:, :, None]
    base = palette[0] * (1 - t) + palette[1] * t

    region = convolve_array(rng.normal((height, width)), gaussian_kernel(3.0, 9))
    if detail <= 0.0:
        mask = np.zeros((height, width), dtype=bool)
    elif detail >= 1.0:
        mask = np.ones((height, width), dtype=bool)
    else:
        mask = region >= np.quantile(region, 1.0 - detail)
    grain = rng.normal((height, width, 3)) * grain + rng.normal((height, width, 1)) * grain
    img = np.where(mask[:, :, None], base + grain, base)
    return Image(np.clip(img, 0.0, 1.0), "unit")
