"""Procedural texture-shift benchmark.

Each sample holds 1-3 shapes (circle, rectangle, triangle; classes 1-3) on a
background (class 0). Every region is a base color plus a surface pattern
drawn from the domain's texture set: {stripes, dots, flat} for the source,
{checker, grain, gradient} for the target.

Two cues identify a region's class. The source renderer paints each class
in a fixed base color, a shortcut that does not carry over to the target,
where base colors are random. The other cue is the class's channel
signature: the pattern moves R, G and B with a class-specific sign pattern
(all together for background; one channel against another for each shape).
Per-channel statistic swaps such as AdaIN keep those signs, so a model that
reads them transfers across domains. The segmentation network only sees a
5x5 neighbourhood, so whole-shape geometry is not usable as a cue.

Geometry comes from its own child stream of the seed, so both domains share
label maps for a given seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidParameterError
from ..imaging import Image
from ..rng import RngStream

SIZE = 64
NUM_CLASSES = 4
CLASS_NAMES = ("background", "circle", "rectangle", "triangle")

SOURCE_TEXTURES = ("stripes", "dots", "flat")
TARGET_TEXTURES = ("checker", "grain", "gradient")

# Source rendering gives every class a fixed base color; this is the
# domain-specific shortcut. Target regions get random base colors.
SOURCE_COLORS = np.array([
    [0.50, 0.50, 0.50],
    [0.68, 0.40, 0.40],
    [0.40, 0.68, 0.40],
    [0.40, 0.40, 0.68],
])

# How a region's surface pattern spreads over R, G, B. The signs survive any
# per-channel positive affine recoloring, so this is the domain-invariant cue.
SIGNATURES = np.array([
    [1.0, 1.0, 1.0],
    [1.0, -1.0, 0.0],
    [0.0, 1.0, -1.0],
    [-1.0, 0.0, 1.0],
])


@dataclass(eq=False)
class ToySample:
    image: Image
    label: np.ndarray  # (H, W) int64 class ids


def _shape_mask(kind: int, rng: RngStream, yy: np.ndarray, xx: np.ndarray) -> np.ndarray:
    cy, cx = rng.uniform(2, 12.0, SIZE - 12.0)
    if kind == 1:
        r = rng.uniform(low=7.0, high=15.0)
        return (yy - cy) ** 2 + (xx - cx) ** 2 <= r * r
    if kind == 2:
        hh, hw = rng.uniform(2, 6.0, 14.0)
        return (np.abs(yy - cy) <= hh) & (np.abs(xx - cx) <= hw)
    r = rng.uniform(low=12.0, high=21.0)
    phase = rng.uniform(low=0.0, high=2 * np.pi)
    angles = phase + np.array([0.0, 2 * np.pi / 3, 4 * np.pi / 3])
    vy, vx = cy + r * np.sin(angles), cx + r * np.cos(angles)
    inside = np.ones_like(yy, dtype=bool)
    for i in range(3):
        j = (i + 1) % 3
        cross = (vx[j] - vx[i]) * (yy - vy[i]) - (vy[j] - vy[i]) * (xx - vx[i])
        inside &= cross >= 0
    return inside


def _geometry(rng: RngStream) -> np.ndarray:
    yy, xx = np.mgrid[0:SIZE, 0:SIZE].astype(np.float64)
    label = np.zeros((SIZE, SIZE), dtype=np.int64)
    for _ in range(1 + rng.integers(3)):
        kind = 1 + rng.integers(3)
        label[_shape_mask(kind, rng, yy, xx)] = kind
    return label


def texture_pattern(name: str, rng: RngStream) -> np.ndarray:
    """Zero-centered modulation field in roughly [-1, 1], shape ``(SIZE, SIZE)``."""
    yy, xx = np.mgrid[0:SIZE, 0:SIZE].astype(np.float64)
    if name == "flat":
        return np.zeros((SIZE, SIZE))
    if name == "stripes":
        period = rng.uniform(low=4.0, high=10.0)
        theta = rng.uniform(low=0.0, high=np.pi)
        return np.sign(np.sin(2 * np.pi * (xx * np.cos(theta) + yy * np.sin(theta)) / period))
    if name == "dots":
        period = rng.uniform(low=5.0, high=9.0)
        radius = rng.uniform(low=1.0, high=2.2)
        oy, ox = rng.uniform(2, 0.0, period)
        dy = (yy + oy) % period - period / 2
        dx = (xx + ox) % period - period / 2
        return np.where(dy * dy + dx * dx <= radius * radius, 1.0, -0.25)
    if name == "checker":
        period = rng.uniform(low=3.0, high=8.0)
        return np.sign(np.sin(np.pi * (xx + 0.5) / period) * np.sin(np.pi * (yy + 0.5) / period))
    if name == "grain":
        return np.clip(rng.normal((SIZE, SIZE)) * 0.6, -1.5, 1.5)
    if name == "gradient":
        theta = rng.uniform(low=0.0, high=2 * np.pi)
        return ((xx - SIZE / 2) * np.cos(theta) + (yy - SIZE / 2) * np.sin(theta)) / (SIZE / 2)
    raise InvalidParameterError(f"unknown texture {name!r}")


def render(label: np.ndarray, domain: str, rng: RngStream) -> Image:
    textures = SOURCE_TEXTURES if domain == "source" else TARGET_TEXTURES
    img = np.zeros((SIZE, SIZE, 3))
    for k in range(NUM_CLASSES):
        region = label == k
        if domain == "source":
            color = SOURCE_COLORS[k] + rng.uniform(3, -0.04, 0.04)
        else:
            color = rng.uniform(3, 0.3, 0.7)
        pattern = texture_pattern(textures[rng.integers(len(textures))], rng)
        amp = rng.uniform(low=0.15, high=0.25)
        field = color + amp * pattern[:, :, None] * SIGNATURES[k]
        img[region] = field[region]
    return Image(np.clip(img, 0.0, 1.0), "unit")


def gen_toy_dataset(domain: str, n: int, seed: int) -> list[ToySample]:
    if domain not in ("source", "target"):
        raise InvalidParameterError(f"domain must be 'source' or 'target', got {domain!r}")
    if n < 1:
        raise InvalidParameterError("n must be >= 1")
    root = RngStream(seed)
    samples = []
    for i in range(n):
        item = root.child(i)
        label = _geometry(item.child(0))
        image = render(label, domain, item.child(1 if domain == "source" else 2))
        samples.append(ToySample(image, label))
    return samples


def stack(samples: list[ToySample]) -> tuple[np.ndarray, np.ndarray]:
    return (np.stack([s.image.data for s in samples]), np.stack([s.label for s in samples]))
