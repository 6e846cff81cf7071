"""Raster type, Gaussian kernels, reflected-border convolution, statistics and file I/O.

Images are ``(H, W, C)`` float64 arrays tagged with a value range:

* ``"unit"``: samples in [0, 1]
* ``"byte"``: samples in [0, 255]
* ``"real"``: unbounded fields (noise, smoothed noise, feature maps)

All convolutions reflect about the image edge, repeating the edge pixel
(``c b a | a b c``), which keeps the image sum for symmetric unit-sum kernels.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image as PILImage
from scipy import ndimage

from .errors import DegenerateError, ImageIOError, InvalidParameterError, ShapeError

RANGES = {"unit": (0.0, 1.0), "byte": (0.0, 255.0), "real": (-np.inf, np.inf)}

LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])

# Half-sample symmetric reflection (c b a | a b c); with a symmetric unit-sum
# kernel it preserves the image sum exactly. scipy calls this "reflect".
BORDER_MODE = "reflect"


@dataclass(frozen=True, eq=False)
class Image:
    data: np.ndarray
    value_range: str = "unit"

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim == 2:
            data = data[:, :, None]
        if data.ndim != 3 or data.shape[2] not in (1, 3):
            raise ShapeError(f"expected (H, W, 1|3) raster, got shape {data.shape}")
        if self.value_range not in RANGES:
            raise InvalidParameterError(f"unknown range tag {self.value_range!r}")
        lo, hi = RANGES[self.value_range]
        if data.size and np.isfinite(lo):
            if data.min() < lo or data.max() > hi:
                raise InvalidParameterError(
                    f"samples outside declared {self.value_range} range [{lo}, {hi}]"
                )
        object.__setattr__(self, "data", data)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.data.shape

    def to_unit(self) -> Image:
        if self.value_range == "unit":
            return self
        if self.value_range == "byte":
            return Image(self.data / 255.0, "unit")
        raise InvalidParameterError("cannot rescale an unbounded field to unit range")

    def to_byte(self) -> Image:
        if self.value_range == "byte":
            return self
        if self.value_range == "unit":
            return Image(self.data * 255.0, "byte")
        raise InvalidParameterError("cannot rescale an unbounded field to byte range")


@dataclass(frozen=True, eq=False)
class Kernel2D:
    """Square kernel of side ``2 * radius + 1``.

    ``factor`` holds the 1-D kernel when ``taps == outer(factor, factor)``;
    convolution then runs as two 1-D passes.
    """

    radius: int
    taps: np.ndarray
    factor: np.ndarray | None = field(default=None)

    def __post_init__(self):
        side = 2 * self.radius + 1
        if self.taps.shape != (side, side):
            raise ShapeError(f"taps must be {side}x{side}, got {self.taps.shape}")


def gaussian_kernel(sigma: float, radius: int) -> Kernel2D:
    """Truncated isotropic Gaussian, normalized to unit sum."""
    if not sigma > 0:
        raise InvalidParameterError(f"sigma must be positive, got {sigma}")
    radius = int(radius)
    if radius < 1:
        raise InvalidParameterError(f"radius must be >= 1, got {radius}")
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    g = np.exp(-(x * x) / (2.0 * sigma * sigma))
    g /= g.sum()
    return Kernel2D(radius, np.outer(g, g), g)


def convolve_array(arr: np.ndarray, k: Kernel2D) -> np.ndarray:
    """Convolve a 2-D or (H, W, C) array channel by channel."""
    arr = np.asarray(arr, dtype=np.float64)
    if arr.ndim == 3:
        return np.stack([convolve_array(arr[:, :, c], k) for c in range(arr.shape[2])], axis=2)
    if k.factor is not None:
        out = ndimage.convolve1d(arr, k.factor, axis=0, mode=BORDER_MODE)
        return ndimage.convolve1d(out, k.factor, axis=1, mode=BORDER_MODE)
    return ndimage.convolve(arr, k.taps, mode=BORDER_MODE)


def convolve(img: Image, k: Kernel2D) -> Image:
    out = convolve_array(img.data, k)
    if img.value_range != "real":
        lo, hi = RANGES[img.value_range]
        # unit-sum, nonnegative kernels can only overshoot by rounding
        out = np.clip(out, lo, hi) if np.all(k.taps >= 0) else out
    return Image(out, img.value_range)


def channel_stats(img: Image | np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-channel population mean and standard deviation."""
    data = img.data if isinstance(img, Image) else np.asarray(img, dtype=np.float64)
    if data.ndim == 2:
        data = data[:, :, None]
    n = data.shape[0] * data.shape[1]
    if n < 2:
        raise DegenerateError("channel statistics need at least two pixels")
    flat = data.reshape(n, data.shape[2])
    mean = flat.mean(axis=0)
    std = np.sqrt(((flat - mean) ** 2).mean(axis=0))
    return mean, std


def to_grayscale(img: Image) -> Image:
    if img.channels != 3:
        raise InvalidParameterError(f"grayscale conversion needs 3 channels, got {img.channels}")
    luma = img.data @ LUMA_WEIGHTS
    lo, hi = RANGES[img.value_range]
    return Image(np.clip(luma, lo, hi)[:, :, None], img.value_range)


def resize_bilinear(img: Image, height: int, width: int) -> Image:
    """Bilinear resize with half-pixel centers."""
    if height < 1 or width < 1:
        raise InvalidParameterError("target size must be positive")
    h, w = img.height, img.width
    ys = np.clip((np.arange(height) + 0.5) * h / height - 0.5, 0, h - 1)
    xs = np.clip((np.arange(width) + 0.5) * w / width - 0.5, 0, w - 1)
    y0 = np.floor(ys).astype(int)
    x0 = np.floor(xs).astype(int)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    wy = (ys - y0)[:, None, None]
    wx = (xs - x0)[None, :, None]
    d = img.data
    top = d[y0][:, x0] * (1 - wx) + d[y0][:, x1] * wx
    bot = d[y1][:, x0] * (1 - wx) + d[y1][:, x1] * wx
    return Image(top * (1 - wy) + bot * wy, img.value_range)


_PIL_FORMATS = {".png": "PNG", ".ppm": "PPM", ".pgm": "PPM", ".pnm": "PPM"}


def read_image(path) -> Image:
    """Load an 8-bit PNG/PPM/PGM as a byte-range image."""
    path = Path(path)
    try:
        with PILImage.open(path) as im:
            im.load()
            mode = im.mode
            if mode == "P":
                im = im.convert("RGB")
                mode = "RGB"
            if mode not in ("L", "RGB"):
                raise ImageIOError(f"{path}: unsupported pixel mode {mode} (need 8-bit gray or RGB)")
            arr = np.asarray(im, dtype=np.uint8)
    except ImageIOError:
        raise
    except (OSError, ValueError) as exc:
        raise ImageIOError(f"{path}: {exc}") from exc
    return Image(arr.astype(np.float64), "byte")


def write_image(path, img: Image) -> None:
    """Write as 8-bit PNG or binary PPM/PGM, chosen by suffix."""
    path = Path(path)
    fmt = _PIL_FORMATS.get(path.suffix.lower())
    if fmt is None:
        raise ImageIOError(f"{path}: unsupported extension (use .png, .ppm or .pgm)")
    data = img.to_byte().data
    arr = np.clip(np.rint(data), 0, 255).astype(np.uint8)
    if arr.shape[2] == 1:
        arr = arr[:, :, 0]
        if path.suffix.lower() == ".ppm":
            arr = np.repeat(arr[:, :, None], 3, axis=2)
    elif path.suffix.lower() == ".pgm":
        raise ImageIOError(f"{path}: PGM holds a single channel")
    try:
        PILImage.fromarray(arr).save(path, format=fmt)
    except OSError as exc:
        raise ImageIOError(f"{path}: {exc}") from exc
