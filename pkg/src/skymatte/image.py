"""Planar float image container, colorspace conversions, and pixelwise algebra.

Images are stored channel-planar: ``data`` has shape (channels, height, width)
so that separable row/column filters stride contiguously. All public
operations are pure; a ``PlanarImage`` is immutable once constructed and may
be shared freely across threads.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

DTYPE = np.float64

# Tolerance below which out-of-range inputs are silently snapped instead of
# triggering a clamp warning.
_RANGE_SLACK = 1e-9


class Colorspace(enum.Enum):
    RGB = "rgb"
    YUV = "yuv"
    HSV = "hsv"
    MASK = "mask"
    GENERIC = "generic"


@dataclass(frozen=True)
class PlanarImage:
    """H x W x C floating-point raster with a colorspace tag.

    Invariants enforced at construction:
      * ``data.shape == (channels, height, width)`` with 1, 3, or 6 channels;
      * width >= 1 and height >= 1;
      * MASK images have exactly 1 channel and values in [0, 1].
    """

    data: np.ndarray
    colorspace: Colorspace = Colorspace.GENERIC

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=DTYPE)
        if arr.ndim == 2:
            arr = arr[np.newaxis]
        if arr.ndim != 3:
            raise InvalidInputError(
                f"image data must be (channels, height, width), got shape {arr.shape}")
        c, h, w = arr.shape
        if c not in (1, 3, 6):
            raise InvalidInputError(f"channel count must be 1, 3, or 6, got {c}")
        if h < 1 or w < 1:
            raise InvalidInputError(f"image must be at least 1x1, got {w}x{h}")
        if self.colorspace is Colorspace.MASK:
            if c != 1:
                raise InvalidInputError("MASK images must have exactly 1 channel")
            if arr.min() < -_RANGE_SLACK or arr.max() > 1.0 + _RANGE_SLACK:
                raise InvalidInputError(
                    f"MASK values must lie in [0, 1], got [{arr.min():g}, {arr.max():g}]")
            arr = np.clip(arr, 0.0, 1.0)
        arr = np.ascontiguousarray(arr)
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def channels(self) -> int:
        return self.data.shape[0]

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.data.shape

    def plane(self, i: int) -> np.ndarray:
        """Return channel plane ``i`` as a read-only (H, W) array."""
        return self.data[i]

    def to_interleaved(self) -> np.ndarray:
        """Return a writable (H, W, C) copy, the layout used by codecs."""
        return np.ascontiguousarray(np.moveaxis(self.data, 0, -1))

    @classmethod
    def from_interleaved(cls, arr: np.ndarray,
                         colorspace: Colorspace = Colorspace.GENERIC) -> "PlanarImage":
        arr = np.asarray(arr, dtype=DTYPE)
        if arr.ndim == 2:
            arr = arr[:, :, np.newaxis]
        return cls(np.moveaxis(arr, -1, 0), colorspace)

    @classmethod
    def full(cls, width: int, height: int, value, channels: int = 1,
             colorspace: Colorspace = Colorspace.GENERIC) -> "PlanarImage":
        """Constant image of the given size."""
        data = np.broadcast_to(
            np.asarray(value, dtype=DTYPE).reshape(-1, 1, 1),
            (channels, height, width))
        return cls(np.array(data), colorspace)

    def same_size(self, other: "PlanarImage") -> bool:
        return self.width == other.width and self.height == other.height


def _require_channels(img: PlanarImage, n: int, op: str) -> None:
    if img.channels != n:
        raise InvalidInputError(f"{op} expects a {n}-channel image, got {img.channels}")


def _require_colorspace(img: PlanarImage, cs: Colorspace, op: str) -> None:
    if img.colorspace is not cs:
        raise InvalidInputError(
            f"{op} expects a {cs.name} image, got {img.colorspace.name}")


def _prepare_unit_range(data: np.ndarray, strict: bool, op: str) -> np.ndarray:
    """Clamp input to [0, 1], warning if it was materially out of range."""
    lo, hi = data.min(), data.max()
    if lo >= 0.0 and hi <= 1.0:
        return data
    if strict:
        raise InvalidInputError(f"{op}: input values outside [0, 1] in strict mode")
    if lo < -_RANGE_SLACK or hi > 1.0 + _RANGE_SLACK:
        warnings.warn(f"{op}: clamping input values to [0, 1] "
                      f"(range was [{lo:g}, {hi:g}])", RuntimeWarning, stacklevel=3)
    return np.clip(data, 0.0, 1.0)


# BT.601 full-range luma/chroma matrix. Chroma rows are scaled so that the
# extreme chroma excursions land at +-0.5; the inverse is derived numerically
# so the round trip is exact to machine precision.
_KR, _KG, _KB = 0.299, 0.587, 0.114
_RGB_TO_YUV = np.array([
    [_KR, _KG, _KB],
    [-0.5 * _KR / (1 - _KB), -0.5 * _KG / (1 - _KB), 0.5],
    [0.5, -0.5 * _KG / (1 - _KR), -0.5 * _KB / (1 - _KR)],
], dtype=DTYPE)
_YUV_TO_RGB = np.linalg.inv(_RGB_TO_YUV)


def _matmul_planes(m: np.ndarray, img_data: np.ndarray) -> np.ndarray:
    # (3,3) applied per pixel over (3, H, W)
    return np.tensordot(m, img_data, axes=([1], [0]))


def rgb_to_yuv(img: PlanarImage, strict: bool = False) -> PlanarImage:
    """Convert an RGB image to full-range luma/chroma.

    Channel 0 is luma in [0, 1]; channels 1-2 are chroma centered at 0.
    Out-of-range input is clamped with a warning unless ``strict``.
    """
    _require_channels(img, 3, "rgb_to_yuv")
    _require_colorspace(img, Colorspace.RGB, "rgb_to_yuv")
    data = _prepare_unit_range(img.data, strict, "rgb_to_yuv")
    return PlanarImage(_matmul_planes(_RGB_TO_YUV, data), Colorspace.YUV)


def yuv_to_rgb(img: PlanarImage) -> PlanarImage:
    """Inverse of :func:`rgb_to_yuv` (exact to machine precision)."""
    _require_channels(img, 3, "yuv_to_rgb")
    _require_colorspace(img, Colorspace.YUV, "yuv_to_rgb")
    return PlanarImage(_matmul_planes(_YUV_TO_RGB, img.data), Colorspace.RGB)


def rgb_to_hsv(img: PlanarImage, strict: bool = False) -> PlanarImage:
    """Convert RGB to HSV with hue stored as turns in [0, 1)."""
    _require_channels(img, 3, "rgb_to_hsv")
    _require_colorspace(img, Colorspace.RGB, "rgb_to_hsv")
    r, g, b = _prepare_unit_range(img.data, strict, "rgb_to_hsv")
    v = np.maximum(np.maximum(r, g), b)
    mn = np.minimum(np.minimum(r, g), b)
    delta = v - mn
    chromatic = delta > 0
    safe_delta = np.where(chromatic, delta, 1.0)

    h = np.zeros_like(v)
    r_is_max = chromatic & (v == r)
    g_is_max = chromatic & (v == g) & ~r_is_max
    b_is_max = chromatic & ~r_is_max & ~g_is_max
    h = np.where(r_is_max, (g - b) / safe_delta, h)
    h = np.where(g_is_max, 2.0 + (b - r) / safe_delta, h)
    h = np.where(b_is_max, 4.0 + (r - g) / safe_delta, h)
    h = (h / 6.0) % 1.0

    s = np.where(v > 0, delta / np.where(v > 0, v, 1.0), 0.0)
    return PlanarImage(np.stack([h, s, v]), Colorspace.HSV)


def hsv_to_rgb(img: PlanarImage, strict: bool = False) -> PlanarImage:
    """Convert HSV (hue in turns) back to RGB."""
    _require_channels(img, 3, "hsv_to_rgb")
    _require_colorspace(img, Colorspace.HSV, "hsv_to_rgb")
    h, s, v = _prepare_unit_range(img.data, strict, "hsv_to_rgb")
    h6 = (h % 1.0) * 6.0
    sector = np.floor(h6).astype(np.int64) % 6
    f = h6 - np.floor(h6)
    p = v * (1.0 - s)
    q = v * (1.0 - f * s)
    t = v * (1.0 - (1.0 - f) * s)

    r = np.choose(sector, [v, q, p, p, t, v])
    g = np.choose(sector, [t, v, v, q, p, p])
    b = np.choose(sector, [p, p, t, v, v, q])
    return PlanarImage(np.stack([r, g, b]), Colorspace.RGB)


def outer3(x: PlanarImage, y: PlanarImage) -> PlanarImage:
    """Per-pixel upper-triangular outer product of two 3-channel images.

    Output channels are ordered (1,1), (1,2), (1,3), (2,2), (2,3), (3,3).
    """
    _require_channels(x, 3, "outer3")
    _require_channels(y, 3, "outer3")
    if not x.same_size(y):
        raise InvalidInputError("outer3 operands must share dimensions")
    return PlanarImage(_outer3_data(x.data, y.data), Colorspace.GENERIC)


def _outer3_data(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return np.stack([
        x[0] * y[0], x[0] * y[1], x[0] * y[2],
        x[1] * y[1], x[1] * y[2],
        x[2] * y[2],
    ])


def hadamard(x: PlanarImage, y: PlanarImage) -> PlanarImage:
    """Elementwise product; a 1-channel operand broadcasts across channels."""
    if not x.same_size(y):
        raise InvalidInputError("hadamard operands must share dimensions")
    if x.channels != y.channels and 1 not in (x.channels, y.channels):
        raise InvalidInputError(
            f"hadamard channel counts {x.channels} and {y.channels} are incompatible")
    return PlanarImage(x.data * y.data, Colorspace.GENERIC)


def dot3(x: PlanarImage, y: PlanarImage) -> PlanarImage:
    """Per-pixel dot product of two 3-channel images (1-channel output)."""
    _require_channels(x, 3, "dot3")
    _require_channels(y, 3, "dot3")
    if not x.same_size(y):
        raise InvalidInputError("dot3 operands must share dimensions")
    return PlanarImage((x.data * y.data).sum(axis=0, keepdims=True),
                       Colorspace.GENERIC)


def as_mask(data: np.ndarray) -> PlanarImage:
    """Wrap a (H, W) or (1, H, W) array as a clamped MASK image."""
    arr = np.asarray(data, dtype=DTYPE)
    if arr.ndim == 2:
        arr = arr[np.newaxis]
    return PlanarImage(np.clip(arr, 0.0, 1.0), Colorspace.MASK)
