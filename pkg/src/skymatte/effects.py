"""Sky grading operators, alpha-composited with the sky matte.

All effects are pure pixelwise operators blended with the original through
the matte. Blends are written in delta form, out = base + alpha * (graded -
base), so a zero matte or a no-op parameter reproduces the input bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .confidence import bias
from .errors import ConfigError, InvalidInputError, InvalidParameterError
from .image import Colorspace, DTYPE, PlanarImage


@dataclass(frozen=True)
class Lut2d:
    """2-D lookup table with monotone axis coordinates.

    ``values[i, j]`` is the entry at (x_axis[i], y_axis[j]); queries are
    bilinearly interpolated inside the grid and clamped to the edge outside.
    """

    x_axis: np.ndarray
    y_axis: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x_axis, dtype=DTYPE)
        y = np.asarray(self.y_axis, dtype=DTYPE)
        v = np.asarray(self.values, dtype=DTYPE)
        if x.ndim != 1 or y.ndim != 1 or x.size < 2 or y.size < 2:
            raise ConfigError("LUT axes must be 1-D with at least 2 entries each")
        if v.shape != (x.size, y.size):
            raise ConfigError(f"LUT grid shape {v.shape} does not match axes "
                              f"({x.size}, {y.size})")
        if (np.diff(x) <= 0).any() or (np.diff(y) <= 0).any():
            raise ConfigError("LUT axis coordinates must be strictly increasing")
        for name, arr in (("x_axis", x), ("y_axis", y), ("values", v)):
            arr = np.ascontiguousarray(arr)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @classmethod
    def from_dict(cls, d: dict) -> "Lut2d":
        try:
            return cls(d["x_axis"], d["y_axis"], d["values"])
        except KeyError as e:
            raise ConfigError(f"LUT is missing field {e.args[0]!r}") from None


def lut2d_lookup(lut: Lut2d, x: float, y: float) -> float:
    """Bilinear lookup with clamp-to-edge extrapolation."""
    xi = _axis_pos(lut.x_axis, x)
    yi = _axis_pos(lut.y_axis, y)
    i0, tx = int(np.floor(xi)), xi - np.floor(xi)
    j0, ty = int(np.floor(yi)), yi - np.floor(yi)
    i1, j1 = min(i0 + 1, lut.x_axis.size - 1), min(j0 + 1, lut.y_axis.size - 1)
    v = lut.values
    top = v[i0, j0] * (1 - ty) + v[i0, j1] * ty
    bot = v[i1, j0] * (1 - ty) + v[i1, j1] * ty
    return float(top * (1 - tx) + bot * tx)


def _axis_pos(axis: np.ndarray, q: float) -> float:
    """Fractional index of q on a monotone axis, clamped to the grid."""
    if q <= axis[0]:
        return 0.0
    if q >= axis[-1]:
        return float(axis.size - 1)
    i = int(np.searchsorted(axis, q, side="right")) - 1
    return i + (q - axis[i]) / (axis[i + 1] - axis[i])


@dataclass(frozen=True)
class EffectParams:
    """Parameters of the grading effects; LUTs override the scalar shapes."""

    b_d: float = 0.5
    b_c: float = 0.5
    t_c: float = 0.085
    t_d: float = 0.8
    gains_fg: tuple[float, float, float] = (1.0, 1.0, 1.0)
    gains_sky: tuple[float, float, float] = (1.0, 1.0, 1.0)
    b_d_lut: Lut2d | None = None
    b_c_lut: Lut2d | None = None

    def __post_init__(self):
        for name in ("b_d", "b_c"):
            v = getattr(self, name)
            if not (0.0 < v < 1.0):
                raise InvalidParameterError(f"{name} must lie in (0, 1)")
        if not (0.0 <= self.t_c < 1.0):
            raise InvalidParameterError("t_c must lie in [0, 1)")
        if not (0.0 < self.t_d < 1.0):
            raise InvalidParameterError("t_d must lie in (0, 1)")
        for name in ("gains_fg", "gains_sky"):
            g = getattr(self, name)
            if len(g) != 3 or any(v <= 0 for v in g):
                raise InvalidParameterError(f"{name} must be 3 positive multipliers")


def _check_pair(img: PlanarImage, alpha: PlanarImage, op: str) -> None:
    if img.channels != 3:
        raise InvalidInputError(f"{op} expects a 3-channel image")
    if alpha.channels != 1:
        raise InvalidInputError(f"{op} expects a 1-channel matte")
    if not img.same_size(alpha):
        raise InvalidInputError(f"{op}: image and matte must share dimensions")


def _remap_value(img_data: np.ndarray, new_v: np.ndarray) -> np.ndarray:
    """Rescale RGB so its HSV value channel becomes ``new_v``.

    Scaling all three channels by new_v / v changes only V in the HSV
    decomposition: hue and saturation depend on channel ratios alone.
    """
    v = img_data.max(axis=0, keepdims=True)
    ratio = np.divide(new_v, v, out=np.ones_like(v), where=v > 0)
    return img_data * ratio


def _blend(base: np.ndarray, graded: np.ndarray, alpha: np.ndarray) -> np.ndarray:
    return base + alpha * (graded - base)


def darken_sky(img: PlanarImage, alpha: PlanarImage, b_d: float) -> PlanarImage:
    """Darken the sky by tonemapping the HSV value channel with a bias curve.

    b_d = 0.5 leaves the image untouched; smaller values darken mid tones.
    Hue and saturation are preserved wherever the matte is 1.
    """
    _check_pair(img, alpha, "darken_sky")
    if not (0.0 < b_d < 1.0):
        raise InvalidParameterError(f"b_d must lie in (0, 1), got {b_d}")
    v = img.data.max(axis=0, keepdims=True)
    graded = _remap_value(img.data, bias(v, b_d))
    out = _blend(img.data, graded, alpha.data)
    return PlanarImage(np.clip(out, 0.0, 1.0), Colorspace.RGB)


def enhance_contrast(img: PlanarImage, alpha: PlanarImage,
                     b_c: float, t_c: float = 0.085) -> PlanarImage:
    """Boost mid-brightness contrast, leaving values below t_c unchanged.

    The value channel maps to (1 - t_c) * bias((v - t_c)/(1 - t_c), b_c) + t_c
    above the threshold; the curve is continuous at v = t_c.
    """
    _check_pair(img, alpha, "enhance_contrast")
    if not (0.0 < b_c < 1.0):
        raise InvalidParameterError(f"b_c must lie in (0, 1), got {b_c}")
    if not (0.0 <= t_c < 1.0):
        raise InvalidParameterError(f"t_c must lie in [0, 1), got {t_c}")
    v = img.data.max(axis=0, keepdims=True)
    boosted = (1.0 - t_c) * bias(np.clip((v - t_c) / (1.0 - t_c), 0.0, 1.0), b_c) + t_c
    new_v = np.where(v < t_c, v, boosted)
    graded = _remap_value(img.data, new_v)
    out = _blend(img.data, graded, alpha.data)
    return PlanarImage(np.clip(out, 0.0, 1.0), Colorspace.RGB)


def composite_denoised(fg: PlanarImage, sky: PlanarImage, alpha: PlanarImage,
                       t_d: float = 0.8) -> PlanarImage:
    """Blend two denoised renditions through a clamped, rescaled matte.

    Matte values below t_d become 0 and the rest rescale to [0, 1], which
    protects foreground detail from the stronger sky denoise.
    """
    _check_pair(fg, alpha, "composite_denoised")
    if fg.channels != sky.channels or not fg.same_size(sky):
        raise InvalidInputError("composite_denoised renditions must share shape")
    if not (0.0 < t_d < 1.0):
        raise InvalidParameterError(f"t_d must lie in (0, 1), got {t_d}")
    a = alpha.data
    hardened = np.where(a < t_d, 0.0, (a - t_d) / (1.0 - t_d))
    out = hardened * sky.data + (1.0 - hardened) * fg.data
    return PlanarImage(np.clip(out, 0.0, 1.0), Colorspace.RGB)


def apply_dual_wb(img: PlanarImage, alpha: PlanarImage,
                  gains_fg, gains_sky) -> PlanarImage:
    """Blend two white-balance gain triples through the sky matte.

    Each channel gets alpha * (g_sky * v) + (1 - alpha) * (g_fg * v),
    clamped to [0, 1]; where the matte is 0 only the foreground gains apply.
    """
    _check_pair(img, alpha, "apply_dual_wb")
    g_fg = np.asarray(gains_fg, dtype=DTYPE).reshape(3, 1, 1)
    g_sky = np.asarray(gains_sky, dtype=DTYPE).reshape(3, 1, 1)
    if (g_fg <= 0).any() or (g_sky <= 0).any():
        raise InvalidParameterError("white-balance gains must be positive")
    fg_px = g_fg * img.data
    sky_px = g_sky * img.data
    out = _blend(fg_px, sky_px, alpha.data)
    return PlanarImage(np.clip(out, 0.0, 1.0), Colorspace.RGB)
