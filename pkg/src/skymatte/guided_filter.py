"""Weighted guided filter with moment downsampling and multi-stage upsampling.

The filter approximates the mask as a locally affine function of a 3-channel
reference image. Local expectations are taken with a confidence-weighted
triangle (tent) downsample; the per-pixel 3x3 normal equations are solved with
an LDL decomposition at the reduced resolution, and the affine coefficient
images are brought back to full resolution by chained tent upsampling.

Resampling conventions used throughout:
  * sample k of a grid scaled by factor f sits at coordinate (k + 0.5) * f - 0.5
    of the finer grid ("half-pixel centers");
  * samples outside the image are clamp-to-edge extensions;
  * the low-resolution size is ceil(size / s), so no input pixel is dropped.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, InvalidParameterError, SingularSystemError
from .image import Colorspace, DTYPE, PlanarImage, _outer3_data


@dataclass(frozen=True)
class GuidedFilterParams:
    """Downsampling factor and luma/chroma regularizers."""

    s: int = 64
    eps_l: float = 0.01
    eps_c: float = 0.01

    def __post_init__(self):
        if int(self.s) != self.s or self.s < 1:
            raise InvalidParameterError(f"downsampling factor must be a positive integer, got {self.s}")
        if self.eps_l <= 0 or self.eps_c <= 0:
            raise InvalidParameterError("regularizers eps_l and eps_c must be > 0")


# ---------------------------------------------------------------------------
# tent-kernel resampling primitives (ndarray level)
# ---------------------------------------------------------------------------

def _tent_taps(s: int) -> tuple[int, np.ndarray]:
    """First tap offset and tent weights for one output of an s-fold downsample.

    Output k is centered at (k + 0.5) * s - 0.5; on a uniform grid the weight
    pattern max(0, 1 - d/s) is the same for every k, so the whole pass is a
    strided correlation with these taps (they sum to s).
    """
    center = 0.5 * s - 0.5
    first = int(np.floor(center - s)) + 1
    taps = 2 * s if s % 2 == 0 else 2 * s - 1
    w = 1.0 - np.abs(first + np.arange(taps, dtype=DTYPE) - center) / s
    return first, w


def _downsample_axis(a: np.ndarray, s: int, axis: int) -> np.ndarray:
    """Unnormalized tent downsample of one trailing axis, clamp-to-edge.

    Taps that land inside the image accumulate through strided slices; taps
    that fall off either end are folded into one correction per edge, which
    avoids materializing a padded copy of the input.
    """
    if s == 1:
        return a
    axis = axis % a.ndim
    n = a.shape[axis]
    m = -(-n // s)
    first, w = _tent_taps(s)
    shape = list(a.shape)
    shape[axis] = m
    out = np.zeros(shape, dtype=DTYPE)
    src = [slice(None)] * a.ndim
    dst = [slice(None)] * a.ndim

    head_w = np.zeros(m, dtype=DTYPE)
    tail_w = np.zeros(m, dtype=DTYPE)
    positions = first + np.arange(m, dtype=np.int64) * s
    for t in range(w.size):
        start = first + t
        k0 = 0 if start >= 0 else (-start + s - 1) // s
        k1 = min(m - 1, (n - 1 - start) // s)
        if k0 <= k1:
            src[axis] = slice(start + k0 * s, start + k1 * s + 1, s)
            dst[axis] = slice(k0, k1 + 1)
            out[tuple(dst)] += w[t] * a[tuple(src)]
        head_w += w[t] * (positions + t < 0)
        tail_w += w[t] * (positions + t > n - 1)

    for weights, edge in ((head_w, 0), (tail_w, n - 1)):
        src[axis] = edge
        for k in np.nonzero(weights)[0]:
            dst[axis] = int(k)
            out[tuple(dst)] += weights[k] * a[tuple(src)]
    return out


def tent_downsample(a: np.ndarray, s: int) -> np.ndarray:
    """Separable unnormalized tent downsample of the trailing two axes.

    Rows first: the strided row-block reads stay cache-friendly on the large
    input, and the column pass then runs on the s-fold smaller intermediate.
    """
    out = _downsample_axis(a, s, axis=-2)
    return _downsample_axis(out, s, axis=-1)


def _upsample_last(a: np.ndarray, f: int) -> np.ndarray:
    """Tent (linear) upsample of the last axis by an integer factor."""
    n = a.shape[-1]
    out = np.empty(a.shape[:-1] + (n * f,), dtype=DTYPE)
    ap = np.pad(a, [(0, 0)] * (a.ndim - 1) + [(1, 1)], mode="edge")
    # Every residue class r has one fixed source offset and lerp fraction.
    for r in range(f):
        q = (r + 0.5) / f - 0.5
        i0 = int(np.floor(q))
        t = q - i0
        lo = ap[..., i0 + 1:i0 + 1 + n]
        hi = ap[..., i0 + 2:i0 + 2 + n]
        out[..., r::f] = lo + t * (hi - lo) if t else lo
    return out


def _upsample_rows(a: np.ndarray, f: int) -> np.ndarray:
    n = a.shape[-2]
    shape = list(a.shape)
    shape[-2] = n * f
    out = np.empty(shape, dtype=DTYPE)
    pad = [(0, 0)] * a.ndim
    pad[a.ndim - 2] = (1, 1)
    ap = np.pad(a, pad, mode="edge")
    for r in range(f):
        q = (r + 0.5) / f - 0.5
        i0 = int(np.floor(q))
        t = q - i0
        lo = ap[..., i0 + 1:i0 + 1 + n, :]
        hi = ap[..., i0 + 2:i0 + 2 + n, :]
        out[..., r::f, :] = lo + t * (hi - lo) if t else lo
    return out


def _tent_upsample_2d(a: np.ndarray, f: int) -> np.ndarray:
    return _upsample_rows(_upsample_last(a, f), f)


def upsample_stages(s: int) -> tuple[int, ...]:
    """Factor s into at most three integer upsampling stages.

    The stages are as balanced as possible (64 -> 4*4*4, 48 -> 4*4*3,
    16 -> 4*2*2, 8 -> 2*2*2) and are applied largest first.
    """
    if s == 1:
        return ()
    best = None
    for a in range(1, s + 1):
        if s % a:
            continue
        rest = s // a
        for b in range(1, rest + 1):
            if rest % b:
                continue
            c = rest // b
            f = tuple(sorted((a, b, c), reverse=True))
            key = (f[0] - f[2], f[0])
            if best is None or key < best[0]:
                best = (key, f)
    return tuple(f for f in best[1] if f > 1)


def tent_upsample(a: np.ndarray, s: int) -> np.ndarray:
    """Chained tent upsample of the trailing two axes by a total factor s."""
    for f in upsample_stages(s):
        a = _tent_upsample_2d(a, f)
    return a


def _resize_axis(a: np.ndarray, size: int, axis: int) -> np.ndarray:
    n = a.shape[axis]
    if n == size:
        return a
    q = (np.arange(size, dtype=DTYPE) + 0.5) * (n / size) - 0.5
    i0 = np.floor(q).astype(np.int64)
    t = q - i0
    lo = np.take(a, np.clip(i0, 0, n - 1), axis=axis)
    hi = np.take(a, np.clip(i0 + 1, 0, n - 1), axis=axis)
    shape = [1] * a.ndim
    shape[axis] = size
    t = t.reshape(shape)
    return lo * (1.0 - t) + hi * t


def bilinear_resize(a: np.ndarray, height: int, width: int) -> np.ndarray:
    """Plain bilinear resize of the trailing two axes (no antialiasing)."""
    out = _resize_axis(a, width, axis=a.ndim - 1)
    return _resize_axis(out, height, axis=a.ndim - 2)


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------

def weighted_downsample(x: PlanarImage, c: PlanarImage, s: int) -> PlanarImage:
    """Confidence-weighted tent downsample: ds(x o c, s) / ds(c, s).

    ``c`` must be a strictly positive 1-channel map; it broadcasts across the
    channels of ``x``. Output dimensions are ceil(width/s) x ceil(height/s).
    """
    if c.channels != 1:
        raise InvalidInputError("confidence map must have 1 channel")
    if not x.same_size(c):
        raise InvalidInputError("image and confidence map must share dimensions")
    if c.data.min() <= 0.0:
        raise InvalidInputError("confidence must be strictly positive everywhere")
    if int(s) != s or s < 1:
        raise InvalidParameterError(f"downsampling factor must be a positive integer, got {s}")
    num = tent_downsample(x.data * c.data, s)
    den = tent_downsample(c.data, s)
    return PlanarImage(num / den, Colorspace.GENERIC)


def smooth_upsample(x: PlanarImage, s: int) -> PlanarImage:
    """Upsample by s using chained triangle kernels (see upsample_stages)."""
    if int(s) != s or s < 1:
        raise InvalidParameterError(f"upsampling factor must be a positive integer, got {s}")
    return PlanarImage(tent_upsample(x.data, s), Colorspace.GENERIC)


def solve_image_ldl3(a: PlanarImage, b: PlanarImage) -> PlanarImage:
    """Solve the per-pixel symmetric 3x3 systems A(i) x(i) = b(i).

    ``a`` is a 6-channel image holding the upper triangle of each matrix in
    the order (1,1), (1,2), (1,3), (2,2), (2,3), (3,3); ``b`` is 3-channel.
    """
    if a.channels != 6 or b.channels != 3:
        raise InvalidInputError("solve_image_ldl3 expects a 6-channel A and 3-channel b")
    if not a.same_size(b):
        raise InvalidInputError("A and b must share dimensions")
    return PlanarImage(_solve_ldl3_data(a.data, b.data), Colorspace.GENERIC)


def _check_pivot(d: np.ndarray, name: str) -> None:
    if d.min() <= 0.0:
        y, x = np.argwhere(d <= 0.0)[0]
        raise SingularSystemError(
            f"non-positive pivot {name}={d[y, x]:g} at pixel (x={x}, y={y})")


def _solve_ldl3_data(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a11, a12, a13, a22, a23, a33 = a
    d1 = a11
    _check_pivot(d1, "d1")
    l12 = a12 / d1
    d2 = a22 - l12 * a12
    _check_pivot(d2, "d2")
    l13 = a13 / d1
    l23 = (a23 - l13 * a12) / d2
    d3 = a33 - l13 * a13 - l23 * l23 * d2
    _check_pivot(d3, "d3")
    y1 = b[0]
    y2 = b[1] - l12 * y1
    y3 = b[2] - l13 * y1 - l23 * y2
    x3 = y3 / d3
    x2 = y2 / d2 - l23 * x3
    x1 = y1 / d1 - l12 * x2 - l13 * x3
    return np.stack([x1, x2, x3])


def guided_filter_coefficients(
    ref: PlanarImage,
    p: PlanarImage,
    c: PlanarImage,
    params: GuidedFilterParams,
) -> tuple[np.ndarray, np.ndarray]:
    """Low-resolution affine coefficients (A, b) of the weighted filter.

    Returns arrays of shape (3, h, w) and (1, h, w) with h = ceil(H/s),
    w = ceil(W/s). Exposed separately so the number of linear systems the
    solver touches (h*w) is observable.
    """
    if ref.channels != 3:
        raise InvalidInputError("reference image must have 3 channels")
    if p.channels != 1 or c.channels != 1:
        raise InvalidInputError("mask and confidence must have 1 channel")
    if not p.same_size(c):
        raise InvalidInputError("mask and confidence must share dimensions")
    if c.data.min() <= 0.0:
        raise InvalidInputError("confidence must be strictly positive everywhere")

    i_data = ref.data
    p_data, c_data = p.data, c.data
    if p.width != ref.width or p.height != ref.height:
        if p.width > ref.width or p.height > ref.height:
            raise InvalidInputError("mask resolution may not exceed the reference")
        p_data = bilinear_resize(p_data, ref.height, ref.width)
        c_data = bilinear_resize(c_data, ref.height, ref.width)

    s = params.s
    # Weighted moments of I, P, I(x)I, and I o P plus the confidence itself,
    # fused into one stack so the tent passes run exactly twice.
    h, w = ref.height, ref.width
    stack = np.empty((14, h, w), dtype=DTYPE)
    np.multiply(i_data, c_data, out=stack[0:3])          # I o C
    np.multiply(p_data, c_data, out=stack[3:4])          # P o C
    ic = stack[0:3]
    for out_ch, (i, j) in enumerate(((0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2))):
        np.multiply(ic[i], i_data[j], out=stack[4 + out_ch])   # (I(x)I) o C
    np.multiply(i_data, stack[3:4], out=stack[10:13])    # (I o P) o C
    stack[13] = c_data[0]

    lo = tent_downsample(stack, s)
    means = lo[:13] / lo[13]

    i_lo = means[0:3]
    p_lo = means[3:4]
    sigma = means[4:10] - _outer3_data(i_lo, i_lo)
    small_sigma = means[10:13] - i_lo * p_lo

    sigma[0] += params.eps_l ** 2
    sigma[3] += params.eps_c ** 2
    sigma[5] += params.eps_c ** 2

    a_lo = _solve_ldl3_data(sigma, small_sigma)
    b_lo = p_lo - np.einsum("chw,chw->hw", a_lo, i_lo)[np.newaxis]
    return a_lo, b_lo


def modified_guided_filter(
    ref: PlanarImage,
    p: PlanarImage,
    c: PlanarImage,
    params: GuidedFilterParams,
    stats: dict | None = None,
) -> PlanarImage:
    """Edge-aware refinement of mask ``p`` guided by ``ref``.

    The mask and confidence map may arrive at a lower resolution than the
    reference; they are bilinearly resized to the reference grid first. The
    output resembles ``p`` where confidence is high, adheres to the edges of
    ``ref``, and is clamped to [0, 1].

    ``stats``, when given, receives the low-resolution grid size and the
    number of per-pixel linear systems solved.
    """
    a_lo, b_lo = guided_filter_coefficients(ref, p, c, params)
    if stats is not None:
        stats["lowres_height"] = a_lo.shape[1]
        stats["lowres_width"] = a_lo.shape[2]
        stats["systems_solved"] = a_lo.shape[1] * a_lo.shape[2]

    a_full = tent_upsample(a_lo, params.s)[:, :ref.height, :ref.width]
    b_full = tent_upsample(b_lo, params.s)[:, :ref.height, :ref.width]
    y = np.einsum("chw,chw->hw", a_full, ref.data)[np.newaxis] + b_full
    return PlanarImage(np.clip(y, 0.0, 1.0), Colorspace.MASK)
