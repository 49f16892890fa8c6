"""Synthetic sky/foreground scene with ground-truth alpha.

A vertical sky gradient is composited over a checkerboard through a known
anti-aliased matte: a wavy horizon plus a few thin dark cable strands. The
coarse annotation imitates polygon-style labeling (the horizon is sampled
sparsely and connected linearly; cables are ignored), which is exactly the
kind of input the refinement pipeline is meant to fix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .density import Trimap
from .image import Colorspace, DTYPE, PlanarImage
from .refine import boundary_band, build_trimap

_SKY_TOP = np.array([0.10, 0.20, 0.55])
_SKY_HORIZON = np.array([0.60, 0.70, 0.92])
_CHECKER_A = np.array([0.28, 0.17, 0.10])
_CHECKER_B = np.array([0.58, 0.46, 0.30])
_CABLE_COLOR = np.array([0.16, 0.12, 0.09])


@dataclass(frozen=True)
class SyntheticScene:
    rgb: PlanarImage
    alpha: PlanarImage
    coarse: PlanarImage
    trimap: Trimap
    sky_layer: PlanarImage
    fg_layer: PlanarImage


def _soft_step(distance: np.ndarray, radius: float) -> np.ndarray:
    """1 inside, 0 outside, linear ramp of width 2*radius across the edge."""
    return np.clip(0.5 + distance / (2.0 * radius), 0.0, 1.0)


def make_synthetic_scene(width: int, height: int, seed: int = 0,
                         cable_count: int = 2,
                         band_radius: int = 4) -> SyntheticScene:
    """Deterministic test scene with exact ground-truth alpha.

    Returns the composited RGB image, the true matte, a coarse polygon-style
    binary annotation, and a trimap derived from that annotation's boundary.
    """
    rng = np.random.default_rng(seed)
    xs = np.arange(width, dtype=DTYPE)
    ys = np.arange(height, dtype=DTYPE)[:, None]

    # Wavy horizon around 45% height; amplitude stays small enough that a
    # sparse polygon approximation lands within a few pixels of the truth.
    base = 0.45 * height
    amp = 0.035 * height
    phase = rng.uniform(0.0, 2.0 * np.pi)
    wavelength = width / rng.uniform(2.5, 3.5)
    horizon = base + amp * np.sin(2.0 * np.pi * xs / wavelength + phase)

    alpha = _soft_step(horizon[None, :] - ys, radius=1.5)

    # Thin cables sagging across the sky; they belong to the foreground, so
    # the compositing identity rgb = alpha*sky + (1-alpha)*fg stays exact.
    near_cable = np.zeros((height, width), dtype=bool)
    for k in range(cable_count):
        y0 = (0.12 + 0.10 * k) * height + rng.uniform(-2.0, 2.0)
        sag = 0.03 * height * rng.uniform(0.5, 1.0)
        cable = y0 + sag * np.sin(np.pi * xs / width)
        dist = np.abs(ys - cable[None, :])
        cable_alpha = _soft_step(dist - 1.2, radius=0.8)  # 0 on the cable
        alpha = np.minimum(alpha, cable_alpha)
        near_cable |= dist <= 2.0

    t = np.clip(ys / max(horizon.max(), 1.0), 0.0, 1.0)
    sky = (1.0 - t) * _SKY_TOP.reshape(3, 1, 1) + t * _SKY_HORIZON.reshape(3, 1, 1)

    cell = max(8, width // 16)
    checker = ((ys.astype(np.int64) // cell + (xs.astype(np.int64) // cell)[None, :]) % 2)
    fg = np.where(checker[None] == 0, _CHECKER_A.reshape(3, 1, 1),
                  _CHECKER_B.reshape(3, 1, 1))
    fg = fg * (1.0 + 0.02 * np.sin(2.0 * np.pi * xs / 37.0))[None, None, :]
    fg = np.where(near_cable[None], _CABLE_COLOR.reshape(3, 1, 1), fg)

    rgb = np.clip(alpha[None] * sky + (1.0 - alpha[None]) * fg, 0.0, 1.0)

    # Polygon-style coarse annotation: horizon sampled every `step` pixels,
    # linear in between, cables not annotated at all.
    step = max(16, width // 12)
    knots = np.arange(0, width + step, step, dtype=DTYPE).clip(max=width - 1)
    knots = np.unique(knots)
    poly = np.interp(xs, knots, horizon[knots.astype(np.int64)])
    coarse = (ys < poly[None, :]).astype(DTYPE)

    coarse_img = PlanarImage(coarse[np.newaxis], Colorspace.MASK)
    # The trimap mimics a careful annotator: a band of uncertainty around the
    # polygon boundary, and the cable corridors marked undetermined outright
    # (they are impractical to trace by hand).
    trimap = build_trimap(coarse_img, boundary_band(coarse_img, band_radius),
                          extra_undetermined=near_cable)
    return SyntheticScene(
        rgb=PlanarImage(rgb, Colorspace.RGB),
        alpha=PlanarImage(alpha[np.newaxis], Colorspace.MASK),
        coarse=coarse_img,
        trimap=trimap,
        sky_layer=PlanarImage(np.broadcast_to(sky, (3, height, width)).copy(),
                              Colorspace.RGB),
        fg_layer=PlanarImage(fg, Colorspace.RGB),
    )
