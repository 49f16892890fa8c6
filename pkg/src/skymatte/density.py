"""Density-estimation inpainting of undetermined trimap pixels.

Undetermined pixels are scored by a Gaussian kernel density over the RGB
values of (a sample of) the annotated sky pixels, then relabeled sky or
not-sky by thresholding that probability.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import EmptyReferenceError, InvalidInputError, InvalidParameterError
from .image import Colorspace, DTYPE, PlanarImage


class TrimapLabel(enum.IntEnum):
    NOT_SKY = 0
    UNDETERMINED = 1
    SKY = 2


@dataclass(frozen=True)
class Trimap:
    """Per-pixel label image over {sky, not-sky, undetermined}."""

    labels: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.labels, dtype=np.uint8)
        if arr.ndim != 2:
            raise InvalidInputError(f"trimap labels must be 2-D, got shape {arr.shape}")
        if not np.isin(arr, (TrimapLabel.NOT_SKY, TrimapLabel.UNDETERMINED,
                             TrimapLabel.SKY)).all():
            raise InvalidInputError("trimap contains values outside the three labels")
        arr = np.ascontiguousarray(arr)
        arr.flags.writeable = False
        object.__setattr__(self, "labels", arr)

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    def count(self, label: TrimapLabel) -> int:
        return int((self.labels == label).sum())


@dataclass(frozen=True)
class DensityParams:
    """Kernel bandwidth, sample budget, threshold, and sampling seed.

    ``normalize_kernel`` rescales the Gaussian so a zero-distance match scores
    1, putting probabilities on a [0, 1]-commensurate scale; switching it off
    keeps the (2*pi*sigma^2)^(-3/2) density constant.
    """

    sigma: float = 0.01
    n_samples: int = 1024
    p_c: float = 0.6
    seed: int = 0
    normalize_kernel: bool = True

    def __post_init__(self):
        if self.sigma <= 0:
            raise InvalidParameterError("sigma must be > 0")
        if self.n_samples < 1:
            raise InvalidParameterError("n_samples must be >= 1")
        if self.p_c <= 0:
            raise InvalidParameterError("p_c must be > 0")


_CHUNK = 4096


def sky_probability(img: PlanarImage, t: Trimap,
                    params: DensityParams = DensityParams()) -> PlanarImage:
    """Kernel-density sky probability of each undetermined pixel.

    Sky pixels are sampled uniformly without replacement (all of them when
    there are at most ``n_samples``), and each undetermined pixel gets the
    mean Gaussian kernel value against the sampled RGB triples. Pixels that
    are not undetermined get probability 0. Deterministic for a fixed seed.
    """
    if img.channels != 3:
        raise InvalidInputError("density estimation expects a 3-channel image")
    if img.height != t.height or img.width != t.width:
        raise InvalidInputError("image and trimap must share dimensions")

    rgb = img.to_interleaved().reshape(-1, 3)
    labels = t.labels.reshape(-1)
    sky_idx = np.flatnonzero(labels == TrimapLabel.SKY)
    if sky_idx.size == 0:
        raise EmptyReferenceError("trimap has no sky pixels to estimate a density from")

    if sky_idx.size > params.n_samples:
        rng = np.random.default_rng(params.seed)
        sky_idx = sky_idx[rng.choice(sky_idx.size, size=params.n_samples, replace=False)]
    samples = rgb[np.sort(sky_idx)]

    undet_idx = np.flatnonzero(labels == TrimapLabel.UNDETERMINED)
    inv_two_sigma2 = 1.0 / (2.0 * params.sigma ** 2)
    scale = 1.0 if params.normalize_kernel else (2.0 * np.pi * params.sigma ** 2) ** -1.5

    probs = np.zeros(labels.shape[0], dtype=DTYPE)
    for start in range(0, undet_idx.size, _CHUNK):
        chunk = undet_idx[start:start + _CHUNK]
        pix = rgb[chunk]
        # channels expanded one at a time: pure elementwise ops, bit-stable
        d2 = np.zeros((chunk.size, samples.shape[0]), dtype=DTYPE)
        for ch in range(3):
            diff = pix[:, ch, None] - samples[None, :, ch]
            d2 += diff * diff
        probs[chunk] = scale * np.exp(-d2 * inv_two_sigma2).mean(axis=1)
    return PlanarImage(probs.reshape(1, t.height, t.width), Colorspace.GENERIC)


def inpaint(t: Trimap, p: PlanarImage, p_c: float) -> tuple[Trimap, np.ndarray]:
    """Resolve undetermined pixels by thresholding their sky probability.

    Undetermined pixels with p > p_c become sky and are flagged as inpainted;
    the rest become not-sky. Returns the completed trimap and the flag image.
    """
    if p.channels != 1:
        raise InvalidInputError("probability image must have 1 channel")
    if p.height != t.height or p.width != t.width:
        raise InvalidInputError("probability image and trimap must share dimensions")
    undet = t.labels == TrimapLabel.UNDETERMINED
    as_sky = undet & (p.data[0] > p_c)
    labels = np.array(t.labels)
    labels[undet] = TrimapLabel.NOT_SKY
    labels[as_sky] = TrimapLabel.SKY
    return Trimap(labels), as_sky
