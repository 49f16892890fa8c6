"""Annotation refinement: coarse sky masks to continuous alpha mattes.

The pipeline extracts a boundary band from the coarse annotation, marks it
undetermined, inpaints it by color density, builds a trimap confidence map,
and runs the weighted guided filter, optionally followed by a sigmoid
sharpening of the matte.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .confidence import TrimapConfidenceParams, trimap_confidence
from .density import DensityParams, Trimap, TrimapLabel, inpaint, sky_probability
from .errors import InvalidInputError, InvalidParameterError
from .guided_filter import GuidedFilterParams, modified_guided_filter
from .image import Colorspace, DTYPE, PlanarImage, rgb_to_yuv


@dataclass(frozen=True)
class RefinePipelineParams:
    """Knobs of the full annotation-refinement pipeline."""

    dilation_radius: int = 4
    gf: GuidedFilterParams = field(default_factory=lambda: GuidedFilterParams(s=16))
    density: DensityParams = field(default_factory=lambda: DensityParams(p_c=0.97))
    conf: TrimapConfidenceParams = field(default_factory=TrimapConfidenceParams)
    t_s: float = 15.0
    sharpen: bool = True
    inpaint: bool = True
    uniform_confidence: bool = False

    def __post_init__(self):
        if self.dilation_radius < 0:
            raise InvalidParameterError("dilation radius must be >= 0")
        if self.t_s <= 0:
            raise InvalidParameterError("sharpness factor must be > 0")


def _disk_offsets(radius: int) -> np.ndarray:
    r = int(radius)
    dy, dx = np.mgrid[-r:r + 1, -r:r + 1]
    keep = dy * dy + dx * dx <= r * r
    return np.stack([dy[keep], dx[keep]], axis=1)


def _dilate(mask: np.ndarray, radius: int) -> np.ndarray:
    if radius == 0:
        return mask.copy()
    h, w = mask.shape
    out = np.zeros_like(mask)
    for dy, dx in _disk_offsets(radius):
        ys = slice(max(0, dy), min(h, h + dy))
        yd = slice(max(0, -dy), min(h, h - dy))
        xs = slice(max(0, dx), min(w, w + dx))
        xd = slice(max(0, -dx), min(w, w - dx))
        out[yd, xd] |= mask[ys, xs]
    return out


def boundary_band(mask: PlanarImage, radius: int) -> np.ndarray:
    """Boolean band around the edges of a binary mask.

    Edges are pixels with a nonzero 4-neighbor Laplacian (replicated borders),
    dilated by a disk of the given radius.
    """
    if mask.channels != 1:
        raise InvalidInputError("boundary_band expects a 1-channel binary mask")
    m = mask.data[0]
    if not np.isin(m, (0.0, 1.0)).all():
        raise InvalidInputError("boundary_band expects strictly binary mask values")
    padded = np.pad(m, 1, mode="edge")
    lap = (padded[:-2, 1:-1] + padded[2:, 1:-1] + padded[1:-1, :-2]
           + padded[1:-1, 2:] - 4.0 * m)
    return _dilate(lap != 0.0, radius)


def build_trimap(mask: PlanarImage, band: np.ndarray,
                 extra_undetermined: np.ndarray | None = None) -> Trimap:
    """Trimap from a binary mask plus undetermined regions.

    The band and any extra region become undetermined; the rest keeps its
    sky/not-sky label from the mask.
    """
    m = mask.data[0]
    undet = np.asarray(band, dtype=bool)
    if undet.shape != m.shape:
        raise InvalidInputError("band must match the mask dimensions")
    if extra_undetermined is not None:
        extra = np.asarray(extra_undetermined, dtype=bool)
        if extra.shape != m.shape:
            raise InvalidInputError("extra region must match the mask dimensions")
        undet = undet | extra
    labels = np.where(m >= 0.5, np.uint8(TrimapLabel.SKY), np.uint8(TrimapLabel.NOT_SKY))
    labels[undet] = TrimapLabel.UNDETERMINED
    return Trimap(labels)


def sharpen_mask(alpha: PlanarImage, t_s: float) -> PlanarImage:
    """Drive matte values toward 0 and 1 with a renormalized sigmoid.

    S(x) = (sig(t_s(x - 1/2)) - sig(-t_s/2)) / (sig(t_s/2) - sig(-t_s/2)),
    which fixes 0, 1/2, and 1 and tends to the identity as t_s -> 0.
    """
    if t_s <= 0:
        raise InvalidParameterError("sharpness factor must be > 0")
    if alpha.channels != 1:
        raise InvalidInputError("sharpen_mask expects a 1-channel matte")
    x = alpha.data
    lo = _sigmoid(-0.5 * t_s)
    hi = _sigmoid(0.5 * t_s)
    out = (_sigmoid(t_s * (x - 0.5)) - lo) / (hi - lo)
    return PlanarImage(np.clip(out, 0.0, 1.0), Colorspace.MASK)


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def refine_annotation(img: PlanarImage, raw: PlanarImage | Trimap,
                      params: RefinePipelineParams) -> PlanarImage:
    """Refine a coarse annotation into a continuous alpha matte.

    ``raw`` is either a binary mask (the boundary band is derived from its
    edges) or a trimap whose undetermined region was annotated directly.
    """
    if img.channels != 3:
        raise InvalidInputError("refinement expects a 3-channel RGB image")

    if isinstance(raw, Trimap):
        trimap = raw
        if img.height != trimap.height or img.width != trimap.width:
            raise InvalidInputError("image and annotation must share dimensions")
    else:
        if not img.same_size(raw):
            raise InvalidInputError("image and annotation must share dimensions")
        band = boundary_band(raw, params.dilation_radius)
        trimap = build_trimap(raw, band)

    if params.inpaint and trimap.count(TrimapLabel.UNDETERMINED) > 0:
        prob = sky_probability(img, trimap, params.density)
        completed, flags = inpaint(trimap, prob, params.density.p_c)
    else:
        labels = np.array(trimap.labels)
        labels[labels == TrimapLabel.UNDETERMINED] = TrimapLabel.NOT_SKY
        completed, flags = Trimap(labels), np.zeros(trimap.labels.shape, dtype=bool)

    mask = PlanarImage((completed.labels == TrimapLabel.SKY).astype(DTYPE)[np.newaxis],
                       Colorspace.MASK)
    if params.uniform_confidence:
        conf = PlanarImage.full(img.width, img.height, 1.0, colorspace=Colorspace.MASK)
    else:
        conf = trimap_confidence(trimap, flags, params.conf)

    alpha = modified_guided_filter(rgb_to_yuv(img), mask, conf, params.gf)
    if params.sharpen:
        alpha = sharpen_mask(alpha, params.t_s)
    return alpha
