"""Confidence calibration for mask refinement.

Two sources of per-pixel confidence feed the weighted guided filter: a shaped
function of an inferred sky probability (for maps produced by a segmentation
model), and a three-level trimap confidence (for manually annotated and
inpainted datasets).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .density import Trimap, TrimapLabel
from .errors import InvalidInputError, InvalidParameterError
from .image import Colorspace, DTYPE, PlanarImage


@dataclass(frozen=True)
class InferenceConfidenceParams:
    """Thresholds and shape of the probability-to-confidence curve.

    Probabilities in [l, h] are treated as uninformative and get the floor
    ``eps``. The sky side rises from h < 1 - l away from its endpoint, so the
    curve prefers the sky label.
    """

    l: float = 0.3
    h: float = 0.5
    b: float = 0.8
    eps: float = 0.01

    def __post_init__(self):
        if not (0.0 < self.l <= self.h < 1.0):
            raise InvalidParameterError("thresholds must satisfy 0 < l <= h < 1")
        if not (0.0 < self.b < 1.0):
            raise InvalidParameterError("bias shape b must lie in (0, 1)")
        if not (0.0 < self.eps < 1.0):
            raise InvalidParameterError("confidence floor eps must lie in (0, 1)")


@dataclass(frozen=True)
class TrimapConfidenceParams:
    """Confidence levels for annotated, inpainted, and leftover pixels."""

    c_det: float = 0.8
    c_inpaint: float = 0.6
    c_undet: float = 0.4

    def __post_init__(self):
        for name in ("c_det", "c_inpaint", "c_undet"):
            v = getattr(self, name)
            if not (0.0 < v <= 1.0):
                raise InvalidParameterError(f"{name} must lie in (0, 1]")
        if not (self.c_det >= self.c_inpaint >= self.c_undet):
            raise InvalidParameterError("confidences must satisfy c_det >= c_inpaint >= c_undet")


def bias(x, b: float):
    """Schlick's bias curve x / ((1/b - 2)(1 - x) + 1).

    Monotone on [0, 1] with fixed points at 0 and 1; the identity at b = 0.5.
    Accepts scalars or arrays.
    """
    if not (0.0 < b < 1.0):
        raise InvalidParameterError(f"bias shape must lie in (0, 1), got {b}")
    x = np.asarray(x, dtype=DTYPE)
    out = x / ((1.0 / b - 2.0) * (1.0 - x) + 1.0)
    return float(out) if out.ndim == 0 else out


def inference_confidence(p: PlanarImage,
                         params: InferenceConfidenceParams = InferenceConfidenceParams()
                         ) -> PlanarImage:
    """Per-pixel confidence for an inferred sky-probability map.

    Probabilities below ``l`` are confidently not-sky, above ``h`` confidently
    sky, and in between get the floor ``eps``; values exactly at a threshold
    fall in the floor branch. Output values lie in [eps, 1].
    """
    if p.channels != 1:
        raise InvalidInputError("probability map must have 1 channel")
    prob = p.data[0]
    l, h, b, eps = params.l, params.h, params.b, params.eps

    low = bias(np.clip((l - prob) / l, 0.0, 1.0), b)
    high = bias(np.clip((prob - h) / (1.0 - h), 0.0, 1.0), b)
    conf = np.where(prob < l, low, np.where(prob > h, high, 0.0))
    conf = np.maximum(eps, conf)
    return PlanarImage(conf[np.newaxis], Colorspace.MASK)


def trimap_confidence(t: Trimap, inpainted_sky: np.ndarray,
                      params: TrimapConfidenceParams = TrimapConfidenceParams()
                      ) -> PlanarImage:
    """Confidence map for an annotated trimap.

    Pixels annotated sky/not-sky get ``c_det``; pixels flagged as inpainted
    sky get ``c_inpaint``; everything else gets ``c_undet``. Flags are only
    legal on originally undetermined pixels.
    """
    flags = np.asarray(inpainted_sky, dtype=bool)
    if flags.shape != t.labels.shape:
        raise InvalidInputError("inpainted flags must match the trimap dimensions")
    annotated = t.labels != TrimapLabel.UNDETERMINED
    if (flags & annotated).any():
        raise InvalidInputError("inpainted flag set on an annotated pixel")
    conf = np.full(t.labels.shape, params.c_undet, dtype=DTYPE)
    conf[flags] = params.c_inpaint
    conf[annotated] = params.c_det
    return PlanarImage(conf[np.newaxis], Colorspace.MASK)
