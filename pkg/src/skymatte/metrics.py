"""Evaluation metrics for predicted vs ground-truth alpha mattes.

Six scores: binarized intersection-over-union and misclassification rate,
RMSE, MAE, a boundary loss over spatial gradients, and the mean per-pixel
Jensen-Shannon divergence of the Bernoulli distributions the mattes encode.
Lower is better for all of them except the IoU.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .image import PlanarImage

_JSD_DELTA = 1e-6


@dataclass(frozen=True)
class MetricsReport:
    """The six matte scores plus the pixel count they were computed over."""

    miou_05: float
    mcr_05: float
    rmse: float
    mae: float
    boundary_loss: float
    jsd: float
    pixel_count: int

    FIELDS = ("miou_05", "boundary_loss", "mcr_05", "rmse", "mae", "jsd")

    def as_dict(self) -> dict:
        d = {name: getattr(self, name) for name in self.FIELDS}
        d["pixel_count"] = self.pixel_count
        return d


def _planes(pred: PlanarImage, gt: PlanarImage, op: str) -> tuple[np.ndarray, np.ndarray]:
    if pred.channels != 1 or gt.channels != 1:
        raise InvalidInputError(f"{op} expects 1-channel mattes")
    if not pred.same_size(gt):
        raise InvalidInputError(f"{op}: matte dimensions differ "
                                f"({pred.width}x{pred.height} vs {gt.width}x{gt.height})")
    return pred.data[0], gt.data[0]


def binarized_metrics(pred: PlanarImage, gt: PlanarImage,
                      threshold: float = 0.5) -> tuple[float, float]:
    """(IoU, misclassification rate) after binarizing both mattes.

    Values >= threshold count as sky. IoU = TP / (TP + FP + FN) for the sky
    class; MCR = (FP + FN) / pixel count. When neither matte has any sky the
    IoU is defined as 1.0 (with a warning).
    """
    x, y = _planes(pred, gt, "binarized_metrics")
    px = x >= threshold
    py = y >= threshold
    tp = int((px & py).sum())
    fp = int((px & ~py).sum())
    fn = int((~px & py).sum())
    m = x.size
    if tp + fp + fn == 0:
        warnings.warn("binarized_metrics: no sky pixels in either matte; IoU := 1.0",
                      RuntimeWarning, stacklevel=2)
        miou = 1.0
    else:
        miou = tp / (tp + fp + fn)
    return miou, (fp + fn) / m


def continuous_metrics(pred: PlanarImage, gt: PlanarImage) -> tuple[float, float]:
    """(RMSE, MAE) over all pixels."""
    x, y = _planes(pred, gt, "continuous_metrics")
    diff = x - y
    rmse = float(np.sqrt(np.mean(diff * diff)))
    mae = float(np.mean(np.abs(diff)))
    return rmse, mae


def _forward_gradients(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Forward differences with clamp-to-edge (zero at the far border)."""
    dx = np.zeros_like(a)
    dy = np.zeros_like(a)
    dx[:, :-1] = a[:, 1:] - a[:, :-1]
    dy[:-1, :] = a[1:, :] - a[:-1, :]
    return dx, dy


def boundary_loss(pred: PlanarImage, gt: PlanarImage) -> float:
    """RMS difference of the spatial gradients of the two mattes.

    Both forward-difference components enter the sum, so the loss is
    sensitive to edge placement but blind to constant offsets.
    """
    x, y = _planes(pred, gt, "boundary_loss")
    dx_x, dy_x = _forward_gradients(x)
    dx_y, dy_y = _forward_gradients(y)
    sq = (dx_x - dx_y) ** 2 + (dy_x - dy_y) ** 2
    return float(np.sqrt(np.mean(sq)))


def _bernoulli_kl(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    return p * np.log(p / q) + (1.0 - p) * np.log((1.0 - p) / (1.0 - q))


def jsd(pred: PlanarImage, gt: PlanarImage) -> float:
    """Mean per-pixel Jensen-Shannon divergence of Bernoulli(pred), Bernoulli(gt).

    Probabilities are clamped to [1e-6, 1 - 1e-6] before the log terms so the
    0/1 endpoints stay finite; the per-pixel value is bounded by ln 2.
    """
    x, y = _planes(pred, gt, "jsd")
    x = np.clip(x, _JSD_DELTA, 1.0 - _JSD_DELTA)
    y = np.clip(y, _JSD_DELTA, 1.0 - _JSD_DELTA)
    m = 0.5 * (x + y)
    per_pixel = 0.5 * _bernoulli_kl(x, m) + 0.5 * _bernoulli_kl(y, m)
    return float(np.mean(per_pixel))


def evaluate_pair(pred: PlanarImage, gt: PlanarImage) -> MetricsReport:
    """All six metrics for one predicted/ground-truth matte pair."""
    miou, mcr = binarized_metrics(pred, gt)
    rmse, mae = continuous_metrics(pred, gt)
    return MetricsReport(
        miou_05=miou,
        mcr_05=mcr,
        rmse=rmse,
        mae=mae,
        boundary_loss=boundary_loss(pred, gt),
        jsd=jsd(pred, gt),
        pixel_count=pred.width * pred.height,
    )
