"""Readers and writers for PNG, PFM, and trimap images.

PNG covers 8- and 16-bit gray/RGB; pixel values are scaled to [0, 1] and can
optionally pass through the sRGB transfer function. PFM stores 32-bit floats
with a little-endian scale field and bottom-up rows. Trimaps are serialized
as indexed PNGs whose pixel values are 0 (not sky), 128 (undetermined), and
255 (sky).
"""

from __future__ import annotations

from pathlib import Path

import cv2
import numpy as np
from PIL import Image

from .density import Trimap, TrimapLabel
from .errors import InvalidInputError
from .image import Colorspace, DTYPE, PlanarImage

_TRIMAP_VALUES = {
    TrimapLabel.NOT_SKY: 0,
    TrimapLabel.UNDETERMINED: 128,
    TrimapLabel.SKY: 255,
}


def srgb_to_linear(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=DTYPE)
    return np.where(x <= 0.04045, x / 12.92, ((x + 0.055) / 1.055) ** 2.4)


def linear_to_srgb(x: np.ndarray) -> np.ndarray:
    x = np.clip(np.asarray(x, dtype=DTYPE), 0.0, 1.0)
    return np.where(x <= 0.0031308, x * 12.92, 1.055 * x ** (1 / 2.4) - 0.055)


def read_png(path: str | Path, to_linear: bool = False) -> PlanarImage:
    """Read an 8- or 16-bit PNG into a [0, 1] image (RGB or 1-channel)."""
    raw = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
    if raw is None:
        raise InvalidInputError(f"cannot read image file {path}")
    peak = 65535.0 if raw.dtype == np.uint16 else 255.0
    data = raw.astype(DTYPE) / peak
    if data.ndim == 3:
        if data.shape[2] == 4:
            data = data[:, :, :3]
        data = data[:, :, ::-1]  # BGR -> RGB
        cs = Colorspace.RGB
    else:
        cs = Colorspace.GENERIC
    if to_linear:
        data = srgb_to_linear(data)
    return PlanarImage.from_interleaved(data, cs)


def write_png(path: str | Path, img: PlanarImage, bit_depth: int = 8,
              from_linear: bool = False) -> None:
    """Write a [0, 1] image as an 8- or 16-bit PNG."""
    if bit_depth not in (8, 16):
        raise InvalidInputError(f"PNG bit depth must be 8 or 16, got {bit_depth}")
    data = img.to_interleaved()
    if from_linear:
        data = linear_to_srgb(data)
    peak = 65535 if bit_depth == 16 else 255
    dtype = np.uint16 if bit_depth == 16 else np.uint8
    quant = np.round(np.clip(data, 0.0, 1.0) * peak).astype(dtype)
    if quant.shape[2] == 3:
        quant = quant[:, :, ::-1]  # RGB -> BGR
    elif quant.shape[2] == 1:
        quant = quant[:, :, 0]
    else:
        raise InvalidInputError("PNG output supports 1 or 3 channels")
    if not cv2.imwrite(str(path), quant):
        raise InvalidInputError(f"cannot write image file {path}")


def read_pfm(path: str | Path) -> PlanarImage:
    """Read a 32-bit float PFM (gray 'Pf' or color 'PF')."""
    with open(path, "rb") as f:
        header = f.readline().strip()
        if header == b"PF":
            channels = 3
        elif header == b"Pf":
            channels = 1
        else:
            raise InvalidInputError(f"{path}: not a PFM file (header {header!r})")
        dims = f.readline().split()
        width, height = int(dims[0]), int(dims[1])
        scale = float(f.readline().strip())
        count = width * height * channels
        raw = f.read(count * 4)
        if len(raw) != count * 4:
            raise InvalidInputError(f"{path}: truncated PFM payload")
    endian = "<" if scale < 0 else ">"
    data = np.frombuffer(raw, dtype=endian + "f4").astype(DTYPE)
    data = data.reshape(height, width, channels)[::-1]  # rows are bottom-up
    if abs(scale) not in (0.0, 1.0):
        data = data * abs(scale)
    cs = Colorspace.RGB if channels == 3 else Colorspace.GENERIC
    return PlanarImage.from_interleaved(data, cs)


def write_pfm(path: str | Path, img: PlanarImage) -> None:
    """Write a 1- or 3-channel image as a little-endian PFM (scale -1)."""
    if img.channels not in (1, 3):
        raise InvalidInputError("PFM supports 1 or 3 channels")
    header = b"PF\n" if img.channels == 3 else b"Pf\n"
    data = img.to_interleaved().astype("<f4")[::-1]  # bottom-up
    with open(path, "wb") as f:
        f.write(header)
        f.write(f"{img.width} {img.height}\n".encode())
        f.write(b"-1.0\n")
        f.write(data.tobytes())


def read_matte(path: str | Path) -> PlanarImage:
    """Read a mask/matte from PFM or PNG, returned as a 1-channel MASK."""
    path = Path(path)
    img = read_pfm(path) if path.suffix.lower() == ".pfm" else read_png(path)
    data = img.data
    if data.shape[0] == 3:
        data = data.mean(axis=0, keepdims=True)
    return PlanarImage(np.clip(data, 0.0, 1.0), Colorspace.MASK)


def write_matte(path: str | Path, matte: PlanarImage) -> None:
    """Write a matte as PFM or 16-bit PNG, chosen by the file extension."""
    path = Path(path)
    if path.suffix.lower() == ".pfm":
        write_pfm(path, matte)
    else:
        write_png(path, matte, bit_depth=16)


def read_trimap(path: str | Path) -> Trimap:
    """Read a trimap PNG with values 0 / 128 / 255."""
    im = Image.open(path).convert("L")
    values = np.asarray(im, dtype=np.uint8)
    labels = np.full(values.shape, TrimapLabel.UNDETERMINED, dtype=np.uint8)
    labels[values < 64] = TrimapLabel.NOT_SKY
    labels[values >= 192] = TrimapLabel.SKY
    return Trimap(labels)


def write_trimap(path: str | Path, t: Trimap) -> None:
    """Write a trimap as an indexed PNG with a grayscale identity palette."""
    values = np.zeros(t.labels.shape, dtype=np.uint8)
    for label, value in _TRIMAP_VALUES.items():
        values[t.labels == label] = value
    im = Image.fromarray(values, mode="P")
    im.putpalette([v for i in range(256) for v in (i, i, i)])
    im.save(path, format="PNG")
