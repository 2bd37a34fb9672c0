"""8-bit raster types and the pixelwise primitives shared by every stage.

Images are numpy uint8 arrays in row-major (height, width[, 3]) layout.
Intermediate arithmetic runs in wider types and is rounded half-up when
stored back to 8 bits. All operations are pure: inputs are never mutated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

CHANNELS = ("R", "G", "B")


def round_half_up_u8(values: np.ndarray) -> np.ndarray:
    """Round half-up (not banker's) and clamp into [0, 255] uint8."""
    return np.clip(np.floor(np.asarray(values, dtype=np.float64) + 0.5), 0, 255).astype(np.uint8)


@dataclass(frozen=True, eq=False)
class RgbRaster:
    """Interleaved 8-bit RGB image, shape (height, width, 3)."""

    pixels: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.pixels)
        if p.ndim != 3 or p.shape[2] != 3 or p.dtype != np.uint8:
            raise ValueError("RgbRaster expects a (height, width, 3) uint8 array")
        if p.shape[0] < 1 or p.shape[1] < 1:
            raise ValueError("raster dimensions must be positive")
        object.__setattr__(self, "pixels", p)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True, eq=False)
class GrayRaster:
    """Single-channel 8-bit image, shape (height, width)."""

    pixels: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.pixels)
        if p.ndim != 2 or p.dtype != np.uint8:
            raise ValueError("GrayRaster expects a (height, width) uint8 array")
        if p.shape[0] < 1 or p.shape[1] < 1:
            raise ValueError("raster dimensions must be positive")
        object.__setattr__(self, "pixels", p)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True, eq=False)
class BinaryMask:
    """Segmentation mask; samples are exactly 0 or 255."""

    pixels: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.pixels)
        if p.ndim != 2 or p.dtype != np.uint8:
            raise ValueError("BinaryMask expects a (height, width) uint8 array")
        if p.shape[0] < 1 or p.shape[1] < 1:
            raise ValueError("mask dimensions must be positive")
        bad = (p != 0) & (p != 255)
        if bad.any():
            raise ValueError("mask samples must be 0 or 255")
        object.__setattr__(self, "pixels", p)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def as_bool(self) -> np.ndarray:
        return self.pixels == 255


def mask_from_bool(on: np.ndarray) -> BinaryMask:
    return BinaryMask(np.where(on, 255, 0).astype(np.uint8))


def extract_channel(img: RgbRaster, channel: str) -> GrayRaster:
    """Select one of the R/G/B components as a grayscale image."""
    if channel not in CHANNELS:
        raise ValueError(f"channel must be one of {CHANNELS}, got {channel!r}")
    return GrayRaster(img.pixels[:, :, CHANNELS.index(channel)].copy())


def _resize_plane(plane: np.ndarray, out_w: int, out_h: int) -> np.ndarray:
    in_h, in_w = plane.shape[:2]
    # half-pixel-center mapping: src = (dst + 0.5) * (in / out) - 0.5
    sx = np.clip((np.arange(out_w) + 0.5) * (in_w / out_w) - 0.5, 0, in_w - 1)
    sy = np.clip((np.arange(out_h) + 0.5) * (in_h / out_h) - 0.5, 0, in_h - 1)
    x0 = np.floor(sx).astype(np.intp)
    y0 = np.floor(sy).astype(np.intp)
    x1 = np.minimum(x0 + 1, in_w - 1)
    y1 = np.minimum(y0 + 1, in_h - 1)
    fx = (sx - x0)[None, :]
    fy = (sy - y0)[:, None]
    if plane.ndim == 3:
        fx = fx[..., None]
        fy = fy[..., None]
    tl = plane[np.ix_(y0, x0)].astype(np.float64)
    tr = plane[np.ix_(y0, x1)].astype(np.float64)
    bl = plane[np.ix_(y1, x0)].astype(np.float64)
    br = plane[np.ix_(y1, x1)].astype(np.float64)
    top = tl * (1.0 - fx) + tr * fx
    bot = bl * (1.0 - fx) + br * fx
    return round_half_up_u8(top * (1.0 - fy) + bot * fy)


def resize_bilinear(img, out_w: int, out_h: int):
    """Bilinear resize of an RgbRaster or GrayRaster to (out_w, out_h)."""
    if out_w < 1 or out_h < 1:
        raise ValueError("target dimensions must be positive")
    if isinstance(img, RgbRaster):
        return RgbRaster(_resize_plane(img.pixels, out_w, out_h))
    if isinstance(img, GrayRaster):
        return GrayRaster(_resize_plane(img.pixels, out_w, out_h))
    raise ValueError(f"cannot resize {type(img).__name__}")


def threshold(img: GrayRaster, t: int) -> BinaryMask:
    """255 where the sample is strictly greater than t, else 0."""
    return mask_from_bool(img.pixels > t)


def invert(img: GrayRaster) -> GrayRaster:
    return GrayRaster((255 - img.pixels.astype(np.int16)).astype(np.uint8))


def subtract_saturating(a: GrayRaster, b: GrayRaster) -> GrayRaster:
    """Pixelwise max(a - b, 0)."""
    if a.pixels.shape != b.pixels.shape:
        raise ValueError("image dimensions must match for subtraction")
    diff = a.pixels.astype(np.int16) - b.pixels.astype(np.int16)
    return GrayRaster(np.maximum(diff, 0).astype(np.uint8))


def count_nonzero(mask: BinaryMask) -> int:
    """Number of set (255) samples."""
    return int(np.count_nonzero(mask.pixels))
