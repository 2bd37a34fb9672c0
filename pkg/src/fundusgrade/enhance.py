"""Contrast enhancement: CLAHE and median filtering.

The CLAHE here is fully pinned down so outputs are reproducible to the bit:
tiles absorb remainders on the right/bottom edge, clipped histogram excess
is redistributed uniformly in a single pass (round-robin remainder from bin
0), and each pixel blends the CDF mappings of its surrounding tile centers
bilinearly. A tile holding a single gray level keeps its value, which makes
the whole transform an identity on constant images.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .raster import BinaryMask, GrayRaster, round_half_up_u8


@dataclass(frozen=True)
class ClaheParams:
    tiles_x: int = 8
    tiles_y: int = 8
    clip_limit: float = 2.0

    def __post_init__(self):
        if self.tiles_x < 1 or self.tiles_y < 1:
            raise ValueError("tile grid must be at least 1x1")
        if self.clip_limit < 1.0:
            raise ValueError("clip_limit must be >= 1.0")

    def bin_clip(self, tile_pixels: int) -> int:
        """Absolute per-bin clip for a tile of the given size."""
        return max(1, int(math.floor(self.clip_limit * tile_pixels / 256.0 + 0.5)))


def histogram(img: GrayRaster, mask: BinaryMask | None = None) -> np.ndarray:
    """256-bin intensity histogram, optionally restricted to mask-set pixels."""
    if mask is None:
        values = img.pixels.ravel()
    else:
        if mask.pixels.shape != img.pixels.shape:
            raise ValueError("mask dimensions must match the image")
        values = img.pixels[mask.as_bool()]
    return np.bincount(values, minlength=256).astype(np.int64)


def _tile_edges(size: int, tiles: int) -> list[int]:
    base = size // tiles
    return [i * base for i in range(tiles)] + [size]


def _tile_lut(tile: np.ndarray, params: ClaheParams) -> np.ndarray:
    """Clipped-histogram equalization mapping for one tile (float LUT of ints)."""
    hist = np.bincount(tile.ravel(), minlength=256).astype(np.int64)
    n = tile.size
    identity = np.arange(256, dtype=np.float64)
    if int(np.count_nonzero(hist)) <= 1:
        return identity  # single gray level: the tile maps to itself
    clip = params.bin_clip(n)
    excess = int(np.maximum(hist - clip, 0).sum())
    hist = np.minimum(hist, clip)
    hist += excess // 256
    hist[: excess % 256] += 1
    cdf = np.cumsum(hist)
    cdf_min = int(cdf[np.nonzero(cdf)[0][0]])
    denom = n - cdf_min
    if denom <= 0:
        return identity
    lut = np.floor(255.0 * (cdf - cdf_min) / denom + 0.5)
    return np.clip(lut, 0.0, 255.0)


def _blend_coords(coords: np.ndarray, centers: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Left tile index and rightward weight for each coordinate (clamped)."""
    if len(centers) == 1:
        zeros = np.zeros(len(coords))
        return zeros.astype(np.intp), zeros
    idx = np.clip(np.searchsorted(centers, coords, side="right") - 1, 0, len(centers) - 2)
    left = centers[idx]
    right = centers[idx + 1]
    return idx.astype(np.intp), np.clip((coords - left) / (right - left), 0.0, 1.0)


def clahe(img: GrayRaster, params: ClaheParams = ClaheParams()) -> GrayRaster:
    """Contrast-limited adaptive histogram equalization."""
    src = img.pixels
    pad_b = max(0, params.tiles_y - src.shape[0])
    pad_r = max(0, params.tiles_x - src.shape[1])
    work = np.pad(src, ((0, pad_b), (0, pad_r)), mode="edge") if (pad_b or pad_r) else src
    h, w = work.shape

    y_edges = _tile_edges(h, params.tiles_y)
    x_edges = _tile_edges(w, params.tiles_x)
    luts = np.empty((params.tiles_y, params.tiles_x, 256), dtype=np.float64)
    for ty in range(params.tiles_y):
        for tx in range(params.tiles_x):
            tile = work[y_edges[ty] : y_edges[ty + 1], x_edges[tx] : x_edges[tx + 1]]
            luts[ty, tx] = _tile_lut(tile, params)

    centers_y = np.array([(y_edges[i] + y_edges[i + 1] - 1) / 2.0 for i in range(params.tiles_y)])
    centers_x = np.array([(x_edges[i] + x_edges[i + 1] - 1) / 2.0 for i in range(params.tiles_x)])
    iy, wy = _blend_coords(np.arange(h, dtype=np.float64), centers_y)
    ix, wx = _blend_coords(np.arange(w, dtype=np.float64), centers_x)
    iy1 = np.minimum(iy + 1, params.tiles_y - 1)
    ix1 = np.minimum(ix + 1, params.tiles_x - 1)

    iy = iy[:, None]
    iy1 = iy1[:, None]
    wy = wy[:, None]
    ix = ix[None, :]
    ix1 = ix1[None, :]
    wx = wx[None, :]
    blended = (1.0 - wy) * ((1.0 - wx) * luts[iy, ix, work] + wx * luts[iy, ix1, work]) + wy * (
        (1.0 - wx) * luts[iy1, ix, work] + wx * luts[iy1, ix1, work]
    )
    out = round_half_up_u8(blended)
    if pad_b or pad_r:
        out = out[: src.shape[0], : src.shape[1]]
    return GrayRaster(out)


def median_filter(img: GrayRaster, k: int) -> GrayRaster:
    """k x k median with edge replication at the borders; k must be odd."""
    if k < 1 or k % 2 == 0:
        raise ValueError("median window size must be a positive odd integer")
    if k == 1:
        return GrayRaster(img.pixels.copy())
    pad = k // 2
    padded = np.pad(img.pixels, pad, mode="edge")
    windows = sliding_window_view(padded, (k, k))
    med = np.median(windows, axis=(2, 3))  # odd k*k: exact middle element
    return GrayRaster(med.astype(np.uint8))
