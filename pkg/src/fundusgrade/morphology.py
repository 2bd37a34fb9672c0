"""Flat grayscale morphology with elliptical structuring elements.

Out-of-bounds reads replicate the border pixel, matching the rest of the
pipeline. Even structuring-element sizes have no center anchor, so they are
promoted to the next odd size (logged); symmetric anchoring is what keeps
the erosion/dilation duality exact.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .raster import GrayRaster

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class StructuringElement:
    """Boolean footprint with the anchor at the central cell; odd dims."""

    footprint: np.ndarray

    def __post_init__(self):
        fp = np.asarray(self.footprint, dtype=bool)
        if fp.ndim != 2:
            raise ValueError("footprint must be 2-D")
        if fp.shape[0] % 2 == 0 or fp.shape[1] % 2 == 0:
            raise ValueError("footprint dimensions must be odd")
        if not fp[fp.shape[0] // 2, fp.shape[1] // 2]:
            raise ValueError("anchor cell must be set")
        object.__setattr__(self, "footprint", fp)

    @property
    def width(self) -> int:
        return self.footprint.shape[1]

    @property
    def height(self) -> int:
        return self.footprint.shape[0]


def ellipse_se(w: int, h: int) -> StructuringElement:
    """Elliptical footprint inscribed in a w x h box (even sizes promote)."""
    if w < 1 or h < 1:
        raise ValueError("structuring element dimensions must be positive")
    if w % 2 == 0 or h % 2 == 0:
        promoted_w = w + 1 if w % 2 == 0 else w
        promoted_h = h + 1 if h % 2 == 0 else h
        log.info("promoting even structuring element %dx%d to %dx%d", w, h, promoted_w, promoted_h)
        w, h = promoted_w, promoted_h
    cx = (w - 1) / 2.0
    cy = (h - 1) / 2.0
    a = max(w - 1, 1) / 2.0
    b = max(h - 1, 1) / 2.0
    cols = (np.arange(w) - cx) / a
    rows = (np.arange(h) - cy) / b
    inside = cols[None, :] ** 2 + rows[:, None] ** 2 <= 1.0
    return StructuringElement(inside)


def _shifted_views(pixels: np.ndarray, footprint: np.ndarray) -> list[np.ndarray]:
    ph, pw = footprint.shape[0] // 2, footprint.shape[1] // 2
    padded = np.pad(pixels, ((ph, ph), (pw, pw)), mode="edge")
    h, w = pixels.shape
    return [padded[dy : dy + h, dx : dx + w] for dy, dx in zip(*np.nonzero(footprint))]


def erode(img: GrayRaster, se: StructuringElement) -> GrayRaster:
    """Minimum over the footprint neighborhood of each pixel."""
    views = _shifted_views(img.pixels, se.footprint)
    out = views[0].copy()
    for v in views[1:]:
        np.minimum(out, v, out=out)
    return GrayRaster(out)


def dilate(img: GrayRaster, se: StructuringElement) -> GrayRaster:
    """Maximum over the reflected footprint neighborhood of each pixel."""
    views = _shifted_views(img.pixels, se.footprint[::-1, ::-1])
    out = views[0].copy()
    for v in views[1:]:
        np.maximum(out, v, out=out)
    return GrayRaster(out)


def opening(img: GrayRaster, se: StructuringElement) -> GrayRaster:
    return dilate(erode(img, se), se)


def closing(img: GrayRaster, se: StructuringElement) -> GrayRaster:
    return erode(dilate(img, se), se)


def alternate_sequential_filter(img: GrayRaster, ses: list[StructuringElement]) -> GrayRaster:
    """One opening followed by one closing per element, small to large."""
    if not ses:
        raise ValueError("alternate sequential filter needs at least one structuring element")
    out = img
    for se in ses:
        out = closing(opening(out, se), se)
    return out
