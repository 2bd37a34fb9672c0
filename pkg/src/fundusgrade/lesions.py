"""The three lesion segmentation recipes: exudates, vessels, microaneurysms.

Each detector is a deterministic composition of channel extraction,
enhancement, morphology, thresholding and component filtering, and returns
the binary mask together with its pixel area and component count. Passing a
dict as `stages` captures every intermediate image for debugging dumps.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .enhance import ClaheParams, clahe, median_filter
from .morphology import alternate_sequential_filter, closing, dilate, ellipse_se, erode
from .raster import (
    BinaryMask,
    GrayRaster,
    RgbRaster,
    count_nonzero,
    extract_channel,
    invert,
    mask_from_bool,
    subtract_saturating,
    threshold,
)
from .regions import connected_components, filter_components_by_area


class LesionKind(enum.Enum):
    EXUDATE = "exudate"
    VESSEL = "vessel"
    MICROANEURYSM = "microaneurysm"


@dataclass(frozen=True, eq=False)
class LesionResult:
    kind: LesionKind
    mask: BinaryMask
    area: int
    component_count: int


def _result(kind: LesionKind, mask: BinaryMask) -> LesionResult:
    return LesionResult(kind, mask, count_nonzero(mask), len(connected_components(mask, 8)))


def _record(stages: dict | None, name: str, img) -> None:
    if stages is not None:
        stages[name] = img


def otsu_threshold(img: GrayRaster) -> int:
    """Threshold maximizing inter-class variance; ties break low.

    The returned value feeds the strict `threshold` comparison, so a
    constant image returns 255, which yields an empty mask downstream.
    """
    hist = np.bincount(img.pixels.ravel(), minlength=256).astype(np.float64)
    if int(np.count_nonzero(hist)) <= 1:
        return 255
    total = hist.sum()
    values = np.arange(256, dtype=np.float64)
    w0 = np.cumsum(hist)
    mass0 = np.cumsum(hist * values)
    w1 = total - w0
    mean_total = mass0[-1]
    with np.errstate(divide="ignore", invalid="ignore"):
        mu0 = mass0 / w0
        mu1 = (mean_total - mass0) / w1
        sigma = w0 * w1 * (mu0 - mu1) ** 2
    sigma[~np.isfinite(sigma)] = 0.0
    return int(np.argmax(sigma))  # argmax takes the first (lowest) maximizer


def remove_optic_disc(
    img: RgbRaster,
    *,
    percentile: float = 99.5,
    dilate_size: int = 25,
    stages: dict | None = None,
) -> GrayRaster:
    """Red channel with the bright optic-disc region flattened to its median.

    The disc seed is the set of pixels strictly above the given red-channel
    percentile; dilation spreads the seed over the full disc. A constant
    image has no pixel above the cut and passes through unchanged.
    """
    red = extract_channel(img, "R")
    _record(stages, "disc-red", red)
    cut = float(np.percentile(red.pixels, percentile))
    seed = red.pixels > cut
    if not seed.any():
        return red
    disc = dilate(GrayRaster(mask_from_bool(seed).pixels), ellipse_se(dilate_size, dilate_size))
    _record(stages, "disc-mask", BinaryMask(disc.pixels))
    fill = np.uint8(math.floor(float(np.median(red.pixels)) + 0.5))
    out = red.pixels.copy()
    out[disc.pixels == 255] = fill
    suppressed = GrayRaster(out)
    _record(stages, "disc-suppressed", suppressed)
    return suppressed


def detect_exudates(
    img: RgbRaster,
    *,
    se_size: int = 7,
    median_k: int = 5,
    threshold_value: int = 235,
    disc_percentile: float = 99.5,
    disc_dilate: int = 25,
    stages: dict | None = None,
) -> LesionResult:
    """Bright-lesion mask: disc removal, dilation, median smoothing, threshold."""
    work = remove_optic_disc(img, percentile=disc_percentile, dilate_size=disc_dilate, stages=stages)
    _record(stages, "exudate-base", work)
    dilated = dilate(work, ellipse_se(se_size, se_size))
    _record(stages, "exudate-dilated", dilated)
    smooth = median_filter(dilated, median_k)
    _record(stages, "exudate-median", smooth)
    mask = threshold(smooth, threshold_value)
    _record(stages, "exudate-mask", mask)
    return _result(LesionKind.EXUDATE, mask)


def detect_vessels(
    img: RgbRaster,
    *,
    clahe_params: ClaheParams = ClaheParams(),
    se_sizes: tuple[int, ...] = (5, 11, 23),
    threshold_value: int = 15,
    min_area: int = 200,
    stages: dict | None = None,
) -> LesionResult:
    """Thin-structure mask from the residual of alternate sequential filtering."""
    green = extract_channel(img, "G")
    _record(stages, "vessel-green", green)
    enhanced = clahe(green, clahe_params)
    _record(stages, "vessel-clahe", enhanced)
    filtered = alternate_sequential_filter(enhanced, [ellipse_se(s, s) for s in se_sizes])
    _record(stages, "vessel-asf", filtered)
    residual = subtract_saturating(enhanced, filtered)
    _record(stages, "vessel-residual", residual)
    mask = threshold(residual, threshold_value)
    _record(stages, "vessel-raw-mask", mask)
    cleaned = filter_components_by_area(mask, min_area, math.inf, 8)
    _record(stages, "vessel-mask", cleaned)
    return _result(LesionKind.VESSEL, cleaned)


def detect_microaneurysms(
    img: RgbRaster,
    *,
    clahe_params: ClaheParams = ClaheParams(),
    median_k: int = 5,
    erode_size: int = 7,
    close_size: int = 5,
    threshold_value: int | None = None,
    min_area: int = 5,
    max_area: int = 150,
    stages: dict | None = None,
) -> LesionResult:
    """Small dark-dot mask; threshold defaults to Otsu on the closed image."""
    green = extract_channel(img, "G")
    _record(stages, "ma-green", green)
    enhanced = clahe(green, clahe_params)
    _record(stages, "ma-clahe", enhanced)
    smooth = median_filter(enhanced, median_k)
    _record(stages, "ma-median", smooth)
    eroded = erode(smooth, ellipse_se(erode_size, erode_size))
    _record(stages, "ma-eroded", eroded)
    inverted = invert(eroded)
    _record(stages, "ma-inverted", inverted)
    closed = closing(inverted, ellipse_se(close_size, close_size))
    _record(stages, "ma-closed", closed)
    t = otsu_threshold(closed) if threshold_value is None else threshold_value
    mask = threshold(closed, t)
    _record(stages, "ma-raw-mask", mask)
    banded = filter_components_by_area(mask, min_area, max_area, 8)
    _record(stages, "ma-mask", banded)
    return _result(LesionKind.MICROANEURYSM, banded)
