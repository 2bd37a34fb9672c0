"""Lesion feature extraction: masked intensity histograms, Hu-style
moment invariants, and standard scaling.

Raw moments are accumulated in exact integer arithmetic and central moments
in exact rationals before the final float conversion. That makes the seven
invariants bit-identical under integer translation and 90-degree rotation,
which the test suite relies on.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .lesions import LesionResult
from .raster import BinaryMask, GrayRaster

DEFAULT_HIST_BINS = 32

_MOMENT_KEYS = [(p, q) for p in range(4) for q in range(4) if p + q <= 3]


@dataclass(frozen=True, eq=False)
class MomentSet:
    """Raw, central and normalized image moments up to order 3, plus the
    seven rotation invariants (all zero for an empty/all-black raster)."""

    raw: dict[tuple[int, int], int]
    central: dict[tuple[int, int], float]
    normalized: dict[tuple[int, int], float]
    hu: tuple[float, float, float, float, float, float, float]


def _hu_from_eta(eta) -> tuple[float, ...]:
    e20, e02, e11 = eta[(2, 0)], eta[(0, 2)], eta[(1, 1)]
    e30, e03, e21, e12 = eta[(3, 0)], eta[(0, 3)], eta[(2, 1)], eta[(1, 2)]
    a = e30 + e12
    b = e21 + e03
    c = e30 - 3.0 * e12
    d = 3.0 * e21 - e03
    phi1 = e20 + e02
    phi2 = (e20 - e02) ** 2 + 4.0 * e11**2
    phi3 = c**2 + d**2
    phi4 = a**2 + b**2
    phi5 = c * a * (a**2 - 3.0 * b**2) + d * b * (3.0 * a**2 - b**2)
    # a*b is grouped so the product is evaluated symmetrically when a
    # 90-degree rotation swaps and negates the two sums
    phi6 = (e20 - e02) * (a**2 - b**2) + 4.0 * e11 * (a * b)
    phi7 = d * a * (a**2 - 3.0 * b**2) - c * b * (3.0 * a**2 - b**2)
    return (phi1, phi2, phi3, phi4, phi5, phi6, phi7)


def moments(img: GrayRaster | BinaryMask) -> MomentSet:
    """Intensity-weighted image moments; x is the column, y the row index."""
    f = img.pixels.astype(np.int64)
    h, w = f.shape
    xs = np.arange(w, dtype=np.int64)
    ys = np.arange(h, dtype=np.int64)
    xpow = np.stack([np.ones(w, dtype=np.int64), xs, xs**2, xs**3])  # (4, w)
    row_sums = f @ xpow.T  # (h, 4): row_sums[y, p] = sum_x x^p f[y, x]

    raw: dict[tuple[int, int], int] = {}
    for p, q in _MOMENT_KEYS:
        raw[(p, q)] = int((row_sums[:, p] * ys**q).sum())

    zeros = {k: 0.0 for k in _MOMENT_KEYS}
    m00 = raw[(0, 0)]
    if m00 == 0:
        eta_zeros = {k: 0.0 for k in _MOMENT_KEYS if k[0] + k[1] >= 2}
        return MomentSet(raw, zeros, eta_zeros, (0.0,) * 7)

    xbar = Fraction(raw[(1, 0)], m00)
    ybar = Fraction(raw[(0, 1)], m00)
    m = {k: Fraction(v) for k, v in raw.items()}
    mu = {
        (0, 0): m[(0, 0)],
        (1, 0): Fraction(0),
        (0, 1): Fraction(0),
        (2, 0): m[(2, 0)] - xbar * m[(1, 0)],
        (1, 1): m[(1, 1)] - xbar * m[(0, 1)],
        (0, 2): m[(0, 2)] - ybar * m[(0, 1)],
        (3, 0): m[(3, 0)] - 3 * xbar * m[(2, 0)] + 2 * xbar**2 * m[(1, 0)],
        (2, 1): m[(2, 1)] - 2 * xbar * m[(1, 1)] - ybar * m[(2, 0)] + 2 * xbar**2 * m[(0, 1)],
        (1, 2): m[(1, 2)] - 2 * ybar * m[(1, 1)] - xbar * m[(0, 2)] + 2 * ybar**2 * m[(1, 0)],
        (0, 3): m[(0, 3)] - 3 * ybar * m[(0, 2)] + 2 * ybar**2 * m[(0, 1)],
    }
    central = {k: float(v) for k, v in mu.items()}
    m00f = float(m00)
    eta = {
        (p, q): central[(p, q)] / m00f ** ((p + q) / 2.0 + 1.0)
        for p, q in _MOMENT_KEYS
        if p + q >= 2
    }
    return MomentSet(raw, central, eta, _hu_from_eta(eta))


def zeroth_hu(lesion: LesionResult) -> float:
    """Lowest-order moment invariant of the lesion mask (0 when empty)."""
    return moments(lesion.mask).hu[0]


def masked_histogram_feature(
    gray: GrayRaster, mask: BinaryMask, bins: int = DEFAULT_HIST_BINS
) -> np.ndarray:
    """Normalized intensity histogram of mask-set pixels, pooled into equal-width bins."""
    if gray.pixels.shape != mask.pixels.shape:
        raise ValueError("image and mask dimensions must match")
    if bins < 1 or 256 % bins != 0:
        raise ValueError("bins must divide 256")
    selected = gray.pixels[mask.as_bool()]
    if selected.size == 0:
        return np.zeros(bins, dtype=np.float64)
    pooled = np.bincount(selected // (256 // bins), minlength=bins).astype(np.float64)
    return pooled / selected.size


@dataclass(frozen=True, eq=False)
class FeatureVector:
    """Per-image features, flattened as
    [exudate_hist, exudate_hu0, vessel_hist, vessel_hu0, ma_hist, ma_hu0]."""

    exudate_hist: np.ndarray
    exudate_hu0: float
    vessel_hist: np.ndarray
    vessel_hu0: float
    ma_hist: np.ndarray
    ma_hu0: float

    def as_array(self) -> np.ndarray:
        flat = np.concatenate(
            [
                self.exudate_hist,
                [self.exudate_hu0],
                self.vessel_hist,
                [self.vessel_hu0],
                self.ma_hist,
                [self.ma_hu0],
            ]
        )
        if not np.all(np.isfinite(flat)):
            raise ValueError("feature vector contains non-finite values")
        return flat


def feature_dimension(bins: int = DEFAULT_HIST_BINS) -> int:
    return 3 * (bins + 1)


def assemble_features(
    exudates: LesionResult,
    vessels: LesionResult,
    microaneurysms: LesionResult,
    green: GrayRaster,
    bins: int = DEFAULT_HIST_BINS,
) -> FeatureVector:
    """Build the flattened feature vector from the three lesion results."""
    return FeatureVector(
        exudate_hist=masked_histogram_feature(green, exudates.mask, bins),
        exudate_hu0=zeroth_hu(exudates),
        vessel_hist=masked_histogram_feature(green, vessels.mask, bins),
        vessel_hu0=zeroth_hu(vessels),
        ma_hist=masked_histogram_feature(green, microaneurysms.mask, bins),
        ma_hu0=zeroth_hu(microaneurysms),
    )


@dataclass(frozen=True, eq=False)
class ScalerModel:
    """Per-column mean and population standard deviation."""

    mean: np.ndarray
    std: np.ndarray


def scaler_fit(matrix: np.ndarray) -> ScalerModel:
    x = np.asarray(matrix, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 1:
        raise ValueError("scaler needs a non-empty 2-D matrix")
    return ScalerModel(mean=x.mean(axis=0), std=x.std(axis=0))


def scaler_transform(model: ScalerModel, x: np.ndarray) -> np.ndarray:
    """(x - mean) / std, with zero-variance columns mapping to 0."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != model.mean.shape[0]:
        raise ValueError("feature dimension does not match the scaler")
    safe = np.where(model.std == 0.0, 1.0, model.std)
    return np.where(model.std == 0.0, 0.0, (x - model.mean) / safe)
