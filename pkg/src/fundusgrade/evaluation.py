"""Dataset splitting, confusion matrices, and macro-averaged metrics.

Macro averaging takes the unweighted mean of the per-class values so that
small classes count as much as large ones. Classes with an empty
denominator contribute 0 to the macro mean and are flagged.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .classifiers import N_CLASSES
from .rng import pcg32_stream


@dataclass(frozen=True)
class LabeledItem:
    image_id: str
    label: int


def split_dataset(items, train_frac: float = 0.75, seed: int = 0):
    """Deterministic shuffled split; train size rounds half-up."""
    items = list(items)
    if not items:
        raise ValueError("cannot split an empty dataset")
    if not 0.0 < train_frac < 1.0:
        raise ValueError("train_frac must lie strictly between 0 and 1")
    pcg32_stream(seed, 0).shuffle(items)
    n_train = int(math.floor(train_frac * len(items) + 0.5))
    return items[:n_train], items[n_train:]


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    """5x5 counts; rows are the actual class, columns the predicted class."""

    counts: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.counts, dtype=np.int64)
        if c.shape != (N_CLASSES, N_CLASSES) or (c < 0).any():
            raise ValueError("confusion matrix must be 5x5 with nonnegative counts")
        object.__setattr__(self, "counts", c)

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def confusion_matrix(actual, predicted) -> ConfusionMatrix:
    a = np.asarray(actual, dtype=np.int64)
    p = np.asarray(predicted, dtype=np.int64)
    if a.shape != p.shape or a.ndim != 1 or a.size == 0:
        raise ValueError("actual and predicted must be equal-length non-empty sequences")
    if a.min() < 0 or a.max() >= N_CLASSES or p.min() < 0 or p.max() >= N_CLASSES:
        raise ValueError(f"labels must lie in 0..{N_CLASSES - 1}")
    counts = np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
    np.add.at(counts, (a, p), 1)
    return ConfusionMatrix(counts)


@dataclass(frozen=True, eq=False)
class Metrics:
    accuracy: float
    macro_sensitivity: float
    macro_specificity: float
    per_class_sensitivity: np.ndarray
    per_class_specificity: np.ndarray
    degenerate_classes: tuple[int, ...] = ()


def compute_metrics(cm: ConfusionMatrix) -> Metrics:
    """Accuracy plus macro-averaged sensitivity and specificity."""
    total = cm.total
    if total == 0:
        raise ValueError("confusion matrix has no observations")
    counts = cm.counts.astype(np.float64)
    tp = np.diag(counts)
    fn = counts.sum(axis=1) - tp
    fp = counts.sum(axis=0) - tp
    tn = total - tp - fn - fp

    sens_den = tp + fn
    spec_den = tn + fp
    degenerate = tuple(int(c) for c in np.nonzero((sens_den == 0) | (spec_den == 0))[0])
    if degenerate:
        warnings.warn(
            f"classes {degenerate} have an empty metric denominator and contribute 0",
            RuntimeWarning,
            stacklevel=2,
        )
    sensitivity = np.where(sens_den > 0, tp / np.where(sens_den > 0, sens_den, 1.0), 0.0)
    specificity = np.where(spec_den > 0, tn / np.where(spec_den > 0, spec_den, 1.0), 0.0)
    return Metrics(
        accuracy=float(tp.sum() / total),
        macro_sensitivity=float(sensitivity.mean()),
        macro_specificity=float(specificity.mean()),
        per_class_sensitivity=sensitivity,
        per_class_specificity=specificity,
        degenerate_classes=degenerate,
    )
