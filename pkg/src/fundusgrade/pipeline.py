"""Glue between the image pipeline, feature cache files, and classifiers.

The feature cache is a CSV with header ``image,label,f0..f{d-1}``; floats
are written with repr() so re-extraction is byte-identical and parsing is
lossless. Model fitting always splits first and fits the scaler on the
training partition only.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .classifiers import (
    GaussianNBModel,
    RandomForestModel,
    RandomForestParams,
    SvmCascadeModel,
    SvmCascadeParams,
    nb_predict,
    nb_train,
    rf_predict,
    rf_train,
    svm_cascade_predict,
    svm_cascade_train,
)
from .config import PipelineConfig
from .enhance import ClaheParams
from .evaluation import LabeledItem, split_dataset
from .features import ScalerModel, assemble_features, scaler_fit, scaler_transform
from .lesions import LesionResult, detect_exudates, detect_microaneurysms, detect_vessels
from .raster import GrayRaster, RgbRaster, extract_channel, resize_bilinear


@dataclass(frozen=True, eq=False)
class SegmentedImage:
    exudates: LesionResult
    vessels: LesionResult
    microaneurysms: LesionResult
    green: GrayRaster


def clahe_params(cfg: PipelineConfig) -> ClaheParams:
    return ClaheParams(cfg.clahe_tiles_x, cfg.clahe_tiles_y, cfg.clahe_clip)


def segment_raster(img: RgbRaster, cfg: PipelineConfig, stages: dict | None = None) -> SegmentedImage:
    """Run the three detectors on an already-resized raster."""
    cp = clahe_params(cfg)
    exu = detect_exudates(
        img,
        se_size=cfg.exudate_se,
        median_k=cfg.median_k,
        threshold_value=cfg.exudate_threshold,
        disc_percentile=cfg.disc_percentile,
        disc_dilate=cfg.disc_dilate,
        stages=stages,
    )
    ves = detect_vessels(
        img,
        clahe_params=cp,
        se_sizes=cfg.vessel_se_sizes,
        threshold_value=cfg.vessel_threshold,
        min_area=cfg.vessel_min_area,
        stages=stages,
    )
    ma = detect_microaneurysms(
        img,
        clahe_params=cp,
        median_k=cfg.median_k,
        erode_size=cfg.ma_se,
        close_size=cfg.ma_close_se,
        threshold_value=cfg.ma_threshold,
        min_area=cfg.ma_min_area,
        max_area=cfg.ma_max_area,
        stages=stages,
    )
    return SegmentedImage(exu, ves, ma, extract_channel(img, "G"))


def prepare_raster(img: RgbRaster, cfg: PipelineConfig) -> RgbRaster:
    return resize_bilinear(img, cfg.resize_width, cfg.resize_height)


def raster_features(img: RgbRaster, cfg: PipelineConfig) -> np.ndarray:
    """Resize, segment, and assemble the flattened feature vector."""
    seg = segment_raster(prepare_raster(img, cfg), cfg)
    return assemble_features(
        seg.exudates, seg.vessels, seg.microaneurysms, seg.green, cfg.hist_bins
    ).as_array()


# ---------------------------------------------------------------------------
# Label and feature cache files


def read_labels_csv(path) -> dict[str, int]:
    """Read ``image,level`` rows; levels must be integers in 0..4."""
    labels: dict[str, int] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        for lineno, row in enumerate(reader, start=1):
            if not row or (lineno == 1 and row[0].strip().lower() == "image"):
                continue
            if len(row) < 2:
                raise ValueError(f"{path}:{lineno}: expected 'image,level'")
            image_id = row[0].strip()
            if not image_id:
                raise ValueError(f"{path}:{lineno}: empty image id")
            if image_id in labels:
                raise ValueError(f"{path}:{lineno}: duplicate image id {image_id!r}")
            try:
                level = int(row[1])
            except ValueError:
                raise ValueError(f"{path}:{lineno}: level {row[1]!r} is not an integer") from None
            if not 0 <= level <= 4:
                raise ValueError(f"{path}:{lineno}: level {level} outside 0..4")
            labels[image_id] = level
    return labels


def write_features_csv(path, rows: list[tuple[str, int, np.ndarray]], dim: int) -> None:
    lines = ["image,label," + ",".join(f"f{i}" for i in range(dim))]
    for image_id, label, vector in rows:
        values = ",".join(repr(float(v)) for v in vector)
        lines.append(f"{image_id},{label},{values}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_features_csv(path) -> tuple[list[str], np.ndarray, np.ndarray]:
    """Returns (ids, labels, feature matrix); malformed rows name their line."""
    text = Path(path).read_text().splitlines()
    if not text or not text[0].startswith("image,label,"):
        raise ValueError(f"{path}: missing feature cache header")
    dim = len(text[0].split(",")) - 2
    ids: list[str] = []
    labels: list[int] = []
    matrix: list[list[float]] = []
    for lineno, line in enumerate(text[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != dim + 2:
            raise ValueError(f"{path}:{lineno}: expected {dim + 2} fields, got {len(parts)}")
        try:
            label = int(parts[1])
            vector = [float(v) for v in parts[2:]]
        except ValueError:
            raise ValueError(f"{path}:{lineno}: malformed numeric field") from None
        if not 0 <= label <= 4:
            raise ValueError(f"{path}:{lineno}: label {label} outside 0..4")
        if parts[0] in ids:
            raise ValueError(f"{path}:{lineno}: duplicate image id {parts[0]!r}")
        ids.append(parts[0])
        labels.append(label)
        matrix.append(vector)
    if not ids:
        raise ValueError(f"{path}: feature cache holds no rows")
    return ids, np.array(labels, dtype=np.int64), np.array(matrix, dtype=np.float64)


# ---------------------------------------------------------------------------
# Model fitting and prediction


def train_classifier(X: np.ndarray, y: np.ndarray, cfg: PipelineConfig):
    """Fit the scaler and the configured classifier on the given rows."""
    scaler = scaler_fit(X)
    Z = scaler_transform(scaler, X)
    if cfg.classifier == "rf":
        params = RandomForestParams(cfg.n_trees, cfg.max_depth, cfg.m_features)
        model = rf_train(Z, y, params, cfg.seed)
    elif cfg.classifier == "nb":
        model = nb_train(Z, y)
    else:
        model = svm_cascade_train(Z, y, SvmCascadeParams(cfg.svm_lambda, cfg.svm_epochs), cfg.seed)
    return scaler, model


def classify(scaler: ScalerModel, model, x: np.ndarray) -> int:
    z = scaler_transform(scaler, x)
    if isinstance(model, RandomForestModel):
        return rf_predict(model, z)
    if isinstance(model, GaussianNBModel):
        return nb_predict(model, z)
    if isinstance(model, SvmCascadeModel):
        return svm_cascade_predict(model, z)
    raise ValueError(f"unsupported model type {type(model).__name__}")


@dataclass(frozen=True, eq=False)
class SplitFit:
    scaler: ScalerModel
    model: object
    train_ids: list[str]
    test_ids: list[str]
    test_actual: np.ndarray
    test_predicted: np.ndarray


def fit_on_split(ids: list[str], labels: np.ndarray, X: np.ndarray, cfg: PipelineConfig) -> SplitFit:
    """75/25-style split, scaler fit on train only, classifier trained on
    the scaled train rows, predictions on the held-out rows."""
    items = [LabeledItem(i, int(l)) for i, l in zip(ids, labels)]
    train_items, test_items = split_dataset(items, cfg.train_frac, cfg.seed)
    index = {image_id: row for row, image_id in enumerate(ids)}
    train_rows = [index[it.image_id] for it in train_items]
    test_rows = [index[it.image_id] for it in test_items]
    scaler, model = train_classifier(X[train_rows], labels[train_rows], cfg)
    predicted = np.array(
        [classify(scaler, model, X[r]) for r in test_rows], dtype=np.int64
    )
    return SplitFit(
        scaler=scaler,
        model=model,
        train_ids=[it.image_id for it in train_items],
        test_ids=[it.image_id for it in test_items],
        test_actual=labels[test_rows],
        test_predicted=predicted,
    )
