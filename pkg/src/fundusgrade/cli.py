"""Command-line interface: segment, extract-features, train, predict,
evaluate, run-all.

Exit codes: 0 on success, 1 when some inputs were skipped (partial run),
2 on invalid usage, config, or data.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .classifiers import LABEL_NAMES
from .config import ConfigError, PipelineConfig, build_config
from .evaluation import Metrics, compute_metrics, confusion_matrix
from .features import feature_dimension
from .image_io import SUPPORTED_SUFFIXES, load_rgb, write_pgm
from .model_io import load_model, save_model
from .pipeline import (
    classify,
    fit_on_split,
    prepare_raster,
    raster_features,
    read_features_csv,
    read_labels_csv,
    segment_raster,
    write_features_csv,
)

log = logging.getLogger("fundusgrade")

EXIT_OK = 0
EXIT_PARTIAL = 1
EXIT_USAGE = 2


def _config_flags(parser: argparse.ArgumentParser) -> None:
    g = parser.add_argument_group("pipeline configuration (flags override --config)")
    g.add_argument("--config", help="flat key = value config file")
    g.add_argument("--seed", type=int)
    g.add_argument("--classifier", choices=("rf", "svm", "nb"))
    g.add_argument("--resize-width", type=int, dest="resize_width")
    g.add_argument("--resize-height", type=int, dest="resize_height")
    g.add_argument("--clahe-tiles", type=int, dest="clahe_tiles", help="tile count per axis")
    g.add_argument("--clahe-clip", type=float, dest="clahe_clip")
    g.add_argument("--median-k", type=int, dest="median_k")
    g.add_argument("--exudate-se", type=int, dest="exudate_se")
    g.add_argument("--exudate-threshold", type=int, dest="exudate_threshold")
    g.add_argument("--disc-percentile", type=float, dest="disc_percentile")
    g.add_argument("--disc-dilate", type=int, dest="disc_dilate")
    g.add_argument("--vessel-threshold", type=int, dest="vessel_threshold")
    g.add_argument("--vessel-min-area", type=int, dest="vessel_min_area")
    g.add_argument("--ma-threshold", dest="ma_threshold", help="0..255 or 'otsu'")
    g.add_argument("--ma-close-se", type=int, dest="ma_close_se")
    g.add_argument("--ma-min-area", type=int, dest="ma_min_area")
    g.add_argument("--ma-max-area", type=int, dest="ma_max_area")
    g.add_argument("--hist-bins", type=int, dest="hist_bins")
    g.add_argument("--train-frac", type=float, dest="train_frac")
    g.add_argument("--n-trees", type=int, dest="n_trees")
    g.add_argument("--max-depth", type=int, dest="max_depth")
    g.add_argument("--m-features", type=int, dest="m_features")
    g.add_argument("--svm-lambda", type=float, dest="svm_lambda")
    g.add_argument("--svm-epochs", type=int, dest="svm_epochs")


_CONFIG_KEYS = [
    "seed",
    "classifier",
    "resize_width",
    "resize_height",
    "clahe_clip",
    "median_k",
    "exudate_se",
    "exudate_threshold",
    "disc_percentile",
    "disc_dilate",
    "vessel_threshold",
    "vessel_min_area",
    "ma_close_se",
    "ma_min_area",
    "ma_max_area",
    "hist_bins",
    "train_frac",
    "n_trees",
    "max_depth",
    "m_features",
    "svm_lambda",
    "svm_epochs",
]


def _config_from_args(args: argparse.Namespace) -> PipelineConfig:
    overrides = {
        k: v for k in _CONFIG_KEYS if (v := getattr(args, k, None)) is not None
    }
    tiles = getattr(args, "clahe_tiles", None)
    if tiles is not None:
        overrides["clahe_tiles_x"] = tiles
        overrides["clahe_tiles_y"] = tiles
    ma_thr = getattr(args, "ma_threshold", None)
    if ma_thr is not None:
        if str(ma_thr).lower() in ("otsu", "none", "auto"):
            overrides["ma_threshold"] = None  # explicit request for the adaptive default
        else:
            try:
                overrides["ma_threshold"] = int(ma_thr)
            except ValueError:
                raise ConfigError(f"--ma-threshold: expected an integer or 'otsu', got {ma_thr!r}")
    return build_config(getattr(args, "config", None), overrides)


def _image_files(input_dir: Path) -> list[Path]:
    return sorted(p for p in input_dir.iterdir() if p.suffix.lower() in SUPPORTED_SUFFIXES)


def _dump_stages(stages: dict, stage_dir: Path, stem: str) -> None:
    stage_dir.mkdir(parents=True, exist_ok=True)
    for name, img in stages.items():
        write_pgm(img, stage_dir / f"{stem}.{name}.pgm")


def cmd_segment(args) -> int:
    cfg = _config_from_args(args)
    input_dir = Path(args.input_dir)
    output_dir = Path(args.output_dir)
    if not input_dir.is_dir():
        log.error("input directory %s does not exist", input_dir)
        return EXIT_USAGE
    files = _image_files(input_dir)
    if not files:
        log.error("no decodable images in %s", input_dir)
        return EXIT_USAGE
    output_dir.mkdir(parents=True, exist_ok=True)

    records = []
    skipped = 0
    for path in files:
        try:
            img = prepare_raster(load_rgb(path), cfg)
            stages: dict | None = {} if args.dump_stages else None
            seg = segment_raster(img, cfg, stages)
        except (ValueError, OSError) as exc:
            log.warning("skipping %s: %s", path.name, exc)
            skipped += 1
            continue
        stem = path.stem
        write_pgm(seg.exudates.mask, output_dir / f"{stem}.exudate.pgm")
        write_pgm(seg.vessels.mask, output_dir / f"{stem}.vessel.pgm")
        write_pgm(seg.microaneurysms.mask, output_dir / f"{stem}.ma.pgm")
        if stages is not None:
            _dump_stages(stages, output_dir / "stages", stem)
        records.append(
            {
                "image": stem,
                "exudate_area": seg.exudates.area,
                "vessel_area": seg.vessels.area,
                "ma_area": seg.microaneurysms.area,
                "ma_count": seg.microaneurysms.component_count,
            }
        )
    if not records:
        log.error("no image in %s could be segmented", input_dir)
        return EXIT_USAGE
    with open(output_dir / "lesions.jsonl", "w") as fh:
        for record in records:
            fh.write(json.dumps(record) + "\n")
    return EXIT_PARTIAL if skipped else EXIT_OK


def cmd_extract_features(args) -> int:
    cfg = _config_from_args(args)
    input_dir = Path(args.input_dir)
    if not input_dir.is_dir():
        log.error("input directory %s does not exist", input_dir)
        return EXIT_USAGE
    labels = read_labels_csv(args.labels_csv)
    files = _image_files(input_dir)
    if not files:
        log.error("no decodable images in %s", input_dir)
        return EXIT_USAGE

    rows = []
    skipped = 0
    for path in files:
        stem = path.stem
        if stem not in labels:
            log.warning("skipping %s: no label", path.name)
            skipped += 1
            continue
        try:
            vector = raster_features(load_rgb(path), cfg)
        except (ValueError, OSError) as exc:
            log.warning("skipping %s: %s", path.name, exc)
            skipped += 1
            continue
        rows.append((stem, labels[stem], vector))
    if not rows:
        log.error("no labeled, decodable images found")
        return EXIT_USAGE
    write_features_csv(args.out_csv, rows, feature_dimension(cfg.hist_bins))
    return EXIT_PARTIAL if skipped else EXIT_OK


def cmd_train(args) -> int:
    cfg = _config_from_args(args)
    ids, labels, X = read_features_csv(args.features_csv)
    fit = fit_on_split(ids, labels, X, cfg)
    save_model(args.model_out, fit.scaler, fit.model)
    print(f"trained {cfg.classifier} model on {len(fit.train_ids)} rows -> {args.model_out}")
    return EXIT_OK


def _metrics_payload(metrics: Metrics, counts: np.ndarray) -> dict:
    return {
        "accuracy": metrics.accuracy,
        "macro_sensitivity": metrics.macro_sensitivity,
        "macro_specificity": metrics.macro_specificity,
        "per_class": [
            {
                "label": c,
                "name": LABEL_NAMES[c],
                "sensitivity": float(metrics.per_class_sensitivity[c]),
                "specificity": float(metrics.per_class_specificity[c]),
            }
            for c in range(5)
        ],
        "confusion": counts.tolist(),
    }


def _format_report(metrics: Metrics, counts: np.ndarray, cfg: PipelineConfig, n_train: int, n_test: int) -> str:
    short = [name.split()[0] for name in LABEL_NAMES]
    lines = [
        f"classifier: {cfg.classifier} (seed {cfg.seed})",
        f"rows: {n_train} train / {n_test} test",
        "",
        "confusion matrix (rows = actual, columns = predicted):",
        "              " + " ".join(f"{name:>9}" for name in short),
    ]
    for c, name in enumerate(LABEL_NAMES):
        counts_row = " ".join(f"{int(v):>9}" for v in counts[c])
        lines.append(f"{name:>13} {counts_row}")
    lines += [
        "",
        f"accuracy:          {metrics.accuracy:.4f}",
        f"macro sensitivity: {metrics.macro_sensitivity:.4f}",
        f"macro specificity: {metrics.macro_specificity:.4f}",
        "",
        "per-class sensitivity / specificity:",
    ]
    for c, name in enumerate(LABEL_NAMES):
        lines.append(
            f"  {name:<13} {metrics.per_class_sensitivity[c]:.4f} / "
            f"{metrics.per_class_specificity[c]:.4f}"
        )
    return "\n".join(lines) + "\n"


def cmd_evaluate(args) -> int:
    cfg = _config_from_args(args)
    ids, labels, X = read_features_csv(args.features_csv)
    fit = fit_on_split(ids, labels, X, cfg)
    cm = confusion_matrix(fit.test_actual, fit.test_predicted)
    metrics = compute_metrics(cm)
    report = _format_report(metrics, cm.counts, cfg, len(fit.train_ids), len(fit.test_ids))

    if args.report_out:
        Path(args.report_out).write_text(report)
    else:
        sys.stdout.write(report)
    if args.json_out:
        payload = _metrics_payload(metrics, cm.counts)
        Path(args.json_out).write_text(json.dumps(payload, indent=2) + "\n")
    if args.model_out:
        save_model(args.model_out, fit.scaler, fit.model)
    return EXIT_OK


def cmd_predict(args) -> int:
    cfg = _config_from_args(args)
    scaler, model = load_model(args.model)
    if args.image:
        vector = raster_features(load_rgb(args.image), cfg)
        label = classify(scaler, model, vector)
        print(f"{label} {LABEL_NAMES[label]}")
        return EXIT_OK
    ids, _, X = read_features_csv(args.features_csv)
    for image_id, row in zip(ids, X):
        print(f"{image_id},{classify(scaler, model, row)}")
    return EXIT_OK


def _child_args(args, **extra) -> argparse.Namespace:
    ns = argparse.Namespace(**vars(args))
    for key, value in extra.items():
        setattr(ns, key, value)
    return ns


def cmd_run_all(args) -> int:
    output_dir = Path(args.output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    features_csv = output_dir / "features.csv"

    code = cmd_segment(_child_args(args, output_dir=str(output_dir / "masks")))
    if code == EXIT_USAGE:
        return code

    ext_code = cmd_extract_features(_child_args(args, out_csv=str(features_csv)))
    if ext_code == EXIT_USAGE:
        return ext_code

    eval_code = cmd_evaluate(
        _child_args(
            args,
            features_csv=str(features_csv),
            report_out=str(output_dir / "report.txt"),
            json_out=str(output_dir / "metrics.json"),
            model_out=str(output_dir / "model.txt"),
        )
    )
    if eval_code == EXIT_USAGE:
        return eval_code
    print(f"run-all outputs in {output_dir}")
    return max(code, ext_code, eval_code)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fundusgrade",
        description="Classical lesion segmentation and five-grade retinopathy classification",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("segment", help="write lesion masks and a JSON-lines area record")
    p.add_argument("input_dir")
    p.add_argument("output_dir")
    p.add_argument("--dump-stages", action="store_true", help="also write every intermediate stage")
    _config_flags(p)
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("extract-features", help="build the feature cache CSV from labeled images")
    p.add_argument("input_dir")
    p.add_argument("labels_csv")
    p.add_argument("out_csv")
    _config_flags(p)
    p.set_defaults(func=cmd_extract_features)

    p = sub.add_parser("train", help="split, fit scaler + classifier, save the model file")
    p.add_argument("features_csv")
    p.add_argument("model_out")
    _config_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="split, train, and report metrics on the held-out rows")
    p.add_argument("features_csv")
    p.add_argument("--json-out", dest="json_out")
    p.add_argument("--report-out", dest="report_out")
    p.add_argument("--model-out", dest="model_out")
    _config_flags(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("predict", help="grade one image or every row of a feature cache")
    p.add_argument("model")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--image")
    group.add_argument("--features-csv", dest="features_csv")
    _config_flags(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("run-all", help="segment + extract-features + train + evaluate")
    p.add_argument("input_dir")
    p.add_argument("labels_csv")
    p.add_argument("output_dir")
    p.add_argument("--dump-stages", action="store_true")
    _config_flags(p)
    p.set_defaults(func=cmd_run_all)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError, OSError) as exc:
        log.error("%s", exc)
        return EXIT_USAGE


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
