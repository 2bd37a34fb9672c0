#!/usr/bin/env python3
"""Recompute macro-averaged metrics from a stored five-class confusion matrix.

By default this replays the bundled reference matrix (rows = actual class)
whose summary values are known, printing accuracy, macro sensitivity and
macro specificity alongside the per-class breakdown. Pass a JSON file with
a 5x5 ``confusion`` array to score a different run.

Usage:
    python scripts/score_reference_matrix.py [metrics.json]
"""

import argparse
import json
from pathlib import Path

import numpy as np

from fundusgrade.classifiers import LABEL_NAMES
from fundusgrade.evaluation import ConfusionMatrix, compute_metrics

REFERENCE_CONFUSION = [
    [989, 100, 114, 63, 66],
    [116, 466, 10, 6, 6],
    [122, 10, 492, 8, 10],
    [82, 2, 12, 316, 8],
    [40, 4, 14, 4, 291],
]


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("metrics_json", nargs="?", type=Path, help="JSON with a 'confusion' array")
    args = parser.parse_args()

    if args.metrics_json:
        counts = np.array(json.loads(args.metrics_json.read_text())["confusion"], dtype=np.int64)
    else:
        counts = np.array(REFERENCE_CONFUSION, dtype=np.int64)

    cm = ConfusionMatrix(counts)
    metrics = compute_metrics(cm)
    print(f"total observations:  {cm.total}")
    print(f"accuracy:            {metrics.accuracy:.4f}")
    print(f"macro sensitivity:   {metrics.macro_sensitivity:.4f}")
    print(f"macro specificity:   {metrics.macro_specificity:.4f}")
    print()
    for c, name in enumerate(LABEL_NAMES):
        print(
            f"{name:<14} sensitivity {metrics.per_class_sensitivity[c]:.4f}  "
            f"specificity {metrics.per_class_specificity[c]:.4f}"
        )


if __name__ == "__main__":
    main()
