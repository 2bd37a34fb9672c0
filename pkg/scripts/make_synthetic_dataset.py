#!/usr/bin/env python3
"""Write the ten-image synthetic fundus-like dataset and its labels CSV.

The images are deterministic: regenerating into a fresh directory produces
byte-identical files, which the end-to-end smoke tests rely on.

Usage:
    python scripts/make_synthetic_dataset.py OUT_DIR [--size 350]
"""

import argparse
from pathlib import Path

from fundusgrade.image_io import write_png
from fundusgrade.synthetic import synthetic_suite


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("out_dir", type=Path)
    parser.add_argument("--size", type=int, default=350)
    args = parser.parse_args()

    images = args.out_dir / "images"
    images.mkdir(parents=True, exist_ok=True)
    lines = ["image,level"]
    for item in synthetic_suite(args.size):
        write_png(item.image, images / f"{item.name}.png")
        lines.append(f"{item.name},{item.label}")
    labels = args.out_dir / "labels.csv"
    labels.write_text("\n".join(lines) + "\n")
    print(f"wrote {len(lines) - 1} images to {images} and labels to {labels}")


if __name__ == "__main__":
    main()
