"""Deterministic synthetic fundus-like images for tests and demos.

Three families mirror what the detectors look for: bright blobs (exudate
analogue, red+green bright so the exudate path fires), thin bright-green
polylines (vessel analogue), and small dark dots on a light field
(microaneurysm analogue). Geometry is fixed per image name, so regenerated
datasets are byte-identical.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .raster import RgbRaster


@dataclass(frozen=True)
class SyntheticImage:
    name: str
    kind: str  # "plain" | "blob" | "line" | "dot"
    image: RgbRaster
    label: int  # assigned grade for the labels CSV
    meta: dict = field(default_factory=dict)


def _canvas(size: int, color: tuple[int, int, int]) -> np.ndarray:
    img = np.empty((size, size, 3), dtype=np.uint8)
    img[:] = color
    return img


def _draw_disc(img: np.ndarray, cx: int, cy: int, r: int, color: tuple[int, int, int]) -> int:
    ys, xs = np.ogrid[: img.shape[0], : img.shape[1]]
    inside = (xs - cx) ** 2 + (ys - cy) ** 2 <= r * r
    img[inside] = color
    return int(inside.sum())


def _draw_polyline(img: np.ndarray, points, width: int, color: tuple[int, int, int]) -> None:
    half = width // 2
    ys, xs = np.ogrid[: img.shape[0], : img.shape[1]]
    for (x0, y0), (x1, y1) in zip(points, points[1:]):
        steps = max(abs(x1 - x0), abs(y1 - y0), 1)
        for t in range(steps + 1):
            px = x0 + (x1 - x0) * t // steps
            py = y0 + (y1 - y0) * t // steps
            band = (np.abs(xs - px) <= half) & (np.abs(ys - py) <= half)
            img[band] = color


def make_blob_image(size: int, centers, radius: int = 30) -> RgbRaster:
    """Dark field with large bright discs; drives the exudate detector."""
    img = _canvas(size, (40, 40, 40))
    for cx, cy in centers:
        _draw_disc(img, cx, cy, radius, (250, 250, 250))
    return RgbRaster(img)


def make_line_image(size: int, polylines, width: int = 3) -> RgbRaster:
    """Dark field with thin bright-green polylines; drives the vessel detector."""
    img = _canvas(size, (40, 40, 40))
    for pts in polylines:
        _draw_polyline(img, pts, width, (40, 230, 40))
    return RgbRaster(img)


def make_dot_image(size: int, centers, radius: int = 2) -> RgbRaster:
    """Light field with small dark dots; drives the microaneurysm detector."""
    img = _canvas(size, (200, 200, 200))
    for cx, cy in centers:
        _draw_disc(img, cx, cy, radius, (20, 20, 20))
    return RgbRaster(img)


def make_plain_image(size: int, value: int = 90) -> RgbRaster:
    return RgbRaster(_canvas(size, (value, value, value)))


def synthetic_suite(size: int = 350) -> list[SyntheticImage]:
    """The ten-image smoke-test set, fixed geometry, all five grades present."""
    s = size
    blobs = [
        [(s // 4, s // 4), (3 * s // 4, s // 2), (s // 2, 3 * s // 4)],
        [(s // 3, 2 * s // 3), (2 * s // 3, s // 4)],
        [(s // 2, s // 2), (s // 5, 3 * s // 5), (4 * s // 5, 4 * s // 5)],
    ]
    lines = [
        [[(10, 20), (s - 20, s // 3)], [(15, s // 2), (s - 10, s // 2 + 40)], [(s // 4, 10), (s // 3, s - 15)]],
        [[(5, s - 30), (s - 5, 25)], [(s // 2, 5), (s // 2 - 30, s - 5)], [(10, s // 5), (s - 10, s // 5)]],
        [[(20, 10), (30, s - 10)], [(5, 2 * s // 3), (s - 5, 2 * s // 3 - 20)], [(s - 40, 5), (s - 25, s - 5)]],
    ]
    dot_counts = [3, 4, 5]
    spots = [(s // 5, s // 5), (3 * s // 5, s // 4), (s // 4, 3 * s // 5), (3 * s // 4, 3 * s // 4), (s // 2, s // 2)]

    suite = [SyntheticImage("fundus00_plain", "plain", make_plain_image(s), 0)]
    for i, centers in enumerate(blobs):
        suite.append(
            SyntheticImage(
                f"fundus{i + 1:02d}_blob",
                "blob",
                make_blob_image(s, centers),
                (3, 4, 3)[i],
                {"n_blobs": len(centers)},
            )
        )
    for i, polys in enumerate(lines):
        suite.append(
            SyntheticImage(
                f"fundus{i + 4:02d}_line",
                "line",
                make_line_image(s, polys),
                (2, 2, 4)[i],
            )
        )
    for i, count in enumerate(dot_counts):
        suite.append(
            SyntheticImage(
                f"fundus{i + 7:02d}_dot",
                "dot",
                make_dot_image(s, spots[:count]),
                (1, 1, 0)[i],
                {"n_dots": count},
            )
        )
    return suite
