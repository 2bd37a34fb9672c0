"""Connected-component labeling and area-band filtering of binary masks.

Labeling works on per-row runs joined with a union-find, which keeps the
Python-level work proportional to the number of runs rather than pixels.
Labels are assigned in raster-scan discovery order, so the output is fully
deterministic. Component "area" is the pixel count of the component.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .raster import BinaryMask


@dataclass(frozen=True, eq=False)
class Component:
    label: int
    area: int
    bbox: tuple[int, int, int, int]  # (min_x, min_y, max_x, max_y), inclusive
    pixels: np.ndarray  # (area, 2) int32 array of (x, y) coordinates


def _row_runs(row: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Half-open [start, end) column intervals of True samples in one row."""
    padded = np.empty(len(row) + 2, dtype=np.int8)
    padded[0] = padded[-1] = 0
    padded[1:-1] = row
    d = np.diff(padded)
    return np.nonzero(d == 1)[0], np.nonzero(d == -1)[0]


class _UnionFind:
    def __init__(self):
        self.parent: list[int] = []

    def make(self) -> int:
        self.parent.append(len(self.parent))
        return len(self.parent) - 1

    def find(self, i: int) -> int:
        root = i
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[i] != root:  # path compression
            self.parent[i], i = root, self.parent[i]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def connected_components(mask: BinaryMask, connectivity: int = 8) -> list[Component]:
    """Partition set pixels into maximal connected groups."""
    if connectivity not in (4, 8):
        raise ValueError("connectivity must be 4 or 8")
    reach = 1 if connectivity == 8 else 0
    on = mask.as_bool()
    h = on.shape[0]

    uf = _UnionFind()
    run_row: list[int] = []
    run_a: list[int] = []
    run_b: list[int] = []
    prev: list[int] = []  # run indices of the previous row
    for y in range(h):
        starts, ends = _row_runs(on[y])
        cur = []
        for a, b in zip(starts.tolist(), ends.tolist()):
            idx = uf.make()
            run_row.append(y)
            run_a.append(a)
            run_b.append(b)
            cur.append(idx)
        i = j = 0
        while i < len(prev) and j < len(cur):
            pa = run_a[prev[i]] - reach
            pb = run_b[prev[i]] + reach
            ca, cb = run_a[cur[j]], run_b[cur[j]]
            if max(pa, ca) < min(pb, cb):
                uf.union(prev[i], cur[j])
            if pb <= cb:
                i += 1
            else:
                j += 1
        prev = cur

    groups: dict[int, list[int]] = {}
    for idx in range(len(run_row)):
        groups.setdefault(uf.find(idx), []).append(idx)

    components = []
    # runs were created in raster order, so min run index orders discovery
    for label, runs in enumerate(sorted(groups.values(), key=lambda r: r[0]), start=1):
        area = sum(run_b[i] - run_a[i] for i in runs)
        coords = np.empty((area, 2), dtype=np.int32)
        pos = 0
        min_x = min(run_a[i] for i in runs)
        max_x = max(run_b[i] for i in runs) - 1
        min_y = run_row[runs[0]]
        max_y = run_row[runs[-1]]
        for i in runs:
            n = run_b[i] - run_a[i]
            coords[pos : pos + n, 0] = np.arange(run_a[i], run_b[i], dtype=np.int32)
            coords[pos : pos + n, 1] = run_row[i]
            pos += n
        components.append(Component(label, area, (min_x, min_y, max_x, max_y), coords))
    return components


def filter_components_by_area(
    mask: BinaryMask,
    min_area: int,
    max_area: float = math.inf,
    connectivity: int = 8,
) -> BinaryMask:
    """Keep only pixels of components whose area lies in [min_area, max_area]."""
    if min_area > max_area:
        raise ValueError("min_area must not exceed max_area")
    out = np.zeros_like(mask.pixels)
    for comp in connected_components(mask, connectivity):
        if min_area <= comp.area <= max_area:
            out[comp.pixels[:, 1], comp.pixels[:, 0]] = 255
    return BinaryMask(out)
