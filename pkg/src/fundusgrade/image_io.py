"""Image decode/encode: 8-bit PNG plus binary PPM (P6) and PGM (P5).

PNG goes through Pillow; the netpbm formats are written directly since the
mask contract ({0, 255} samples only) is checked here on read.
"""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np
from PIL import Image

from .raster import BinaryMask, GrayRaster, RgbRaster


def _read_pnm_tokens(data: bytes, count: int, start: int) -> tuple[list[int], int]:
    """Read whitespace/comment-separated integer header tokens."""
    tokens: list[int] = []
    i = start
    while len(tokens) < count:
        while i < len(data) and data[i : i + 1].isspace():
            i += 1
        if i < len(data) and data[i : i + 1] == b"#":
            while i < len(data) and data[i] != 0x0A:
                i += 1
            continue
        j = i
        while j < len(data) and not data[j : j + 1].isspace():
            j += 1
        if j == i:
            raise ValueError("truncated netpbm header")
        tokens.append(int(data[i:j]))
        i = j
    return tokens, i + 1  # single whitespace byte separates header from raster


def read_ppm(path) -> RgbRaster:
    data = Path(path).read_bytes()
    if data[:2] != b"P6":
        raise ValueError(f"{path}: not a binary PPM (P6) file")
    (w, h, maxval), offset = _read_pnm_tokens(data, 3, 2)
    if maxval != 255:
        raise ValueError(f"{path}: only 8-bit PPM supported")
    raw = data[offset : offset + 3 * w * h]
    if len(raw) != 3 * w * h:
        raise ValueError(f"{path}: truncated PPM raster")
    return RgbRaster(np.frombuffer(raw, dtype=np.uint8).reshape(h, w, 3).copy())


def read_pgm(path) -> GrayRaster:
    data = Path(path).read_bytes()
    if data[:2] != b"P5":
        raise ValueError(f"{path}: not a binary PGM (P5) file")
    (w, h, maxval), offset = _read_pnm_tokens(data, 3, 2)
    if maxval != 255:
        raise ValueError(f"{path}: only 8-bit PGM supported")
    raw = data[offset : offset + w * h]
    if len(raw) != w * h:
        raise ValueError(f"{path}: truncated PGM raster")
    return GrayRaster(np.frombuffer(raw, dtype=np.uint8).reshape(h, w).copy())


def read_mask_pgm(path) -> BinaryMask:
    return BinaryMask(read_pgm(path).pixels)


def write_ppm(img: RgbRaster, path) -> None:
    header = f"P6\n{img.width} {img.height}\n255\n".encode("ascii")
    Path(path).write_bytes(header + img.pixels.tobytes())


def write_pgm(img: GrayRaster | BinaryMask, path) -> None:
    header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
    Path(path).write_bytes(header + img.pixels.tobytes())


def read_png_rgb(path) -> RgbRaster:
    with Image.open(path) as im:
        return RgbRaster(np.asarray(im.convert("RGB"), dtype=np.uint8).copy())


def write_png(img: RgbRaster | GrayRaster | BinaryMask, path) -> None:
    Image.fromarray(img.pixels).save(path, format="PNG")


def load_rgb(path) -> RgbRaster:
    """Decode any supported image file as RGB (PGM promotes gray to RGB)."""
    suffix = Path(path).suffix.lower()
    if suffix == ".ppm":
        return read_ppm(path)
    if suffix == ".pgm":
        gray = read_pgm(path).pixels
        return RgbRaster(np.repeat(gray[:, :, None], 3, axis=2))
    if suffix == ".png":
        return read_png_rgb(path)
    raise ValueError(f"{path}: unsupported image format {suffix!r}")


SUPPORTED_SUFFIXES = (".png", ".ppm", ".pgm")


def png_bytes(img: RgbRaster | GrayRaster | BinaryMask) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(img.pixels).save(buf, format="PNG")
    return buf.getvalue()
