"""Grayscale images, PGM file I/O and visual/thermal pairing."""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatchError,
    ImageFormatError,
    TruncatedImageError,
    UnsupportedFormatError,
)

_WHITESPACE = b" \t\n\r\v\f"


@dataclass(frozen=True, eq=False)
class GrayImage:
    """Single-channel image of float64 intensities, shape ``(rows, cols)``.

    The pixel array is copied on construction and made read-only.
    """

    pixels: np.ndarray

    def __post_init__(self):
        px = np.array(self.pixels, dtype=np.float64, copy=True)
        if px.ndim != 2 or px.shape[0] < 1 or px.shape[1] < 1:
            raise DimensionMismatchError(f"expected a non-empty 2D pixel grid, got shape {px.shape}")
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    @property
    def rows(self) -> int:
        return self.pixels.shape[0]

    @property
    def cols(self) -> int:
        return self.pixels.shape[1]

    @property
    def dims(self) -> tuple[int, int]:
        return self.pixels.shape

    def __eq__(self, other):
        if not isinstance(other, GrayImage):
            return NotImplemented
        return self.dims == other.dims and bool(np.array_equal(self.pixels, other.pixels))

    def __repr__(self):
        return f"GrayImage({self.rows}x{self.cols})"


@dataclass(frozen=True)
class ImagePair:
    visual: GrayImage
    thermal: GrayImage
    class_label: int
    sample_id: str


def to_unit_range(image: GrayImage) -> GrayImage:
    """Linearly rescale so the minimum maps to 0 and the maximum to 1.

    A constant image maps to all zeros.
    """
    px = image.pixels
    lo, hi = float(px.min()), float(px.max())
    if hi <= lo:
        return GrayImage(np.zeros_like(px))
    return GrayImage(np.clip((px - lo) / (hi - lo), 0.0, 1.0))


class _Reader:
    def __init__(self, data):
        self.data = data
        self.pos = 0

    def skip_space_and_comments(self):
        data = self.data
        while self.pos < len(data):
            ch = data[self.pos:self.pos + 1]
            if ch in _WHITESPACE and ch:
                self.pos += 1
            elif ch == b"#":
                end = data.find(b"\n", self.pos)
                self.pos = len(data) if end < 0 else end + 1
            else:
                break

    def token(self):
        start = self.pos
        while self.pos < len(self.data) and self.data[self.pos:self.pos + 1] not in _WHITESPACE:
            self.pos += 1
        return self.data[start:self.pos]

    def header_int(self, field):
        self.skip_space_and_comments()
        offset = self.pos
        if offset >= len(self.data):
            raise ImageFormatError(f"missing {field} in PGM header (end of file at byte {offset})",
                                   offset=offset, field=field)
        tok = self.token()
        if not tok.isdigit():
            raise ImageFormatError(f"malformed {field} {tok!r} at byte {offset}", offset=offset, field=field)
        return int(tok)


def load_image(path) -> GrayImage:
    """Read a P2 or P5 PGM file and scale pixels to [0, 1] by ``maxval``."""
    with open(path, "rb") as fh:
        data = fh.read()
    magic = data[:2]
    if magic not in (b"P2", b"P5"):
        raise UnsupportedFormatError(f"unsupported image format {magic!r} at byte 0 (need P2 or P5)",
                                     offset=0, field="magic")
    rd = _Reader(data)
    rd.pos = 2
    if rd.pos < len(data) and data[rd.pos:rd.pos + 1] not in _WHITESPACE + b"#":
        raise ImageFormatError("magic number not followed by whitespace at byte 2", offset=2, field="magic")
    width = rd.header_int("width")
    height = rd.header_int("height")
    maxval = rd.header_int("maxval")
    if width < 1 or height < 1:
        raise ImageFormatError(f"non-positive dimensions {width}x{height}", offset=rd.pos, field="width")
    if not 1 <= maxval <= 65535:
        raise ImageFormatError(f"maxval {maxval} outside 1..65535", offset=rd.pos, field="maxval")
    count = width * height

    if magic == b"P5":
        # exactly one whitespace byte separates maxval from the raster
        if rd.pos >= len(data):
            raise TruncatedImageError(f"raster missing, file ends at byte {rd.pos}", offset=rd.pos, field="raster")
        start = rd.pos + 1
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        need = count * dtype.itemsize
        if len(data) - start < need:
            raise TruncatedImageError(
                f"raster truncated: need {need} bytes from byte {start}, file ends at byte {len(data)}",
                offset=len(data), field="raster")
        values = np.frombuffer(data, dtype=dtype, count=count, offset=start).astype(np.float64)
    else:
        values = np.empty(count)
        for i in range(count):
            rd.skip_space_and_comments()
            offset = rd.pos
            if offset >= len(data):
                raise TruncatedImageError(f"raster truncated after {i} of {count} samples at byte {offset}",
                                          offset=offset, field="raster")
            tok = rd.token()
            if not tok.isdigit():
                raise ImageFormatError(f"malformed sample {tok!r} at byte {offset}", offset=offset, field="raster")
            values[i] = int(tok)
    if values.size and values.max() > maxval:
        raise ImageFormatError(f"sample value exceeds maxval {maxval}", field="raster")
    return GrayImage((values / maxval).reshape(height, width))


def save_image(image: GrayImage, path) -> None:
    """Write ``image`` as an 8-bit P5 PGM, clamping pixels to [0, 1]."""
    px = image.pixels
    if not np.all(np.isfinite(px)):
        raise ValueError("cannot save an image with non-finite pixels")
    raster = np.rint(np.clip(px, 0.0, 1.0) * 255.0).astype(np.uint8)
    header = f"P5\n{image.cols} {image.rows}\n255\n".encode("ascii")
    tmp = f"{os.fspath(path)}.tmp"
    with open(tmp, "wb") as fh:
        fh.write(header)
        fh.write(raster.tobytes())
    os.replace(tmp, path)


def _center_crop(px, rows, cols):
    r0 = (px.shape[0] - rows) // 2
    c0 = (px.shape[1] - cols) // 2
    return px[r0:r0 + rows, c0:c0 + cols]


def crop_to(image: GrayImage, rows: int, cols: int) -> GrayImage:
    """Center-crop to ``rows x cols``. On an odd excess the window sits one pixel nearer the top-left."""
    if rows > image.rows or cols > image.cols:
        raise DimensionMismatchError(f"cannot crop {image.rows}x{image.cols} to {rows}x{cols}")
    if (rows, cols) == image.dims:
        return image
    return GrayImage(_center_crop(image.pixels, rows, cols))


def conform_pair(a: GrayImage, b: GrayImage, policy: str = "strict"):
    """Bring two images to identical dimensions.

    ``strict`` refuses unequal inputs; ``center_crop`` crops both to the
    elementwise-minimum dims around their centers.
    """
    if policy == "strict":
        if a.dims != b.dims:
            raise DimensionMismatchError(
                f"dimension mismatch: {a.rows}x{a.cols} vs {b.rows}x{b.cols}")
        return a, b
    if policy == "center_crop":
        rows, cols = min(a.rows, b.rows), min(a.cols, b.cols)
        return crop_to(a, rows, cols), crop_to(b, rows, cols)
    raise ValueError(f"unknown conform policy {policy!r}")


def vectorize(image: GrayImage) -> np.ndarray:
    return image.pixels.reshape(-1).copy()


def devectorize(vector, rows: int, cols: int) -> GrayImage:
    v = np.asarray(vector, dtype=np.float64)
    if v.ndim != 1 or v.shape[0] != rows * cols:
        raise DimensionMismatchError(f"vector of length {v.size} cannot form a {rows}x{cols} image")
    return GrayImage(v.reshape(rows, cols))
