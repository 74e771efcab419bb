"""db2 filter bank and separable 2D DWT/IDWT with multilevel pyramids.

Conventions:

* Analysis pads each row by ``L - 1`` samples, takes the full convolution
  with the decomposition filter and keeps samples ``L, L+2, ...``.
* ``symmetric`` mode: half-point reflection, subband length
  ``(n + L - 1) // 2``; synthesis crops back to the recorded length.
* ``periodic`` mode: periodization. Odd lengths are first extended by
  repeating the last sample, subband length is ``ceil(n / 2)``, and the
  transform is orthonormal on even lengths.
* 2D steps filter along rows first, then along columns. ``ch`` is low-pass
  along rows and high-pass along columns, so a horizontal edge lands in
  ``ch``; ``cv`` is the transpose case and ``cd`` is high-pass both ways.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from . import kernels
from .docio import matrix_from_doc, matrix_to_doc, read_json, require, write_json
from .errors import (
    DimensionMismatchError,
    LevelCapacityError,
    PyramidStructureError,
    SchemaError,
    UnknownWaveletError,
    VersionError,
)
from .imagery import GrayImage

SYMMETRIC = "symmetric"
PERIODIC = "periodic"
_MODE_ALIASES = {"symmetric": SYMMETRIC, "sym": SYMMETRIC, "periodic": PERIODIC, "per": PERIODIC}

PYRAMID_FORMAT = "wavefuse.pyramid"
PYRAMID_VERSION = 1


def normalize_mode(mode: str) -> str:
    try:
        return _MODE_ALIASES[mode]
    except KeyError:
        raise ValueError(f"unknown boundary mode {mode!r} (use symmetric/sym or periodic/per)") from None


def _frozen(a):
    a = np.array(a, dtype=np.float64, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class FilterBank:
    name: str
    lo_d: np.ndarray
    hi_d: np.ndarray
    lo_r: np.ndarray
    hi_r: np.ndarray

    @property
    def length(self) -> int:
        return self.lo_d.shape[0]


def make_filter_bank(name: str = "db2") -> FilterBank:
    """Build the orthogonal filter bank for ``name`` (only ``db2`` is known).

    ``lo_d`` is the 4-tap Daubechies scaling filter in ascending-power order
    ending with the largest tap; ``hi_d[k] = (-1)**k * lo_d[L-1-k]`` and the
    reconstruction filters are the time reverses.
    """
    if name != "db2":
        raise UnknownWaveletError(f"unknown wavelet {name!r}; supported: db2")
    r3 = math.sqrt(3.0)
    scale = 4.0 * math.sqrt(2.0)
    lo_d = np.array([1.0 - r3, 3.0 - r3, 3.0 + r3, 1.0 + r3]) / scale
    L = lo_d.shape[0]
    hi_d = np.array([(-1) ** k * lo_d[L - 1 - k] for k in range(L)])
    return FilterBank(name, _frozen(lo_d), _frozen(hi_d), _frozen(lo_d[::-1]), _frozen(hi_d[::-1]))


def subband_length(n: int, mode: str, filter_length: int = 4) -> int:
    mode = normalize_mode(mode)
    if mode == SYMMETRIC:
        return (n + filter_length - 1) // 2
    return (n + 1) // 2


def extend_signal(signal, mode: str, pad: int) -> np.ndarray:
    """Pad a 1D signal on both sides.

    ``symmetric`` reflects about the half-sample point, repeating the edge
    sample; ``periodic`` wraps cyclically.
    """
    x = np.asarray(signal, dtype=np.float64)
    mode = normalize_mode(mode)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("extend_signal needs a non-empty 1D sequence")
    if pad < 0:
        raise ValueError(f"pad must be >= 0, got {pad}")
    if mode == SYMMETRIC:
        if pad > x.size:
            raise ValueError(f"symmetric pad {pad} exceeds signal length {x.size}")
        return np.pad(x, pad, mode="symmetric")
    return np.pad(x, pad, mode="wrap")


def _min_length(mode, L):
    return max(2, L - 1) if mode == SYMMETRIC else 2


def _analyze_rows(x, bank, mode):
    L = bank.length
    n = x.shape[1]
    if mode == SYMMETRIC:
        ext = np.pad(x, ((0, 0), (L - 1, L - 1)), mode="symmetric")
        m = (n + L - 1) // 2
    else:
        if n % 2:
            x = np.concatenate([x, x[:, -1:]], axis=1)
        ext = np.pad(x, ((0, 0), (L - 1, L - 1)), mode="wrap")
        m = x.shape[1] // 2
    return kernels.filter_down(np.ascontiguousarray(ext), bank.lo_d, bank.hi_d, L, m)


def _synthesize_rows(a, d, bank, mode, n):
    L = bank.length
    m = a.shape[1]
    if a.shape != d.shape:
        raise DimensionMismatchError(f"approx {a.shape} and detail {d.shape} differ")
    if m != subband_length(n, mode, L):
        raise DimensionMismatchError(
            f"target length {n} inconsistent with {m} coefficients in {mode} mode")
    z = kernels.upsample_filter(np.ascontiguousarray(a), np.ascontiguousarray(d), bank.lo_r, bank.hi_r)
    if mode == SYMMETRIC:
        return z[:, L - 2:L - 2 + n]
    n_even = n + n % 2
    y = np.zeros((a.shape[0], n_even))
    for t in range(z.shape[1]):
        y[:, (t - (L - 2)) % n_even] += z[:, t]
    return y[:, :n]


def analyze_1d(signal, bank: FilterBank, mode: str = SYMMETRIC):
    """Single-level 1D analysis; returns ``(approx, detail)``."""
    x = np.asarray(signal, dtype=np.float64)
    mode = normalize_mode(mode)
    if x.ndim != 1 or x.size < _min_length(mode, bank.length):
        raise ValueError(f"signal too short for {mode} analysis: length {x.size}")
    a, d = _analyze_rows(x[None, :], bank, mode)
    return a[0], d[0]


def synthesize_1d(approx, detail, bank: FilterBank, mode: str, target_len: int) -> np.ndarray:
    a = np.asarray(approx, dtype=np.float64)
    d = np.asarray(detail, dtype=np.float64)
    if a.shape != d.shape:
        raise DimensionMismatchError(f"approx length {a.size} != detail length {d.size}")
    return _synthesize_rows(a[None, :], d[None, :], bank, normalize_mode(mode), target_len)[0]


@dataclass(frozen=True, eq=False)
class SubbandQuad:
    ca: np.ndarray
    ch: np.ndarray
    cv: np.ndarray
    cd: np.ndarray

    def __post_init__(self):
        shapes = {np.shape(self.ca), np.shape(self.ch), np.shape(self.cv), np.shape(self.cd)}
        if len(shapes) != 1:
            raise DimensionMismatchError(f"subband dims differ: {sorted(shapes)}")

    @property
    def dims(self):
        return self.ca.shape


class Details(NamedTuple):
    ch: np.ndarray
    cv: np.ndarray
    cd: np.ndarray


def dwt2_step(x, bank: FilterBank, mode: str = SYMMETRIC) -> SubbandQuad:
    x = np.asarray(x, dtype=np.float64)
    mode = normalize_mode(mode)
    need = _min_length(mode, bank.length)
    if x.ndim != 2 or x.shape[0] < need or x.shape[1] < need:
        raise DimensionMismatchError(f"dwt2 needs at least {need}x{need} input in {mode} mode, got {x.shape}")
    lo_rows, hi_rows = _analyze_rows(x, bank, mode)
    ca, ch = _analyze_rows(np.ascontiguousarray(lo_rows.T), bank, mode)
    cv, cd = _analyze_rows(np.ascontiguousarray(hi_rows.T), bank, mode)
    return SubbandQuad(ca.T.copy(), ch.T.copy(), cv.T.copy(), cd.T.copy())


def idwt2_step(quad: SubbandQuad, bank: FilterBank, mode: str, target_dims) -> np.ndarray:
    mode = normalize_mode(mode)
    rows, cols = target_dims
    expect = (subband_length(rows, mode, bank.length), subband_length(cols, mode, bank.length))
    if quad.dims != expect:
        raise DimensionMismatchError(
            f"subbands {quad.dims[0]}x{quad.dims[1]} cannot reconstruct {rows}x{cols} "
            f"(expected {expect[0]}x{expect[1]})")
    lo_rows = _synthesize_rows(quad.ca.T, quad.ch.T, bank, mode, rows).T
    hi_rows = _synthesize_rows(quad.cv.T, quad.cd.T, bank, mode, rows).T
    return _synthesize_rows(np.ascontiguousarray(lo_rows), np.ascontiguousarray(hi_rows), bank, mode, cols)


@dataclass(frozen=True, eq=False)
class DecompositionPyramid:
    """Level-J approximation plus detail triples for levels 1..J.

    ``original_dims[j]`` is the shape of the array that was split at level
    ``j + 1`` (the image itself for level 1).
    """

    approximation: np.ndarray
    details: tuple
    original_dims: tuple
    boundary_mode: str
    wavelet_name: str

    @property
    def levels(self) -> int:
        return len(self.details)

    def arrays(self):
        """Every coefficient matrix: approximation first, then ch, cv, cd per level."""
        out = [self.approximation]
        for det in self.details:
            out.extend(det)
        return out

    def energy(self) -> float:
        return float(sum(np.sum(a * a) for a in self.arrays()))


def _as_array(image):
    if isinstance(image, GrayImage):
        return image.pixels
    return np.asarray(image, dtype=np.float64)


def decompose(image, bank: FilterBank, mode: str = SYMMETRIC, levels: int = 5) -> DecompositionPyramid:
    """Apply ``dwt2_step`` ``levels`` times to successive approximations."""
    mode = normalize_mode(mode)
    if levels < 1:
        raise ValueError(f"levels must be >= 1, got {levels}")
    current = _as_array(image)
    need = _min_length(mode, bank.length)
    details, dims = [], []
    for level in range(1, levels + 1):
        if current.shape[0] < need or current.shape[1] < need:
            raise LevelCapacityError(level, current.shape)
        quad = dwt2_step(current, bank, mode)
        dims.append(tuple(current.shape))
        details.append(Details(quad.ch, quad.cv, quad.cd))
        current = quad.ca
    return DecompositionPyramid(current, tuple(details), tuple(dims), mode, bank.name)


def check_pyramid(pyramid: DecompositionPyramid, filter_length: int = 4) -> None:
    """Raise ``PyramidStructureError`` unless the dims chain is consistent."""
    J = pyramid.levels
    if J < 1 or len(pyramid.original_dims) != J:
        raise PyramidStructureError(f"{J} detail levels but {len(pyramid.original_dims)} recorded dims")
    mode = pyramid.boundary_mode
    for j in range(J):
        rows, cols = pyramid.original_dims[j]
        sub = (subband_length(rows, mode, filter_length), subband_length(cols, mode, filter_length))
        for name, arr in zip(("ch", "cv", "cd"), pyramid.details[j]):
            if np.shape(arr) != sub:
                raise PyramidStructureError(
                    f"level {j + 1} {name} has dims {np.shape(arr)}, expected {sub} from input {rows}x{cols}")
        nxt = pyramid.original_dims[j + 1] if j + 1 < J else np.shape(pyramid.approximation)
        if tuple(nxt) != sub:
            raise PyramidStructureError(f"dims chain broken after level {j + 1}: {tuple(nxt)} != {sub}")


def reconstruct(pyramid: DecompositionPyramid, bank: FilterBank | None = None) -> GrayImage:
    if bank is None:
        bank = make_filter_bank(pyramid.wavelet_name)
    elif bank.name != pyramid.wavelet_name:
        raise PyramidStructureError(f"pyramid built with {pyramid.wavelet_name!r}, bank is {bank.name!r}")
    check_pyramid(pyramid, bank.length)
    current = pyramid.approximation
    for j in range(pyramid.levels - 1, -1, -1):
        ch, cv, cd = pyramid.details[j]
        current = idwt2_step(SubbandQuad(current, ch, cv, cd), bank, pyramid.boundary_mode,
                             pyramid.original_dims[j])
    return GrayImage(current)


def zero_approximation(pyramid: DecompositionPyramid) -> DecompositionPyramid:
    """Copy of ``pyramid`` with the coarsest approximation set to zero."""
    return replace(pyramid, approximation=np.zeros_like(pyramid.approximation))


def pyramid_to_doc(pyramid: DecompositionPyramid) -> dict:
    return {
        "format": PYRAMID_FORMAT,
        "version": PYRAMID_VERSION,
        "wavelet_name": pyramid.wavelet_name,
        "boundary_mode": pyramid.boundary_mode,
        "levels": pyramid.levels,
        "original_dims": [list(map(int, d)) for d in pyramid.original_dims],
        "approximation": matrix_to_doc(pyramid.approximation),
        "details": [
            {"level": j + 1, "ch": matrix_to_doc(det.ch), "cv": matrix_to_doc(det.cv), "cd": matrix_to_doc(det.cd)}
            for j, det in enumerate(pyramid.details)
        ],
    }


def pyramid_from_doc(doc: dict) -> DecompositionPyramid:
    where = "pyramid document"
    if require(doc, "format", where) != PYRAMID_FORMAT:
        raise SchemaError(f"{where}: format is {doc['format']!r}, expected {PYRAMID_FORMAT!r}")
    if require(doc, "version", where) != PYRAMID_VERSION:
        raise VersionError(doc["version"], PYRAMID_VERSION)
    details = []
    for j, entry in enumerate(require(doc, "details", where)):
        details.append(Details(*(matrix_from_doc(require(entry, k, f"details[{j}]"), f"details[{j}].{k}")
                                 for k in ("ch", "cv", "cd"))))
    pyramid = DecompositionPyramid(
        approximation=matrix_from_doc(require(doc, "approximation", where), "approximation"),
        details=tuple(details),
        original_dims=tuple(tuple(int(v) for v in d) for d in require(doc, "original_dims", where)),
        boundary_mode=normalize_mode(require(doc, "boundary_mode", where)),
        wavelet_name=require(doc, "wavelet_name", where),
    )
    if require(doc, "levels", where) != pyramid.levels:
        raise SchemaError(f"{where}: levels={doc['levels']} but {pyramid.levels} detail entries")
    check_pyramid(pyramid, make_filter_bank(pyramid.wavelet_name).length)
    return pyramid


def save_pyramid(pyramid: DecompositionPyramid, path) -> None:
    write_json(pyramid_to_doc(pyramid), path)


def load_pyramid(path) -> DecompositionPyramid:
    return pyramid_from_doc(read_json(path))
