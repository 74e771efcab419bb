"""Coefficient-wise fusion of two decomposition pyramids."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import PyramidStructureError
from .imagery import GrayImage, conform_pair
from .wavelet import (
    SYMMETRIC,
    DecompositionPyramid,
    Details,
    FilterBank,
    decompose,
    make_filter_bank,
    reconstruct,
    zero_approximation,
)

SUBBANDS = ("ca", "ch", "cv", "cd")


@dataclass(frozen=True)
class FusionRule:
    """``average``, ``max_abs`` or ``weighted`` (weight applies to the first pyramid)."""

    variant: str = "average"
    weight: float | None = None

    def __post_init__(self):
        if self.variant not in ("average", "max_abs", "weighted"):
            raise ValueError(f"unknown fusion rule {self.variant!r}")
        if self.variant == "weighted":
            if self.weight is None or not 0.0 <= self.weight <= 1.0:
                raise ValueError(f"weighted rule needs 0 <= w <= 1, got {self.weight!r}")
        elif self.weight is not None:
            raise ValueError(f"{self.variant} rule takes no weight")

    def apply(self, a, b):
        if self.variant == "average":
            return (a + b) / 2.0
        if self.variant == "weighted":
            # equal inputs pass through untouched so self-fusion is exact
            return np.where(a == b, a, self.weight * a + (1.0 - self.weight) * b)
        # ties keep the first argument
        return np.where(np.abs(b) > np.abs(a), b, a)

    def __str__(self):
        if self.variant == "max_abs":
            return "maxabs"
        if self.variant == "weighted":
            return f"weighted:{self.weight!r}"
        return "average"


def parse_rule(text: str) -> FusionRule:
    """Parse the CLI spelling: ``average``, ``maxabs`` or ``weighted:<w>``."""
    text = text.strip()
    if text == "average":
        return FusionRule("average")
    if text in ("maxabs", "max_abs"):
        return FusionRule("max_abs")
    if text.startswith("weighted:"):
        try:
            w = float(text.split(":", 1)[1])
        except ValueError:
            raise ValueError(f"bad weight in rule {text!r}") from None
        return FusionRule("weighted", w)
    raise ValueError(f"unknown fusion rule {text!r} (use average, maxabs or weighted:<w>)")


def _check_compatible(p: DecompositionPyramid, q: DecompositionPyramid):
    for field in ("wavelet_name", "boundary_mode", "levels", "original_dims"):
        if getattr(p, field) != getattr(q, field):
            raise PyramidStructureError(
                f"pyramids differ in {field}: {getattr(p, field)!r} vs {getattr(q, field)!r}")
    if p.approximation.shape != q.approximation.shape:
        raise PyramidStructureError(
            f"pyramids differ in approximation dims: {p.approximation.shape} vs {q.approximation.shape}")
    for j, (dp, dq) in enumerate(zip(p.details, q.details)):
        for name, a, b in zip(Details._fields, dp, dq):
            if a.shape != b.shape:
                raise PyramidStructureError(
                    f"pyramids differ in level {j + 1} {name} dims: {a.shape} vs {b.shape}")


def fuse_pyramids(p: DecompositionPyramid, q: DecompositionPyramid,
                  rule: FusionRule | None = None, per_subband: dict | None = None) -> DecompositionPyramid:
    """Fuse two structurally identical pyramids coefficient by coefficient.

    ``per_subband`` optionally maps any of ``ca``/``ch``/``cv``/``cd`` to its
    own rule; subbands not listed use ``rule``.
    """
    rule = rule or FusionRule()
    rules = {name: rule for name in SUBBANDS}
    if per_subband:
        unknown = set(per_subband) - set(SUBBANDS)
        if unknown:
            raise ValueError(f"unknown subband keys {sorted(unknown)}")
        rules.update(per_subband)
    _check_compatible(p, q)
    details = tuple(
        Details(*(rules[name].apply(a, b) for name, a, b in zip(("ch", "cv", "cd"), dp, dq)))
        for dp, dq in zip(p.details, q.details)
    )
    return DecompositionPyramid(
        approximation=rules["ca"].apply(p.approximation, q.approximation),
        details=details,
        original_dims=p.original_dims,
        boundary_mode=p.boundary_mode,
        wavelet_name=p.wavelet_name,
    )


def fuse_images(visual: GrayImage, thermal: GrayImage, bank: FilterBank | None = None,
                mode: str = SYMMETRIC, levels: int = 5, rule: FusionRule | None = None,
                zero_ca: bool = False, per_subband: dict | None = None) -> GrayImage:
    """Decompose both images, fuse the pyramids and invert.

    With ``zero_ca`` the fused approximation is zeroed before reconstruction.
    """
    bank = bank or make_filter_bank("db2")
    conform_pair(visual, thermal, "strict")
    fused = fuse_pyramids(decompose(visual, bank, mode, levels), decompose(thermal, bank, mode, levels),
                          rule, per_subband)
    if zero_ca:
        fused = zero_approximation(fused)
    return reconstruct(fused, bank)
