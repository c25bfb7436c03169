"""Additive fields, excursion masks, and nodal-domain rendering.

A field is stored as its 1D component paths only; the d-dimensional array
it defines is never materialized. For an N x N window that is O(N) memory
instead of O(N^2), which is what makes 10^4-cell-wide windows cheap.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, EmptyMask, IoFailure, OutOfBounds
from .sampler import ProcessPath

MASK_MAGIC = b"ANM1"

# window = (i0, i1, j0, j1): half-open index ranges into the first (x) and
# second (y) component grids.
Window = tuple[int, int, int, int]


@dataclass(frozen=True)
class AdditiveField:
    """f(x_1..x_d) = sum_k components[k].values[x_k], d >= 2."""

    components: tuple[ProcessPath, ...]

    def __post_init__(self) -> None:
        if len(self.components) < 2:
            raise DomainError("additive field needs at least two components")

    @property
    def dim(self) -> int:
        return len(self.components)


@dataclass(frozen=True, eq=False)
class ExcursionMask:
    """Boolean grid of {f <= level} over a window.

    bits has shape (height, width); bits[j, i] is True where
    g1[i] + g2[j] <= level (i indexes the x axis, j the y axis).
    """

    width: int
    height: int
    level: float
    bits: np.ndarray

    def __post_init__(self) -> None:
        if self.bits.shape != (self.height, self.width):
            raise DomainError("bits shape must be (height, width)")
        self.bits.flags.writeable = False


def field_value(field: AdditiveField, index: tuple[int, ...]) -> float:
    """Exact field value at a grid index tuple."""
    if len(index) != field.dim:
        raise OutOfBounds(f"index has {len(index)} axes, field has {field.dim}")
    total = 0.0
    for k, i in enumerate(index):
        values = field.components[k].values
        if not 0 <= i < len(values):
            raise OutOfBounds(f"axis {k}: index {i} outside [0, {len(values)})")
        total += float(values[i])
    return total


def excursion_mask(
    field: AdditiveField, level: float, window: Window | None = None
) -> ExcursionMask:
    """Materialize {f <= level} for a 2-component field over a window."""
    if field.dim != 2:
        raise DomainError("excursion masks are defined for planar fields")
    g1 = field.components[0].values
    g2 = field.components[1].values
    if window is None:
        window = (0, len(g1), 0, len(g2))
    i0, i1, j0, j1 = window
    if not (0 <= i0 < i1 <= len(g1) and 0 <= j0 < j1 <= len(g2)):
        raise OutOfBounds(f"window {window} outside grids")
    bits = np.add.outer(g2[j0:j1], g1[i0:i1]) <= level
    return ExcursionMask(width=i1 - i0, height=j1 - j0, level=level, bits=bits)


def mask_from_bits(bits: np.ndarray, level: float) -> ExcursionMask:
    """Wrap an explicit boolean grid (tests, complement constructions)."""
    bits = np.array(bits, dtype=bool)  # own copy; masks freeze their bits
    return ExcursionMask(
        width=bits.shape[1], height=bits.shape[0], level=level, bits=bits
    )


def area_fraction(mask: ExcursionMask) -> float:
    """Fraction of cells inside the excursion set."""
    n = mask.bits.size
    if n == 0:
        raise EmptyMask("mask has no cells")
    return float(np.count_nonzero(mask.bits)) / n


def render_pgm(mask: ExcursionMask, destination) -> None:
    """Write a binary PGM: excursion cells black (0), the rest white (255).

    Format is byte-exact: header "P5\\n<width> <height>\\n255\\n" followed
    by row-major pixel bytes, so identical masks give identical files.
    """
    if mask.bits.size == 0:
        raise EmptyMask("mask has no cells")
    header = f"P5\n{mask.width} {mask.height}\n255\n".encode("ascii")
    pixels = np.where(mask.bits, 0, 255).astype(np.uint8)
    try:
        with open(destination, "wb") as fh:
            fh.write(header)
            fh.write(pixels.tobytes())
    except OSError as exc:
        raise IoFailure(str(exc)) from exc


def dump_mask(mask: ExcursionMask, destination) -> None:
    """Binary mask dump: "ANM1", u32 width, u32 height, f64 level, then the
    row-major bits packed 8 cells per byte, MSB first."""
    import struct

    header = struct.pack("<4sIId", MASK_MAGIC, mask.width, mask.height, mask.level)
    packed = np.packbits(mask.bits.reshape(-1))
    try:
        with open(destination, "wb") as fh:
            fh.write(header)
            fh.write(packed.tobytes())
    except OSError as exc:
        raise IoFailure(str(exc)) from exc


def load_mask(source) -> ExcursionMask:
    """Read a dump_mask file back."""
    import struct

    try:
        with open(source, "rb") as fh:
            blob = fh.read()
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    magic, width, height, level = struct.unpack_from("<4sIId", blob)
    if magic != MASK_MAGIC:
        raise IoFailure(f"bad magic {magic!r}")
    packed = np.frombuffer(blob, dtype=np.uint8, offset=20)
    bits = np.unpackbits(packed, count=width * height).astype(bool)
    return mask_from_bits(bits.reshape(height, width), level)


__all__ = [
    "AdditiveField",
    "ExcursionMask",
    "Window",
    "field_value",
    "excursion_mask",
    "mask_from_bits",
    "area_fraction",
    "render_pgm",
    "dump_mask",
    "load_mask",
    "MASK_MAGIC",
]
