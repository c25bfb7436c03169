"""Connected components, box crossings, and proof-construction certificates.

Component labeling is a union-find with path compression over the 4-connected
grid graph, attaching larger roots under smaller ones; the final root of a
component is therefore its first cell in row-major order, which makes the
label numbering deterministic. Crossing detection uses a stack flood fill
with early exit.

The certificate operations encode sup/inf events on the 1D component paths
whose truth implies a geometric statement about the 2D excursion set
(a blocked rectangle, a guaranteed crossing path, a precluded crossing).
`verify_blocking` re-checks the implication exhaustively on the sampled
grid; a false result from a valid certificate falsifies the construction
and is treated as a hard failure by the harness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import DomainError, EmptyMask, IntervalOutOfRange, OutOfBounds
from .field import AdditiveField, ExcursionMask, excursion_mask
from .kernels import Grid1D
from .sampler import ProcessPath

LEFTRIGHT = "leftright"
TOPBOTTOM = "topbottom"


@dataclass(frozen=True, eq=False)
class ComponentLabels:
    """4-connected component labeling of an excursion mask.

    labels is int32 with 0 for cells outside the set and 1..component_count
    in row-major first-touch order otherwise. touches_boundary[k] is True
    when component k reaches the window border (the bounded-window proxy
    for an unbounded component).
    """

    labels: np.ndarray
    component_count: int
    touches_boundary: np.ndarray


@dataclass(frozen=True)
class BlockingCertificate:
    """Witness rectangle R = [a1, b1] x [a2, b2] (grid indices) on whose
    boundary the field is positive, certified at threshold s."""

    a1: int
    b1: int
    a2: int
    b2: int
    threshold_s: float
    valid: bool


@njit(cache=True)
def _label_impl(bits):
    h, w = bits.shape
    n = h * w
    parent = np.empty(n, dtype=np.int32)
    for i in range(n):
        parent[i] = i
    for y in range(h):
        base = y * w
        for x in range(w):
            if not bits[y, x]:
                continue
            idx = base + x
            if x + 1 < w and bits[y, x + 1]:
                a = idx
                while parent[a] != a:
                    a = parent[a]
                b = idx + 1
                while parent[b] != b:
                    b = parent[b]
                if a < b:
                    parent[b] = a
                elif b < a:
                    parent[a] = b
            if y + 1 < h and bits[y + 1, x]:
                a = idx
                while parent[a] != a:
                    a = parent[a]
                b = idx + w
                while parent[b] != b:
                    b = parent[b]
                if a < b:
                    parent[b] = a
                elif b < a:
                    parent[a] = b
    labels = np.zeros((h, w), dtype=np.int32)
    count = 0
    for y in range(h):
        base = y * w
        for x in range(w):
            if not bits[y, x]:
                continue
            idx = base + x
            r = idx
            while parent[r] != r:
                r = parent[r]
            c = idx
            while parent[c] != r:
                nxt = parent[c]
                parent[c] = r
                c = nxt
            if r == idx:
                count += 1
                labels[y, x] = count
            else:
                labels[y, x] = labels[r // w, r % w]
    return labels, count


@njit(cache=True)
def _flood_leftright(bits, conn8):
    """True iff a (4- or 8-connected) path of True cells joins the first
    and last columns."""
    h, w = bits.shape
    if w == 1:
        for y in range(h):
            if bits[y, 0]:
                return True
        return False
    seen = np.zeros((h, w), dtype=np.bool_)
    stack = np.empty(h * w, dtype=np.int32)
    top = 0
    for y in range(h):
        if bits[y, 0]:
            seen[y, 0] = True
            stack[top] = y * w
            top += 1
    while top > 0:
        top -= 1
        idx = stack[top]
        y = idx // w
        x = idx - y * w
        if x == w - 1:
            return True
        y_lo = y - 1 if y > 0 else 0
        y_hi = y + 1 if y + 1 < h else h - 1
        x_lo = x - 1 if x > 0 else 0
        x_hi = x + 1 if x + 1 < w else w - 1
        for ny in range(y_lo, y_hi + 1):
            for nx in range(x_lo, x_hi + 1):
                if not conn8 and ny != y and nx != x:
                    continue
                if (ny != y or nx != x) and bits[ny, nx] and not seen[ny, nx]:
                    seen[ny, nx] = True
                    stack[top] = ny * w + nx
                    top += 1
    return False


def label_components(mask: ExcursionMask) -> ComponentLabels:
    """Union-find labeling of the mask's 4-connected True components."""
    if mask.bits.size == 0:
        raise EmptyMask("mask has no cells")
    labels, count = _label_impl(mask.bits)
    touches = np.zeros(count + 1, dtype=bool)
    for border in (labels[0, :], labels[-1, :], labels[:, 0], labels[:, -1]):
        touches[border] = True
    touches[0] = False
    return ComponentLabels(
        labels=labels, component_count=count, touches_boundary=touches
    )


def has_crossing(
    mask: ExcursionMask, direction: str, connectivity: int = 4
) -> bool:
    """True iff one True component joins the window's opposite sides.

    direction "leftright" joins the first and last columns, "topbottom"
    the first and last rows. connectivity 8 is used for the complement in
    planar duality checks; the excursion set itself is always 4-connected.
    """
    if mask.bits.size == 0:
        raise EmptyMask("mask has no cells")
    if connectivity not in (4, 8):
        raise OutOfBounds("connectivity must be 4 or 8")
    if direction == LEFTRIGHT:
        bits = mask.bits
    elif direction == TOPBOTTOM:
        bits = np.ascontiguousarray(mask.bits.T)
    else:
        raise OutOfBounds(f"direction must be leftright or topbottom, got {direction!r}")
    return bool(_flood_leftright(bits, connectivity == 8))


def grid_index(grid: Grid1D, t: float) -> int:
    """Nearest grid index to time t, rounding half toward -inf."""
    u = (t - grid.origin) / grid.eps
    return int(math.ceil(u - 0.5))


def _segment(path: ProcessPath, lo: float, hi: float) -> tuple[np.ndarray, int]:
    """Values over the grid-rounded interval [lo, hi], plus start index."""
    i0 = grid_index(path.grid, lo)
    i1 = grid_index(path.grid, hi)
    if not (0 <= i0 <= i1 < path.grid.count):
        raise IntervalOutOfRange(
            f"[{lo}, {hi}] maps to indices [{i0}, {i1}] outside the grid"
        )
    return path.values[i0 : i1 + 1], i0


def _variance_of(path: ProcessPath) -> float:
    return path.kernel.variance


def blocking_axis_conditions(
    path: ProcessPath, extent: float, s: float
) -> tuple[int, int] | None:
    """One axis of the blocking event: sup > s on [-2E,-E] and [E,2E],
    inf > -s on [-2E,2E], over grid points.

    Returns the two argmax indices (ties break to the smallest index) when
    all three conditions hold, None otherwise.
    """
    left, i_left = _segment(path, -2.0 * extent, -extent)
    right, i_right = _segment(path, extent, 2.0 * extent)
    full, _ = _segment(path, -2.0 * extent, 2.0 * extent)
    if left.max() > s and right.max() > s and full.min() > -s:
        return i_left + int(left.argmax()), i_right + int(right.argmax())
    return None


def find_blocking_rectangle(
    g1: ProcessPath, g2: ProcessPath, t: float, tau: float, s: float
) -> BlockingCertificate | None:
    """Search for a blocking rectangle around [-T, T] x [-tau, tau].

    Tests the six sup/inf conditions at threshold s: each process must
    exceed s on both outer intervals ([-2T,-T] and [T,2T], tau-scaled for
    the second axis) while staying above -s throughout. On success the
    rectangle spanned by the four argmax indices (ties break to the
    smallest index) has f > 0 on its entire grid boundary, which the
    returned certificate asserts after an explicit min-based boundary
    check equivalent to evaluating f at every boundary grid point.
    """
    if not (t > 0 and tau > 0):
        raise DomainError("rectangle scales must be positive")
    axis1 = blocking_axis_conditions(g1, t, s)
    axis2 = blocking_axis_conditions(g2, tau, s)
    if axis1 is None or axis2 is None:
        return None
    a1, b1 = axis1
    a2, b2 = axis2
    # f > 0 on the boundary: each edge's minimum over the transverse axis.
    m1 = float(g1.values[a1 : b1 + 1].min())
    m2 = float(g2.values[a2 : b2 + 1].min())
    boundary_positive = (
        g1.values[a1] + m2 > 0
        and g1.values[b1] + m2 > 0
        and g2.values[a2] + m1 > 0
        and g2.values[b2] + m1 > 0
    )
    if not boundary_positive:
        return None
    return BlockingCertificate(
        a1=a1, b1=b1, a2=a2, b2=b2, threshold_s=s, valid=True
    )


def verify_blocking(field: AdditiveField, cert: BlockingCertificate) -> bool:
    """Machine-check the blocking implication on the sampled grid.

    Recomputes, from the raw field values, that f > 0 at every grid point
    of the rectangle boundary and that no component of {f <= 0} inside the
    rectangle connects the strict interior to the boundary ring. The check
    ignores cert.valid: it re-derives the claim. A certificate produced by
    find_blocking_rectangle must always verify; anything else is a
    soundness violation.
    """
    g1, g2 = field.components[0], field.components[1]
    if not (0 <= cert.a1 < cert.b1 < g1.grid.count):
        raise OutOfBounds("certificate x-range outside grid")
    if not (0 <= cert.a2 < cert.b2 < g2.grid.count):
        raise OutOfBounds("certificate y-range outside grid")
    window = (cert.a1, cert.b1 + 1, cert.a2, cert.b2 + 1)
    mask = excursion_mask(field, 0.0, window)
    bits = mask.bits
    boundary_clear = not bool(
        bits[0, :].any() or bits[-1, :].any() or bits[:, 0].any() or bits[:, -1].any()
    )
    labeled = label_components(mask)
    lab = labeled.labels
    ring = np.concatenate([lab[0, :], lab[-1, :], lab[:, 0], lab[:, -1]])
    ring_labels = np.unique(ring[ring > 0])
    if ring_labels.size == 0:
        interior_disconnected = True
    else:
        interior_disconnected = not bool(
            np.isin(lab[1:-1, 1:-1], ring_labels).any()
        )
    return boundary_clear and interior_disconnected


def certificate_block_AT(g1: ProcessPath, g2: ProcessPath, t: float) -> bool:
    """Double sup/inf event on [0, T] that precludes a level-0 crossing.

    True iff each process exceeds its L_T = sqrt(2 K(0) log T) somewhere on
    [0, T] while staying above -L_T. When the two variances are equal the
    argmax column and row of the field are then strictly positive, so no
    4-connected left-right path exists in {f <= 0} over [0, T]^2.
    """
    if not t > 1:
        raise DomainError("certificates use scales T > 1")
    seg1, _ = _segment(g1, 0.0, t)
    seg2, _ = _segment(g2, 0.0, t)
    l1 = math.sqrt(2.0 * _variance_of(g1) * math.log(t))
    l2 = math.sqrt(2.0 * _variance_of(g2) * math.log(t))
    return bool(
        seg1.max() > l1
        and seg1.min() > -l1
        and seg2.max() > l2
        and seg2.min() > -l2
    )


def certificate_path_BTh(
    g1: ProcessPath, g2: ProcessPath, t: float, h: float
) -> tuple[bool, float]:
    """Crossing-path event on [0, T] with window slack h.

    True iff sup g2 > L_2 - h/sqrt(log T) and inf g1 > -L_1 - h/sqrt(log T)
    over the grid points of [0, T]. When true, the row through argmax g2
    keeps f above the returned guaranteed level
    L_2 - L_1 - 2h/sqrt(log T), so a left-right path exists in
    {f > guaranteed_level} over [0, T]^2.
    """
    if not t > 1:
        raise DomainError("certificates use scales T > 1")
    seg1, _ = _segment(g1, 0.0, t)
    seg2, _ = _segment(g2, 0.0, t)
    c = h / math.sqrt(math.log(t))
    l1 = math.sqrt(2.0 * _variance_of(g1) * math.log(t))
    l2 = math.sqrt(2.0 * _variance_of(g2) * math.log(t))
    flag = bool(seg2.max() > l2 - c and seg1.min() > -l1 - c)
    return flag, l2 - l1 - 2.0 * c


def certificate_ladder_Sn(
    g1: ProcessPath,
    g2: ProcessPath,
    n: int,
    level: float,
    k1_0: float,
    k2_0: float,
) -> bool:
    """Ladder event at scale T_n = 2^n guaranteeing a crossing at -level.

    All four sup/inf conditions use the common threshold
    L = sqrt(2 K1(0) log(2 T_n)) with level/2 slack; the first process is
    tested over [0, 2 T_n], the second over [0, 2 tau(T_n)] with
    tau(T) = T^(K1(0)/K2(0)).
    """
    if n < 1:
        raise DomainError("ladder scales start at n = 1")
    if not (k1_0 > 0 and k2_0 > 0):
        raise DomainError("variances must be positive")
    t_n = 2.0**n
    tau_n = t_n ** (k1_0 / k2_0)
    big_l = math.sqrt(2.0 * k1_0 * math.log(2.0 * t_n))
    seg1, _ = _segment(g1, 0.0, 2.0 * t_n)
    seg2, _ = _segment(g2, 0.0, 2.0 * tau_n)
    slack = level / 2.0
    return bool(
        seg1.max() > big_l - slack
        and seg1.min() > -big_l - slack
        and seg2.max() > big_l - slack
        and seg2.min() > -big_l - slack
    )


__all__ = [
    "LEFTRIGHT",
    "TOPBOTTOM",
    "ComponentLabels",
    "BlockingCertificate",
    "label_components",
    "has_crossing",
    "grid_index",
    "blocking_axis_conditions",
    "find_blocking_rectangle",
    "verify_blocking",
    "certificate_block_AT",
    "certificate_path_BTh",
    "certificate_ladder_Sn",
]
