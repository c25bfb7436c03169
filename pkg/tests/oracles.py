"""Independent reference implementations used to check production code.

Everything here is deliberately written from scratch against the
mathematical definitions (brute-force BFS, finite differences,
quadrature), not by calling the production paths it checks.
"""

from __future__ import annotations

from collections import deque

import numpy as np
from scipy.integrate import quad


def bfs_label(bits: np.ndarray) -> tuple[np.ndarray, int]:
    """4-connected labeling by BFS, labels in row-major first-touch order."""
    h, w = bits.shape
    labels = np.zeros((h, w), dtype=np.int32)
    count = 0
    for y0 in range(h):
        for x0 in range(w):
            if not bits[y0, x0] or labels[y0, x0] != 0:
                continue
            count += 1
            queue = deque([(y0, x0)])
            labels[y0, x0] = count
            while queue:
                y, x = queue.popleft()
                for dy, dx in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                    ny, nx = y + dy, x + dx
                    if 0 <= ny < h and 0 <= nx < w and bits[ny, nx] and labels[ny, nx] == 0:
                        labels[ny, nx] = count
                        queue.append((ny, nx))
    return labels, count


def bfs_crossing(bits: np.ndarray, leftright: bool, conn8: bool = False) -> bool:
    """BFS reachability between opposite sides of the window."""
    h, w = bits.shape
    if leftright:
        starts = [(y, 0) for y in range(h) if bits[y, 0]]
        goal = w - 1
        axis = 1
    else:
        starts = [(0, x) for x in range(w) if bits[0, x]]
        goal = h - 1
        axis = 0
    seen = np.zeros((h, w), dtype=bool)
    queue = deque()
    for y, x in starts:
        seen[y, x] = True
        queue.append((y, x))
    if conn8:
        steps = [(dy, dx) for dy in (-1, 0, 1) for dx in (-1, 0, 1) if (dy, dx) != (0, 0)]
    else:
        steps = [(1, 0), (-1, 0), (0, 1), (0, -1)]
    while queue:
        y, x = queue.popleft()
        if (x if axis == 1 else y) == goal:
            return True
        for dy, dx in steps:
            ny, nx = y + dy, x + dx
            if 0 <= ny < h and 0 <= nx < w and bits[ny, nx] and not seen[ny, nx]:
                seen[ny, nx] = True
                queue.append((ny, nx))
    return False


def second_derivative_fd(f, x0: float, h: float) -> float:
    """Central second difference, Richardson-extrapolated (h and h/2)."""
    d_h = (f(x0 + h) - 2.0 * f(x0) + f(x0 - h)) / (h * h)
    h2 = h / 2.0
    d_h2 = (f(x0 + h2) - 2.0 * f(x0) + f(x0 - h2)) / (h2 * h2)
    return (4.0 * d_h2 - d_h) / 3.0


def gumbel_density(x: float) -> float:
    return np.exp(-x - np.exp(-x))


def gumbel_above_quad(c: float) -> float:
    """P(G > c) by quadrature of the Gumbel density."""
    value, _ = quad(gumbel_density, c, np.inf)
    return value


def gumbel_below_quad(c: float) -> float:
    value, _ = quad(gumbel_density, -np.inf, c)
    return value


# frozen outputs of the seed-derivation mixing function, computed directly
# from its definition (64-bit mix of master XOR stream*0x9E3779B97F4A7C15);
# the (0, 1) entry matches the published SplitMix64 test vector
DERIVE_SEED_VECTORS = {
    (0, 0): 0,
    (0, 1): 0xE220A8397B1DCDAF,
    (12345, 7): 10626447662073903133,
    (2**64 - 1, 2**64 - 1): 16490336266968443936,
}
