"""Exact sampling of stationary Gaussian processes on uniform grids.

The sampler embeds the covariance into a circulant matrix diagonalized by
the DFT and synthesizes the path from its spectrum, so the finite-
dimensional covariance of the returned vector is exact (up to clamping of
sub-tolerance negative eigenvalues). Randomness comes from a counter-based
Philox stream keyed by a 64-bit seed, with normals produced by the inverse
CDF; the draw count per path is fixed, so results are reproducible across
platforms and independent of scheduling.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import ndtri

from .errors import InvalidGrid, IoFailure, MixedInputs
from .kernels import Grid1D, KernelSpec, circulant_eigenvalues

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15

PATH_MAGIC = b"ANF1"


def derive_seed(master: int, stream: int) -> int:
    """Per-stream seed: SplitMix64 finalizer of master XOR stream*golden.

    Bit-exact across platforms. For a fixed master the map stream -> seed
    is a bijection on 64-bit integers, so distinct streams never collide.
    """
    z = (master ^ ((stream * _GOLDEN) & _MASK64)) & _MASK64
    z ^= z >> 30
    z = (z * 0xBF58476D1CE4E5B9) & _MASK64
    z ^= z >> 27
    z = (z * 0x94D049BB133111EB) & _MASK64
    z ^= z >> 31
    return z


@dataclass(frozen=True, eq=False)
class ProcessPath:
    """One sampled realization of a stationary Gaussian process."""

    grid: Grid1D
    values: np.ndarray
    kernel: KernelSpec
    seed: int
    clamped_mass: float = 0.0

    def __post_init__(self) -> None:
        if len(self.values) != self.grid.count:
            raise InvalidGrid("values length must equal grid.count")
        self.values.flags.writeable = False


@lru_cache(maxsize=128)
def _spectral_factors(spec: KernelSpec, grid: Grid1D):
    """Cached per-(kernel, grid) spectral data for path synthesis.

    Returns (amp0, amp_half, amp_pairs, M, clamped_mass) where amp_* are
    the standard deviations of the Hermitian spectral coefficients:
    amp0 for frequency 0, amp_half for M/2, amp_pairs (length M/2-1) for
    the conjugate pairs.
    """
    eigs = circulant_eigenvalues(spec, grid)
    clamped_mass = float(-eigs[eigs < 0].sum()) + 0.0  # +0.0 avoids -0.0
    lam = np.maximum(eigs, 0.0)
    m = eigs.shape[0]
    half = m // 2
    amp0 = float(np.sqrt(lam[0]))
    amp_half = float(np.sqrt(lam[half]))
    amp_pairs = np.sqrt(lam[1:half] / 2.0)
    amp_pairs.flags.writeable = False
    return amp0, amp_half, amp_pairs, m, clamped_mass


def _standard_normals(seed: int, n: int) -> np.ndarray:
    """n inverse-CDF normals from the Philox counter stream keyed by seed."""
    raw = np.random.Philox(key=seed).random_raw(n)
    # (raw >> 11 + 1/2) * 2^-53 is uniform on (0,1), never exactly 0 or 1.
    u = ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53
    return ndtri(u)


def sample_path(spec: KernelSpec, grid: Grid1D, seed: int) -> ProcessPath:
    """Draw one centred Gaussian path with Cov[v_i, v_j] = K((i-j) eps).

    Deterministic in (spec, grid, seed). Consumes exactly M Philox draws,
    where M = embedding_size(grid.count).
    """
    if grid.count < 2:
        raise InvalidGrid("grid needs at least two points")
    amp0, amp_half, amp_pairs, m, clamped_mass = _spectral_factors(spec, grid)
    z = _standard_normals(seed, m)
    half = m // 2
    coeffs = np.empty(half + 1, dtype=np.complex128)
    coeffs[0] = amp0 * z[0]
    coeffs[half] = amp_half * z[1]
    coeffs[1:half] = amp_pairs * (z[2::2] + 1j * z[3::2])
    values = np.sqrt(m) * np.fft.irfft(coeffs, n=m)[: grid.count]
    return ProcessPath(
        grid=grid, values=values, kernel=spec, seed=seed, clamped_mass=clamped_mass
    )


def empirical_covariance(paths: list[ProcessPath], lag: int) -> float:
    """Replicate-and-space averaged product estimate of K(lag*eps)."""
    if not paths:
        raise MixedInputs("need at least one path")
    grid, kernel = paths[0].grid, paths[0].kernel
    for p in paths:
        if p.grid != grid or p.kernel != kernel:
            raise MixedInputs("paths mix grids or kernels")
    if not 0 <= lag < grid.count:
        raise MixedInputs(f"lag {lag} outside grid of {grid.count} points")
    n = grid.count - lag
    total = 0.0
    for p in paths:
        v = p.values
        total += float(np.dot(v[: grid.count - lag], v[lag:])) / n
    return total / len(paths)


def dump_path(path: ProcessPath, destination) -> None:
    """Binary little-endian dump: "ANF1", u64 seed, u64 count, f64 origin,
    f64 eps, then count f64 values."""
    header = struct.pack(
        "<4sQQdd",
        PATH_MAGIC,
        path.seed,
        path.grid.count,
        path.grid.origin,
        path.grid.eps,
    )
    payload = header + path.values.astype("<f8").tobytes()
    try:
        with open(destination, "wb") as fh:
            fh.write(payload)
    except OSError as exc:
        raise IoFailure(str(exc)) from exc


def load_path(source, kernel: KernelSpec) -> ProcessPath:
    """Read a dump_path file back (kernel identity is not stored on disk)."""
    try:
        with open(source, "rb") as fh:
            blob = fh.read()
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    magic, seed, count, origin, eps = struct.unpack_from("<4sQQdd", blob)
    if magic != PATH_MAGIC:
        raise IoFailure(f"bad magic {magic!r}")
    values = np.frombuffer(blob, dtype="<f8", offset=36, count=count).copy()
    grid = Grid1D(origin=origin, eps=eps, count=count)
    return ProcessPath(grid=grid, values=values, kernel=kernel, seed=seed)


__all__ = [
    "ProcessPath",
    "derive_seed",
    "sample_path",
    "empirical_covariance",
    "dump_path",
    "load_path",
    "PATH_MAGIC",
]
