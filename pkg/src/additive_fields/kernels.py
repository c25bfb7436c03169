"""Stationary covariance kernels and their spectral quantities.

Two kernel families are supported, both with provably nonnegative spectral
density, so every admissible grid admits an exact circulant embedding:

    gaussian:       K(x) = variance * exp(-(x/scale)^2)
    damped_cosine:  K(x) = variance * cos(omega*x) * exp(-(x/scale)^2)

Arbitrary user-supplied kernels are deliberately rejected; validating
positive semidefiniteness would then be the caller's burden.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InvalidGrid, NonEmbeddable

GAUSSIAN = "gaussian"
DAMPED_COSINE = "damped_cosine"
FAMILIES = (GAUSSIAN, DAMPED_COSINE)

# Eigenvalues whose magnitude is below NOISE_FLOOR * max|eig| are treated as
# exactly zero: they are FFT roundoff, not spectral content. Negative mass
# above the floor but below EMBED_TOL of the total mass is clamped by the
# sampler (and accounted for); anything larger means the pair is genuinely
# non-embeddable.
NOISE_FLOOR = 1e-12
EMBED_TOL = 1e-6
_IMAG_TOL = 1e-9


@dataclass(frozen=True)
class KernelSpec:
    """Parametric stationary covariance kernel.

    variance is K(0); scale is the correlation length unit; omega is the
    oscillation frequency (damped_cosine only, gaussian requires omega=0).
    """

    family: str
    variance: float = 1.0
    scale: float = 1.0
    omega: float = 0.0

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise DomainError(f"unknown kernel family {self.family!r}")
        if not self.variance > 0:
            raise DomainError("variance must be > 0")
        if not self.scale > 0:
            raise DomainError("scale must be > 0")
        if self.omega < 0:
            raise DomainError("omega must be >= 0")
        if self.family == GAUSSIAN and self.omega != 0.0:
            raise DomainError("gaussian kernel has omega = 0")


@dataclass(frozen=True)
class Grid1D:
    """Uniform 1D grid: point(i) = origin + i*eps for 0 <= i < count."""

    origin: float
    eps: float
    count: int

    def __post_init__(self) -> None:
        if self.count < 2:
            raise InvalidGrid("grid needs at least two points")
        if not self.eps > 0:
            raise InvalidGrid("grid spacing must be > 0")

    def point(self, i: int) -> float:
        return self.origin + i * self.eps

    def points(self) -> np.ndarray:
        return self.origin + self.eps * np.arange(self.count)

    @property
    def length(self) -> float:
        return self.eps * (self.count - 1)


def eval_kernel(spec: KernelSpec, x):
    """Evaluate K at lag x (scalar or array). Exactly even in x."""
    # abs() keeps +/-x bit-identical through the transcendental calls.
    ax = np.abs(np.asarray(x, dtype=np.float64))
    u = ax / spec.scale
    out = spec.variance * np.exp(-u * u)
    if spec.family == DAMPED_COSINE:
        out = out * np.cos(spec.omega * ax)
    if np.isscalar(x) or np.ndim(x) == 0:
        return float(out)
    return out


def lambda2(spec: KernelSpec) -> float:
    """Second spectral moment -K''(0), in closed form per family."""
    if spec.family == GAUSSIAN:
        return 2.0 * spec.variance / spec.scale**2
    return spec.variance * (spec.omega**2 + 2.0 / spec.scale**2)


def breman_margin(spec: KernelSpec, x_min: float) -> float:
    """Largest |K(x) log x| over the mesh x_min * 2^(k/8), k = 0..64.

    A finite proxy for the correlation-decay requirement K(x) log|x| -> 0:
    it documents the decay margin at the scales actually simulated.
    """
    if not x_min > 1:
        raise DomainError("x_min must be > 1 so that log x > 0")
    xs = x_min * 2.0 ** (np.arange(65) / 8.0)
    return float(np.max(np.abs(eval_kernel(spec, xs) * np.log(xs))))


def embedding_size(count: int) -> int:
    """Smallest power of two >= 2*count."""
    m = 1
    while m < 2 * count:
        m *= 2
    return m


def circulant_row(spec: KernelSpec, grid: Grid1D) -> np.ndarray:
    """First row of the even circulant extension of K on the grid."""
    m = embedding_size(grid.count)
    j = np.arange(m)
    lags = np.minimum(j, m - j) * grid.eps
    return eval_kernel(spec, lags)


def circulant_eigenvalues(spec: KernelSpec, grid: Grid1D) -> np.ndarray:
    """Eigenvalues of the circulant embedding of K on the grid.

    Returned in DFT order (length M = embedding_size(count)). Magnitudes
    below the roundoff noise floor are snapped to exactly zero. Raises
    NonEmbeddable when the remaining negative mass exceeds EMBED_TOL of
    the total mass.
    """
    row = circulant_row(spec, grid)
    spectrum = np.fft.fft(row)
    eigs = spectrum.real
    peak = float(np.max(np.abs(eigs)))
    imag_residue = float(np.max(np.abs(spectrum.imag)))
    if peak > 0 and imag_residue > _IMAG_TOL * peak:
        raise NonEmbeddable(
            f"imaginary eigenvalue residue {imag_residue:.3e} exceeds "
            f"{_IMAG_TOL:.0e} of peak {peak:.3e}"
        )
    eigs[np.abs(eigs) <= NOISE_FLOOR * peak] = 0.0
    negative_mass = float(-eigs[eigs < 0].sum())
    total_mass = float(np.abs(eigs).sum())
    if negative_mass > EMBED_TOL * total_mass:
        raise NonEmbeddable(
            f"negative eigenvalue mass {negative_mass:.3e} exceeds "
            f"{EMBED_TOL:.0e} of total {total_mass:.3e} "
            f"for {spec} at eps={grid.eps}, count={grid.count}"
        )
    return eigs


def serialize_kernel(spec: KernelSpec) -> str:
    """Key=value line serialization (family, variance, scale, omega)."""
    return (
        f"family={spec.family}\n"
        f"variance={spec.variance!r}\n"
        f"scale={spec.scale!r}\n"
        f"omega={spec.omega!r}\n"
    )


def parse_kernel(text: str) -> KernelSpec:
    """Inverse of serialize_kernel. Unknown keys are errors."""
    fields: dict[str, str] = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        if key not in ("family", "variance", "scale", "omega"):
            raise DomainError(f"unknown kernel key {key!r}")
        fields[key] = value
    if "family" not in fields:
        raise DomainError("kernel serialization lacks family=")
    return KernelSpec(
        family=fields["family"],
        variance=float(fields.get("variance", 1.0)),
        scale=float(fields.get("scale", 1.0)),
        omega=float(fields.get("omega", 0.0)),
    )


def kernel_id(spec: KernelSpec) -> str:
    """Compact single-token descriptor used in CSV cells."""
    return (
        f"family={spec.family};variance={spec.variance!r};"
        f"scale={spec.scale!r};omega={spec.omega!r}"
    )


def tau_scaling(t: float, k1_0: float, k2_0: float) -> float:
    """Anisotropy map tau(T) = T^(K1(0)/K2(0)) pairing the two axes' scales."""
    if not t > 1:
        raise DomainError("tau is defined for T > 1")
    return t ** (k1_0 / k2_0)


__all__ = [
    "GAUSSIAN",
    "DAMPED_COSINE",
    "FAMILIES",
    "KernelSpec",
    "Grid1D",
    "eval_kernel",
    "lambda2",
    "breman_margin",
    "embedding_size",
    "circulant_row",
    "circulant_eigenvalues",
    "serialize_kernel",
    "parse_kernel",
    "kernel_id",
    "tau_scaling",
    "NOISE_FLOOR",
    "EMBED_TOL",
]
