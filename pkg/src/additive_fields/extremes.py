"""Extreme-value theory for smooth stationary Gaussian processes.

Closed-form limit quantities (Gumbel law of the rescaled supremum, point
process intensity of local extrema, crossing-probability sandwich limits)
plus the empirical reductions used to compare Monte Carlo replicates
against them. The closed forms here are the acceptance targets of the
simulation studies in `harness`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .errors import DomainError, EmptySamples
from .kernels import Grid1D
from .sampler import ProcessPath

_LOG_2PI = math.log(2.0 * math.pi)


def l_T(t: float, variance: float) -> float:
    """Centering sqrt(2 * variance * log T) of the supremum on [0, T]."""
    if not t > 1:
        raise DomainError("l_T requires T > 1")
    if not variance > 0:
        raise DomainError("variance must be > 0")
    return math.sqrt(2.0 * variance * math.log(t))


def gumbel_cdf(x):
    """Standard Gumbel CDF exp(-exp(-x)); saturates to 0/1 for |x| > 40."""
    with np.errstate(over="ignore"):
        out = np.exp(-np.exp(-np.asarray(x, dtype=np.float64)))
    return float(out) if np.ndim(x) == 0 else out


def gumbel_shift(lam2: float) -> float:
    """Location shift log sqrt(lambda2) - log 2pi of the limiting Gumbel."""
    if not lam2 > 0:
        raise DomainError("lambda2 must be > 0")
    return 0.5 * math.log(lam2) - _LOG_2PI


@dataclass(frozen=True)
class GumbelRef:
    """Reference Gumbel location for a process with second moment lambda2."""

    lambda2: float
    shift: float

    @classmethod
    def for_lambda2(cls, lam2: float) -> "GumbelRef":
        return cls(lambda2=lam2, shift=gumbel_shift(lam2))


@dataclass(frozen=True)
class ExtremeSummary:
    """Grid-level extremes of one path.

    Local extrema use strict neighbor comparisons on interior points;
    ties have probability zero for continuous marginals.
    """

    sup: float
    inf: float
    argmax_index: int
    argmin_index: int
    local_maxima: list[tuple[int, float]]
    local_minima: list[tuple[int, float]]
    grid: Grid1D


def summarize(path: ProcessPath) -> ExtremeSummary:
    """Extract sup/inf/argmin/argmax and the local extrema of a path."""
    v = path.values
    interior = v[1:-1]
    is_max = (interior > v[:-2]) & (interior > v[2:])
    is_min = (interior < v[:-2]) & (interior < v[2:])
    max_idx = np.nonzero(is_max)[0] + 1
    min_idx = np.nonzero(is_min)[0] + 1
    return ExtremeSummary(
        sup=float(v.max()),
        inf=float(v.min()),
        argmax_index=int(v.argmax()),
        argmin_index=int(v.argmin()),
        local_maxima=[(int(i), float(v[i])) for i in max_idx],
        local_minima=[(int(i), float(v[i])) for i in min_idx],
        grid=path.grid,
    )


def rescaled_sup(summary: ExtremeSummary, t: float, variance: float) -> float:
    """Gumbel-scale coordinate L_T * (sup - L_T) of the supremum."""
    lt = l_T(t, variance)
    return lt * (summary.sup - lt)


def local_extrema_ppp(
    summary: ExtremeSummary, t: float, variance: float, kind: str = "maxima"
) -> list[tuple[float, float]]:
    """Rescaled local-extrema marks (position/T, L_T(+-value - L_T)).

    kind="maxima" marks maxima by L_T(value - L_T); kind="minima" marks
    minima with the sign flip L_T(-value - L_T). In the limit both mark
    sets are Poisson with intensity (sqrt(lambda2)/2pi) dx (x) e^-y dy.
    """
    lt = l_T(t, variance)
    if kind == "maxima":
        pts = summary.local_maxima
        sign = 1.0
    elif kind == "minima":
        pts = summary.local_minima
        sign = -1.0
    else:
        raise DomainError(f"kind must be maxima or minima, got {kind!r}")
    grid = summary.grid
    return [
        ((grid.origin + i * grid.eps) / t, lt * (sign * value - lt))
        for i, value in pts
    ]


def _gumbel_above(c: float) -> float:
    return 1.0 - gumbel_cdf(c)


def limit_supinf(lam2: float) -> float:
    """Limit of P(sup > L_T on both outer intervals, inf > -L_T overall).

    Equals P(G > c)^2 * P(G < c - log 4) with c = log 2pi - log sqrt(lambda2)
    for a unit-variance process with second moment lambda2.
    """
    c = -gumbel_shift(lam2)
    return _gumbel_above(c) ** 2 * gumbel_cdf(c - math.log(4.0))


def limit_at(lam2_1: float, lam2_2: float) -> float:
    """Limit of the double sup/inf event probability for two processes.

    The value sandwiches the square-crossing probability at level 0:
    liminf P(Cross_0) >= limit_at and limsup P(Cross_0) <= 1 - limit_at.
    """
    out = 1.0
    for lam2 in (lam2_1, lam2_2):
        c = -gumbel_shift(lam2)
        out *= _gumbel_above(c) * gumbel_cdf(c)
    return out


def cw_bounds(h: float, lam2_1: float, lam2_2: float) -> tuple[float, float]:
    """Asymptotic bounds on P(Cross at level 2h/sqrt(log T) of a T x T box).

    lower = P(G > c2 - sqrt2 h) * P(G < c1 + sqrt2 h), from the path event;
    upper = 1 - P(G > c1 + sqrt2 h) * P(G < c2 - sqrt2 h), from the blocking
    event. sqrt2*h is h/sqrt(log T) expressed in Gumbel units.
    """
    c1 = -gumbel_shift(lam2_1)
    c2 = -gumbel_shift(lam2_2)
    s = math.sqrt(2.0) * h
    lower = _gumbel_above(c2 - s) * gumbel_cdf(c1 + s)
    upper = 1.0 - _gumbel_above(c1 + s) * gumbel_cdf(c2 - s)
    return lower, upper


class TailRow(NamedTuple):
    x: float
    frequency: float
    gaussian_bound: float


def tail_decay(
    sups: list[float], t: float, xs: list[float], variance: float = 1.0
) -> list[TailRow]:
    """Empirical frequencies of |sup - L_T| > x/L_T across replicates.

    gaussian_bound is the classical concentration bound 2 exp(-d^2/2) at
    the unscaled deviation d = x/L_T, for side-by-side comparison with the
    sharp exponential-in-x behaviour of the frequencies themselves.
    """
    if len(sups) == 0:
        raise EmptySamples("no suprema given")
    lt = l_T(t, variance)
    s = np.asarray(sups, dtype=np.float64)
    dev = np.abs(s - lt)
    rows = []
    for x in xs:
        freq = float(np.mean(dev > x / lt))
        bound = min(1.0, 2.0 * math.exp(-((x / lt) ** 2) / 2.0))
        rows.append(TailRow(x=float(x), frequency=freq, gaussian_bound=bound))
    return rows


def exp_variance_ratio(sups: list[float], theta: float, t: float) -> float:
    """Normalized exponential-moment variance ratio of the grid supremum.

    Returns Var[e^{theta S}] * log T / (theta^2 * E[e^{2 theta S}]),
    computed with max-shifted exponentials so large theta*S cannot
    overflow; the ratio is exactly invariant under the shift.
    """
    if not t > 1:
        raise DomainError("requires T > 1")
    if theta == 0:
        raise DomainError("theta must be nonzero")
    s = np.asarray(sups, dtype=np.float64)
    if s.size < 2:
        raise DomainError("need at least two replicates")
    shifted = s - s.max()
    e1 = np.exp(theta * shifted)
    e2 = np.exp(2.0 * theta * shifted)
    var = float(np.var(e1, ddof=1))
    denom = float(np.mean(e2))
    return var * math.log(t) / (theta**2 * denom)


def ks_distance(samples: list[float], cdf: Callable[[float], float]) -> float:
    """Kolmogorov-Smirnov sup distance between samples and a target CDF.

    Uses both one-sided steps of the empirical CDF at each order statistic.
    """
    if len(samples) == 0:
        raise EmptySamples("no samples")
    xs = np.sort(np.asarray(samples, dtype=np.float64))
    n = xs.size
    f = np.asarray([cdf(x) for x in xs], dtype=np.float64)
    upper = np.arange(1, n + 1) / n - f
    lower = f - np.arange(0, n) / n
    return float(max(upper.max(), lower.max()))


__all__ = [
    "ExtremeSummary",
    "GumbelRef",
    "TailRow",
    "summarize",
    "l_T",
    "gumbel_cdf",
    "gumbel_shift",
    "rescaled_sup",
    "local_extrema_ppp",
    "limit_supinf",
    "limit_at",
    "cw_bounds",
    "tail_decay",
    "exp_variance_ratio",
    "ks_distance",
]
