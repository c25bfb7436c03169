"""Experiment orchestration: replicated studies, CSV output, parallelism.

Every study draws its replicates from per-replicate seed streams
(derive_seed(master, replicate*2 + process)), so a replicate's outcome is
a pure function of the master seed and its index. Per-replicate results
are gathered into arrays indexed by replicate and reduced in fixed order,
which makes study output bit-identical for any worker count and any
scheduling.

Monte Carlo frequencies are reported with Wilson 95% intervals (rare
events such as blocking successes sit near the boundary where Wald
intervals misbehave), next to the closed-form limit value whenever the
theory provides one.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone

import numpy as np

from .config import (
    BLOCKING_STUDY,
    CROSSING_SCAN,
    EXTREMES_STUDY,
    GUMBEL_STUDY,
    RENDER,
    SLICE3D,
    WINDOW_SCAN,
    ExperimentConfig,
)
from .errors import CertificateViolation, ConfigError, DomainError
from .extremes import (
    exp_variance_ratio,
    gumbel_cdf,
    gumbel_shift,
    ks_distance,
    l_T,
    limit_at,
    limit_supinf,
    cw_bounds,
)
from .field import AdditiveField, area_fraction, excursion_mask, render_pgm
from .kernels import Grid1D, KernelSpec, kernel_id, lambda2, tau_scaling
from .percolation import (
    LEFTRIGHT,
    blocking_axis_conditions,
    find_blocking_rectangle,
    has_crossing,
    verify_blocking,
)
from .sampler import derive_seed, sample_path

Z95 = 1.959963984540054

CSV_COLUMNS = (
    "experiment,kernel1,kernel2,R,rho,level,h,replicates,successes,"
    "p_hat,ci_low,ci_high,closed_form_reference,master_seed"
)
STATS_COLUMNS = "T,metric,value"


def wilson_interval(
    successes: int, trials: int, z: float = Z95
) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials < 1:
        raise DomainError("trials must be >= 1")
    if not 0 <= successes <= trials:
        raise DomainError("successes must lie in [0, trials]")
    p_hat = successes / trials
    denom = 1.0 + z * z / trials
    center = (p_hat + z * z / (2.0 * trials)) / denom
    half = (z / denom) * math.sqrt(
        p_hat * (1.0 - p_hat) / trials + z * z / (4.0 * trials * trials)
    )
    return max(0.0, center - half), min(1.0, center + half)


@dataclass(frozen=True)
class ResultRow:
    """One Monte Carlo frequency with its Wilson interval and, when the
    theory provides one, the closed-form limit it should approach."""

    experiment: str
    kernel1: str
    kernel2: str
    r: float | None
    rho: float | None
    level: float | None
    h: float | None
    replicates: int
    successes: int
    p_hat: float
    ci_low: float
    ci_high: float
    closed_form_reference: str
    master_seed: int

    def to_csv(self) -> str:
        cells = [
            self.experiment,
            self.kernel1,
            self.kernel2,
            _fmt(self.r),
            _fmt(self.rho),
            _fmt(self.level),
            _fmt(self.h),
            str(self.replicates),
            str(self.successes),
            _fmt(self.p_hat),
            _fmt(self.ci_low),
            _fmt(self.ci_high),
            self.closed_form_reference,
            str(self.master_seed),
        ]
        return ",".join(cells)


def _fmt(x: float | None) -> str:
    return "" if x is None else repr(float(x))


def _binomial_row(
    experiment: str,
    config: ExperimentConfig,
    successes: int,
    trials: int,
    r: float | None = None,
    rho: float | None = None,
    level: float | None = None,
    h: float | None = None,
    reference: str = "",
) -> ResultRow:
    lo, hi = wilson_interval(successes, trials)
    return ResultRow(
        experiment=experiment,
        kernel1=kernel_id(config.kernel1),
        kernel2=kernel_id(config.kernel2) if config.kernel2 else "",
        r=r,
        rho=rho,
        level=level,
        h=h,
        replicates=trials,
        successes=successes,
        p_hat=successes / trials,
        ci_low=lo,
        ci_high=hi,
        closed_form_reference=reference,
        master_seed=config.master_seed,
    )


def rows_to_csv(rows: list[ResultRow], timestamp: bool = True) -> str:
    lines = []
    if timestamp:
        lines.append(f"# generated_at={datetime.now(timezone.utc).isoformat()}")
    lines.append(CSV_COLUMNS)
    lines.extend(row.to_csv() for row in rows)
    return "\n".join(lines) + "\n"


def stats_to_csv(stats: list[tuple[float, str, float]], timestamp: bool = True) -> str:
    lines = []
    if timestamp:
        lines.append(f"# generated_at={datetime.now(timezone.utc).isoformat()}")
    lines.append(STATS_COLUMNS)
    lines.extend(f"{_fmt(t)},{metric},{_fmt(value)}" for t, metric, value in stats)
    return "\n".join(lines) + "\n"


# ----------------------------------------------------------------------
# parallel replication
# ----------------------------------------------------------------------


def _chunks(n: int, workers: int) -> list[tuple[int, int]]:
    pieces = min(n, max(1, workers) * 4)
    bounds = np.linspace(0, n, pieces + 1).astype(int)
    return [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


def _map_replicates(chunk_fn, payload, n: int, workers: int) -> list:
    """Evaluate chunk_fn(payload, start, stop) over [0, n), by replicate.

    Results are placed by replicate index, so the output is independent
    of worker count and completion order.
    """
    if workers <= 1:
        return chunk_fn(payload, 0, n)
    out: list = [None] * n
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [
            (start, stop, pool.submit(chunk_fn, payload, start, stop))
            for start, stop in _chunks(n, workers)
        ]
        for start, stop, future in futures:
            out[start:stop] = future.result()
    return out


def _span_grid(extent: float, eps: float) -> Grid1D:
    """Grid over [0, extent] with spacing eps."""
    return Grid1D(origin=0.0, eps=eps, count=int(round(extent / eps)) + 1)


def _centered_grid(extent: float, eps: float) -> Grid1D:
    """Grid over [-extent, extent] with spacing eps."""
    return Grid1D(
        origin=-extent, eps=eps, count=int(round(2.0 * extent / eps)) + 1
    )


def _normalized_lambda2(spec: KernelSpec) -> float:
    # the limit formulas apply to the unit-variance rescaling of the
    # process, whose second spectral moment is lambda2 / K(0)
    return lambda2(spec) / spec.variance


# ----------------------------------------------------------------------
# crossing scan (level-0 and general-level box crossings)
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class _CrossPayload:
    kernel1: KernelSpec
    kernel2: KernelSpec
    eps: float
    width: float
    height: float
    level: float
    master_seed: int


def _cross_chunk(payload: _CrossPayload, start: int, stop: int) -> list[bool]:
    grid1 = _span_grid(payload.width, payload.eps)
    grid2 = _span_grid(payload.height, payload.eps)
    out = []
    for rep in range(start, stop):
        g1 = sample_path(
            payload.kernel1, grid1, derive_seed(payload.master_seed, rep * 2)
        )
        g2 = sample_path(
            payload.kernel2, grid2, derive_seed(payload.master_seed, rep * 2 + 1)
        )
        mask = excursion_mask(AdditiveField((g1, g2)), payload.level)
        out.append(has_crossing(mask, LEFTRIGHT))
    return out


def run_crossing_scan(config: ExperimentConfig) -> list[ResultRow]:
    """Crossing frequencies of {f <= level} over [0,R] x [0,rho*R] windows.

    With rescaled=True each scan is repeated on the anisotropy-corrected
    window [0,R] x [0, rho * R^(K1(0)/K2(0))], the shape for which
    box-crossing estimates survive unequal variances.
    """
    if config.kernel2 is None:
        raise ConfigError("crossing scan needs kernel2")
    k1_0 = config.kernel1.variance
    k2_0 = config.kernel2.variance
    balanced = k1_0 == k2_0
    sandwich = _fmt(
        limit_at(
            _normalized_lambda2(config.kernel1),
            _normalized_lambda2(config.kernel2),
        )
    )
    rows = []
    for r in config.sizes:
        if not r > 1:
            raise ConfigError("sizes must exceed 1")
        for level in config.levels:
            # the sandwich constant applies to the square window only when
            # the variances balance, and always to the rescaled window
            windows = [(CROSSING_SCAN, config.rho * r, sandwich if balanced else "")]
            if config.rescaled:
                windows.append(
                    ("cross_rescaled", config.rho * tau_scaling(r, k1_0, k2_0), sandwich)
                )
            for experiment_id, height, reference in windows:
                payload = _CrossPayload(
                    kernel1=config.kernel1,
                    kernel2=config.kernel2,
                    eps=config.eps,
                    width=r,
                    height=height,
                    level=level,
                    master_seed=config.master_seed,
                )
                hits = _map_replicates(
                    _cross_chunk, payload, config.replicates, config.workers
                )
                rows.append(
                    _binomial_row(
                        experiment_id,
                        config,
                        successes=int(sum(hits)),
                        trials=config.replicates,
                        r=r,
                        rho=config.rho,
                        level=level,
                        reference=reference,
                    )
                )
    return rows


# ----------------------------------------------------------------------
# critical window scan
# ----------------------------------------------------------------------


def run_window_scan(config: ExperimentConfig) -> list[ResultRow]:
    """Square-crossing frequencies at levels 2h/sqrt(log R).

    Requires K1(0) = K2(0) (the hypothesis under which the critical-window
    scaling holds). The reference cell carries the asymptotic lower and
    upper bounds as "lower;upper".
    """
    if config.kernel2 is None:
        raise ConfigError("window scan needs kernel2")
    if config.kernel1.variance != config.kernel2.variance:
        raise ConfigError("window scan requires K1(0) = K2(0)")
    rows = []
    nl1 = _normalized_lambda2(config.kernel1)
    nl2 = _normalized_lambda2(config.kernel2)
    for h in config.h_values:
        lower, upper = cw_bounds(h, nl1, nl2)
        reference = f"{_fmt(lower)};{_fmt(upper)}"
        for r in config.sizes:
            if not r > 1:
                raise ConfigError("sizes must exceed 1")
            level = 2.0 * h / math.sqrt(math.log(r))
            payload = _CrossPayload(
                kernel1=config.kernel1,
                kernel2=config.kernel2,
                eps=config.eps,
                width=r,
                height=r,
                level=level,
                master_seed=config.master_seed,
            )
            hits = _map_replicates(
                _cross_chunk, payload, config.replicates, config.workers
            )
            rows.append(
                _binomial_row(
                    WINDOW_SCAN,
                    config,
                    successes=int(sum(hits)),
                    trials=config.replicates,
                    r=r,
                    rho=1.0,
                    level=level,
                    h=h,
                    reference=reference,
                )
            )
    return rows


# ----------------------------------------------------------------------
# gumbel / extremes study (1D)
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class _GumbelPayload:
    kernel: KernelSpec
    eps: float
    t: float
    master_seed: int


def _gumbel_chunk(
    payload: _GumbelPayload, start: int, stop: int
) -> list[tuple[float, int, int]]:
    grid = _span_grid(payload.t, payload.eps)
    root_var = math.sqrt(payload.kernel.variance)
    lt = math.sqrt(2.0 * math.log(payload.t))
    out = []
    for rep in range(start, stop):
        path = sample_path(
            payload.kernel, grid, derive_seed(payload.master_seed, rep * 2)
        )
        v = path.values / root_var if root_var != 1.0 else path.values
        sup_hat = float(v.max())
        interior = v[1:-1]
        # counts of rescaled marks with positive height: maxima above L_T,
        # minima below -L_T (equivalent to filtering local_extrema_ppp)
        n_max_pos = int(
            np.count_nonzero(
                (interior > v[:-2]) & (interior > v[2:]) & (interior > lt)
            )
        )
        n_min_pos = int(
            np.count_nonzero(
                (interior < v[:-2]) & (interior < v[2:]) & (interior < -lt)
            )
        )
        out.append((sup_hat, n_max_pos, n_min_pos))
    return out


def run_gumbel_study(
    config: ExperimentConfig,
) -> tuple[list[ResultRow], list[tuple[float, str, float]]]:
    """Rescaled-supremum law, extrema point process, and concentration.

    Works on the unit-variance rescaling of kernel1's process. Returns
    the binomial tail rows (deviation events at each x in tail_xs) and a
    long-format stats table with, per T: the KS distance of the rescaled
    suprema to the shifted Gumbel, mean counts of positive-height extrema
    marks, the max/min count correlation, and the exponential-moment
    variance ratio at theta.
    """
    shift = gumbel_shift(_normalized_lambda2(config.kernel1))
    rows: list[ResultRow] = []
    stats: list[tuple[float, str, float]] = []
    for t in config.sizes:
        if not t > 1:
            raise ConfigError("sizes must exceed 1")
        payload = _GumbelPayload(
            kernel=config.kernel1,
            eps=config.eps,
            t=t,
            master_seed=config.master_seed,
        )
        raw = _map_replicates(
            _gumbel_chunk, payload, config.replicates, config.workers
        )
        sups = np.array([item[0] for item in raw])
        n_max = np.array([item[1] for item in raw], dtype=np.int64)
        n_min = np.array([item[2] for item in raw], dtype=np.int64)
        lt = l_T(t, 1.0)
        rescaled = lt * (sups - lt)
        ks = ks_distance(list(rescaled), lambda x: gumbel_cdf(x - shift))
        stats.append((t, "ks_distance", ks))
        stats.append((t, "gumbel_shift", shift))
        stats.append((t, "mean_pos_maxima", float(n_max.mean())))
        stats.append((t, "mean_pos_minima", float(n_min.mean())))
        stats.append((t, "maxmin_count_correlation", _safe_corr(n_max, n_min)))
        stats.append(
            (
                t,
                f"exp_variance_ratio_theta={_fmt(config.theta)}",
                exp_variance_ratio(list(sups), config.theta, t),
            )
        )
        for x in config.tail_xs:
            hits = int(np.count_nonzero(np.abs(sups - lt) > x / lt))
            bound = min(1.0, 2.0 * math.exp(-((x / lt) ** 2) / 2.0))
            rows.append(
                _binomial_row(
                    "gumbel_tail",
                    config,
                    successes=hits,
                    trials=config.replicates,
                    r=t,
                    h=x,
                    reference=_fmt(bound),
                )
            )
    return rows, stats


def _safe_corr(a: np.ndarray, b: np.ndarray) -> float:
    if a.std() == 0 or b.std() == 0:
        return 0.0
    return float(np.corrcoef(a, b)[0, 1])


# ----------------------------------------------------------------------
# blocking-rectangle study
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class _BlockingPayload:
    kernel1: KernelSpec
    kernel2: KernelSpec
    eps: float
    t: float
    tau: float
    threshold: float
    master_seed: int


def _blocking_chunk(payload: _BlockingPayload, start: int, stop: int) -> list[int]:
    """Per replicate: 0 = no certificate, 1 = certified and verified,
    2 = certified but verification failed (soundness violation)."""
    grid1 = _centered_grid(2.0 * payload.t, payload.eps)
    grid2 = _centered_grid(2.0 * payload.tau, payload.eps)
    out = []
    for rep in range(start, stop):
        g1 = sample_path(
            payload.kernel1, grid1, derive_seed(payload.master_seed, rep * 2)
        )
        # the first axis's conditions are necessary for a certificate, so
        # g2 (its seed stream is fixed either way) is only sampled when
        # they hold; outcomes are identical to the unconditional search
        if blocking_axis_conditions(g1, payload.t, payload.threshold) is None:
            out.append(0)
            continue
        g2 = sample_path(
            payload.kernel2, grid2, derive_seed(payload.master_seed, rep * 2 + 1)
        )
        cert = find_blocking_rectangle(
            g1, g2, payload.t, payload.tau, payload.threshold
        )
        if cert is None:
            out.append(0)
        elif verify_blocking(AdditiveField((g1, g2)), cert):
            out.append(1)
        else:
            out.append(2)
    return out


def run_blocking_study(config: ExperimentConfig) -> list[ResultRow]:
    """Frequency of certified blocking rectangles at s = L_{1;T}.

    Every successful certificate is machine-verified on its own sample;
    any verification failure raises CertificateViolation (the harness's
    hard-failure exit). The reference is the closed-form limit product
    of the two processes' sup/inf event probabilities.
    """
    if config.kernel2 is None:
        raise ConfigError("blocking study needs kernel2")
    k1_0 = config.kernel1.variance
    k2_0 = config.kernel2.variance
    reference = _fmt(
        limit_supinf(_normalized_lambda2(config.kernel1))
        * limit_supinf(_normalized_lambda2(config.kernel2))
    )
    rows = []
    for t in config.sizes:
        if not t > 1:
            raise ConfigError("sizes must exceed 1")
        tau = tau_scaling(t, k1_0, k2_0)
        threshold = math.sqrt(2.0 * k1_0 * math.log(t))
        payload = _BlockingPayload(
            kernel1=config.kernel1,
            kernel2=config.kernel2,
            eps=config.eps,
            t=t,
            tau=tau,
            threshold=threshold,
            master_seed=config.master_seed,
        )
        outcomes = _map_replicates(
            _blocking_chunk, payload, config.replicates, config.workers
        )
        violations = sum(1 for o in outcomes if o == 2)
        if violations:
            raise CertificateViolation(
                f"{violations} blocking certificates failed verification at T={t}"
            )
        rows.append(
            _binomial_row(
                BLOCKING_STUDY,
                config,
                successes=int(sum(1 for o in outcomes if o == 1)),
                trials=config.replicates,
                r=t,
                reference=reference,
            )
        )
    return rows


# ----------------------------------------------------------------------
# 3D plane-slice study
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class _SlicePayload:
    kernel1: KernelSpec
    kernel2: KernelSpec
    kernel3: KernelSpec
    eps: float
    r: float
    level: float
    search_t: float
    master_seed: int


def _slice_chunk(
    payload: _SlicePayload, start: int, stop: int
) -> list[tuple[bool, bool]]:
    grid12 = _span_grid(payload.r, payload.eps)
    grid3 = _span_grid(payload.search_t, payload.eps)
    out = []
    for rep in range(start, stop):
        g3 = sample_path(
            payload.kernel3, grid3, derive_seed(payload.master_seed, rep * 3 + 2)
        )
        below = g3.values < 2.0 * payload.level
        if not below.any():
            out.append((False, False))
            continue
        s3 = int(np.argmax(below))
        shifted_level = payload.level - float(g3.values[s3])
        g1 = sample_path(
            payload.kernel1, grid12, derive_seed(payload.master_seed, rep * 3)
        )
        g2 = sample_path(
            payload.kernel2, grid12, derive_seed(payload.master_seed, rep * 3 + 1)
        )
        mask = excursion_mask(AdditiveField((g1, g2)), shifted_level)
        out.append((True, has_crossing(mask, LEFTRIGHT)))
    return out


def run_slice3d_study(config: ExperimentConfig) -> list[ResultRow]:
    """Plane-slice construction for d = 3: find s3 with g3(s3) < 2*level,
    then cross the induced planar field at the lifted level.

    Reports the slice-found frequency and the joint (slice found AND the
    planar window crossed) frequency as separate rows.
    """
    if config.kernel2 is None or config.kernel3 is None:
        raise ConfigError("slice3d needs kernel2 and kernel3")
    rows = []
    for level in config.levels:
        if not level < 0:
            raise ConfigError("slice3d levels must be negative")
        for r in config.sizes:
            if not r > 1:
                raise ConfigError("sizes must exceed 1")
            payload = _SlicePayload(
                kernel1=config.kernel1,
                kernel2=config.kernel2,
                kernel3=config.kernel3,
                eps=config.eps,
                r=r,
                level=level,
                search_t=config.search_t,
                master_seed=config.master_seed,
            )
            outcomes = _map_replicates(
                _slice_chunk, payload, config.replicates, config.workers
            )
            found = sum(1 for f, _ in outcomes if f)
            joint = sum(1 for f, c in outcomes if f and c)
            rows.append(
                _binomial_row(
                    "slice3d_found",
                    config,
                    successes=found,
                    trials=config.replicates,
                    r=r,
                    level=level,
                )
            )
            rows.append(
                _binomial_row(
                    "slice3d_joint",
                    config,
                    successes=joint,
                    trials=config.replicates,
                    r=r,
                    level=level,
                )
            )
    return rows


# ----------------------------------------------------------------------
# nodal-domain render
# ----------------------------------------------------------------------

RENDER_SIDE = 1024


def run_render(config: ExperimentConfig, destination) -> float:
    """Render the 1024 x 1024 nodal-domain image {f <= 0} to a PGM file.

    Returns the excursion area fraction (0.5 in expectation: the field is
    centred Gaussian at every cell). Deterministic in the master seed.
    """
    if config.kernel2 is None:
        raise ConfigError("render needs kernel2")
    grid = Grid1D(origin=0.0, eps=config.eps, count=RENDER_SIDE)
    g1 = sample_path(config.kernel1, grid, derive_seed(config.master_seed, 0))
    g2 = sample_path(config.kernel2, grid, derive_seed(config.master_seed, 1))
    mask = excursion_mask(AdditiveField((g1, g2)), 0.0)
    render_pgm(mask, destination)
    return area_fraction(mask)


# ----------------------------------------------------------------------
# dispatch
# ----------------------------------------------------------------------


def run_experiment(config: ExperimentConfig, out_dir) -> dict:
    """Run the configured experiment, writing outputs under out_dir.

    Returns a manifest {name: path} of everything written.
    """
    import os

    os.makedirs(out_dir, exist_ok=True)
    name = config.experiment
    written: dict = {}
    if name in (GUMBEL_STUDY, EXTREMES_STUDY):
        rows, stats = run_gumbel_study(config)
        rows_path = os.path.join(out_dir, "gumbel.csv")
        stats_path = os.path.join(out_dir, "gumbel_stats.csv")
        _write(rows_path, rows_to_csv(rows))
        _write(stats_path, stats_to_csv(stats))
        written["rows"] = rows_path
        written["stats"] = stats_path
        return written
    if name == RENDER:
        pgm_path = os.path.join(out_dir, "nodal.pgm")
        area = run_render(config, pgm_path)
        written["pgm"] = pgm_path
        written["area_fraction"] = area
        return written
    runner = {
        CROSSING_SCAN: run_crossing_scan,
        WINDOW_SCAN: run_window_scan,
        BLOCKING_STUDY: run_blocking_study,
        SLICE3D: run_slice3d_study,
    }[name]
    rows = runner(config)
    rows_path = os.path.join(out_dir, f"{name}.csv")
    _write(rows_path, rows_to_csv(rows))
    written["rows"] = rows_path
    return written


def _write(path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


__all__ = [
    "Z95",
    "CSV_COLUMNS",
    "STATS_COLUMNS",
    "ResultRow",
    "wilson_interval",
    "rows_to_csv",
    "stats_to_csv",
    "run_crossing_scan",
    "run_window_scan",
    "run_gumbel_study",
    "run_blocking_study",
    "run_slice3d_study",
    "run_render",
    "run_experiment",
    "RENDER_SIDE",
]
