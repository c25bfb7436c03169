import math

import numpy as np
import pytest
from scipy.stats import norm

from additive_fields import (
    GAUSSIAN,
    DAMPED_COSINE,
    Grid1D,
    InvalidGrid,
    KernelSpec,
    MixedInputs,
    derive_seed,
    empirical_covariance,
    eval_kernel,
    ks_distance,
    sample_path,
)
from additive_fields.sampler import dump_path, load_path

from oracles import DERIVE_SEED_VECTORS


class TestDeriveSeed:
    def test_frozen_vectors(self):
        for (master, stream), want in DERIVE_SEED_VECTORS.items():
            assert derive_seed(master, stream) == want

    def test_deterministic(self):
        assert derive_seed(99, 3) == derive_seed(99, 3)

    def test_zero_streams_differ(self):
        assert derive_seed(0, 0) != derive_seed(0, 1)

    def test_million_streams_no_collision(self):
        seeds = {derive_seed(424242, k) for k in range(1_000_000)}
        assert len(seeds) == 1_000_000


def _replicate_matrix(spec, grid, n, master=7):
    """(n, count) matrix of replicate values."""
    out = np.empty((n, grid.count))
    for rep in range(n):
        out[rep] = sample_path(spec, grid, derive_seed(master, rep)).values
    return out


class TestSamplePath:
    def test_bit_for_bit_deterministic(self, gaussian_spec, quarter_grid):
        a = sample_path(gaussian_spec, quarter_grid, 123456789)
        b = sample_path(gaussian_spec, quarter_grid, 123456789)
        assert np.array_equal(a.values, b.values)
        assert a.seed == 123456789

    def test_values_immutable(self, gaussian_spec, quarter_grid):
        path = sample_path(gaussian_spec, quarter_grid, 5)
        with pytest.raises(ValueError):
            path.values[0] = 0.0

    def test_rejects_tiny_grid(self, gaussian_spec):
        with pytest.raises(InvalidGrid):
            Grid1D(origin=0.0, eps=0.25, count=1)

    def test_variance_and_lag_covariance(self, gaussian_spec):
        grid = Grid1D(origin=0.0, eps=0.25, count=9)
        n = 20_000
        vals = _replicate_matrix(gaussian_spec, grid, n)
        second_moment = float(np.mean(vals[:, 0] ** 2))
        assert abs(second_moment - 1.0) <= 0.03  # 3 sigma ~ 3*sqrt(2/n) = 0.03
        cov_x1 = float(np.mean(vals[:, 0] * vals[:, 4]))
        assert abs(cov_x1 - math.exp(-1.0)) <= 0.03

    def test_lag8_covariance_via_estimator(self, gaussian_spec):
        grid = Grid1D(origin=0.0, eps=0.25, count=16)
        n = 20_000
        paths = [
            sample_path(gaussian_spec, grid, derive_seed(11, rep)) for rep in range(n)
        ]
        got = empirical_covariance(paths, lag=8)
        assert abs(got - math.exp(-4.0)) <= 0.03

    def test_exactness_full_covariance_32(self, gaussian_spec):
        # full 32x32 empirical covariance within 4 sigma Monte Carlo bands
        grid = Grid1D(origin=0.0, eps=0.25, count=32)
        n = 50_000
        vals = _replicate_matrix(gaussian_spec, grid, n, master=13)
        emp = vals.T @ vals / n
        lags = np.abs(np.subtract.outer(np.arange(32), np.arange(32))) * grid.eps
        want = eval_kernel(gaussian_spec, lags)
        # Var[x_i x_j] = K_ii K_jj + K_ij^2 for jointly Gaussian pairs
        sigma = np.sqrt((np.outer(np.diag(want), np.diag(want)) + want**2) / n)
        assert np.all(np.abs(emp - want) <= 4.0 * sigma)

    def test_marginal_gaussianity_ks(self, gaussian_spec):
        grid = Grid1D(origin=0.0, eps=0.25, count=32)
        n = 50_000
        vals = _replicate_matrix(gaussian_spec, grid, n, master=17)
        distance = ks_distance(list(vals[:, 0]), norm(scale=1.0).cdf)
        assert distance <= 1.95 / math.sqrt(n)  # significance 0.001

    def test_independent_streams_uncorrelated(self, gaussian_spec):
        grid = Grid1D(origin=0.0, eps=0.25, count=32)
        n = 20_000
        a = np.empty(n)
        b = np.empty(n)
        for rep in range(n):
            a[rep] = sample_path(gaussian_spec, grid, derive_seed(3, rep * 2)).values[0]
            b[rep] = sample_path(gaussian_spec, grid, derive_seed(3, rep * 2 + 1)).values[0]
        assert abs(np.corrcoef(a, b)[0, 1]) <= 0.03

    @pytest.mark.parametrize("eps", [0.1, 0.25, 1.0])
    @pytest.mark.parametrize(
        "spec",
        [
            KernelSpec(family=GAUSSIAN),
            KernelSpec(family=DAMPED_COSINE, omega=1.0),
        ],
    )
    def test_no_clamping_at_working_resolutions(self, spec, eps):
        grid = Grid1D(origin=0.0, eps=eps, count=4096)
        path = sample_path(spec, grid, 1)
        assert path.clamped_mass == 0.0

    def test_no_clamping_megapoint_grid(self, gaussian_spec):
        grid = Grid1D(origin=0.0, eps=0.25, count=2**20)
        path = sample_path(gaussian_spec, grid, 1)
        assert path.clamped_mass == 0.0

    def test_short_span_grid_is_non_embeddable(self, gaussian_spec):
        # a grid spanning only two correlation lengths wraps too much
        # covariance onto the embedding torus; exact sampling must refuse
        from additive_fields import NonEmbeddable

        grid = Grid1D(origin=0.0, eps=0.25, count=8)
        with pytest.raises(NonEmbeddable):
            sample_path(gaussian_spec, grid, 1)

    def test_damped_cosine_lag_covariance(self, damped_cosine_spec):
        grid = Grid1D(origin=0.0, eps=0.25, count=9)
        n = 20_000
        vals = _replicate_matrix(damped_cosine_spec, grid, n, master=29)
        got = float(np.mean(vals[:, 0] * vals[:, 4]))
        want = eval_kernel(damped_cosine_spec, 1.0)
        assert abs(got - want) <= 0.03


class TestEmpiricalCovariance:
    def test_lag_zero_positive(self, gaussian_spec, quarter_grid):
        paths = [sample_path(gaussian_spec, quarter_grid, s) for s in (1, 2, 3)]
        assert empirical_covariance(paths, 0) > 0

    def test_constant_zero_path(self, gaussian_spec, quarter_grid):
        from additive_fields import ProcessPath

        zero = ProcessPath(
            grid=quarter_grid,
            values=np.zeros(quarter_grid.count),
            kernel=gaussian_spec,
            seed=0,
        )
        assert empirical_covariance([zero], 3) == 0.0

    def test_mixed_inputs_rejected(self, gaussian_spec, damped_cosine_spec, quarter_grid):
        other_grid = Grid1D(origin=0.0, eps=0.5, count=64)
        a = sample_path(gaussian_spec, quarter_grid, 1)
        b = sample_path(gaussian_spec, other_grid, 1)
        c = sample_path(damped_cosine_spec, quarter_grid, 1)
        with pytest.raises(MixedInputs):
            empirical_covariance([a, b], 0)
        with pytest.raises(MixedInputs):
            empirical_covariance([a, c], 0)
        with pytest.raises(MixedInputs):
            empirical_covariance([a], quarter_grid.count)
        with pytest.raises(MixedInputs):
            empirical_covariance([], 0)


class TestPathDump:
    def test_round_trip(self, gaussian_spec, quarter_grid, tmp_path):
        path = sample_path(gaussian_spec, quarter_grid, 77)
        target = tmp_path / "path.anf"
        dump_path(path, target)
        blob = target.read_bytes()
        assert blob[:4] == b"ANF1"
        assert len(blob) == 36 + 8 * quarter_grid.count
        loaded = load_path(target, gaussian_spec)
        assert loaded.seed == 77
        assert loaded.grid == quarter_grid
        assert np.array_equal(loaded.values, path.values)
