import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from additive_fields import (
    DAMPED_COSINE,
    GAUSSIAN,
    DomainError,
    Grid1D,
    InvalidGrid,
    KernelSpec,
    NonEmbeddable,
    breman_margin,
    circulant_eigenvalues,
    eval_kernel,
    lambda2,
    tau_scaling,
)
from additive_fields.kernels import (
    circulant_row,
    embedding_size,
    kernel_id,
    parse_kernel,
    serialize_kernel,
)

from oracles import second_derivative_fd


class TestKernelSpec:
    def test_rejects_bad_parameters(self):
        with pytest.raises(DomainError):
            KernelSpec(family=GAUSSIAN, variance=0.0)
        with pytest.raises(DomainError):
            KernelSpec(family=GAUSSIAN, variance=-1.0)
        with pytest.raises(DomainError):
            KernelSpec(family=GAUSSIAN, scale=0.0)
        with pytest.raises(DomainError):
            KernelSpec(family=DAMPED_COSINE, omega=-0.5)
        with pytest.raises(DomainError):
            KernelSpec(family="matern")
        with pytest.raises(DomainError):
            KernelSpec(family=GAUSSIAN, omega=1.0)

    def test_serialize_round_trip(self, damped_cosine_spec):
        text = serialize_kernel(damped_cosine_spec)
        assert "family=damped_cosine" in text
        assert parse_kernel(text) == damped_cosine_spec

    def test_parse_rejects_unknown_key(self):
        with pytest.raises(DomainError):
            parse_kernel("family=gaussian\nrange=3\n")

    def test_kernel_id_has_no_commas(self, gaussian_spec):
        assert "," not in kernel_id(gaussian_spec)


class TestGrid:
    def test_points(self):
        grid = Grid1D(origin=-1.0, eps=0.5, count=5)
        assert grid.point(0) == -1.0
        assert grid.point(4) == 1.0
        assert grid.length == 2.0
        assert np.allclose(grid.points(), [-1.0, -0.5, 0.0, 0.5, 1.0])

    def test_invalid(self):
        with pytest.raises(InvalidGrid):
            Grid1D(origin=0.0, eps=0.25, count=1)
        with pytest.raises(InvalidGrid):
            Grid1D(origin=0.0, eps=0.0, count=8)


class TestEvalKernel:
    def test_value_at_zero_is_variance(self, gaussian_spec):
        assert eval_kernel(gaussian_spec, 0.0) == 1.0
        assert eval_kernel(KernelSpec(family=GAUSSIAN, variance=2.5), 0.0) == 2.5

    def test_gaussian_at_one(self, gaussian_spec):
        assert eval_kernel(gaussian_spec, 1.0) == pytest.approx(math.exp(-1.0), rel=1e-15)

    def test_damped_cosine_at_pi(self, damped_cosine_spec):
        want = math.cos(math.pi) * math.exp(-math.pi**2)
        assert eval_kernel(damped_cosine_spec, math.pi) == pytest.approx(want, rel=1e-12)
        assert eval_kernel(damped_cosine_spec, math.pi) == eval_kernel(
            damped_cosine_spec, -math.pi
        )

    def test_symmetry_exact_bulk(self, gaussian_spec, damped_cosine_spec, rng):
        xs = rng.normal(scale=5.0, size=10_000)
        for spec in (gaussian_spec, damped_cosine_spec):
            assert np.array_equal(eval_kernel(spec, xs), eval_kernel(spec, -xs))

    @given(st.floats(min_value=-100, max_value=100, allow_nan=False))
    def test_symmetry_and_bound(self, x):
        for spec in (
            KernelSpec(family=GAUSSIAN, variance=1.7, scale=0.8),
            KernelSpec(family=DAMPED_COSINE, variance=0.4, scale=2.0, omega=3.0),
        ):
            assert eval_kernel(spec, x) == eval_kernel(spec, -x)
            assert abs(eval_kernel(spec, x)) <= spec.variance


class TestLambda2:
    @pytest.mark.parametrize(
        "spec,want",
        [
            (KernelSpec(family=GAUSSIAN), 2.0),
            (KernelSpec(family=DAMPED_COSINE, omega=1.0), 3.0),
            (KernelSpec(family=GAUSSIAN, variance=0.5), 1.0),
            (KernelSpec(family=GAUSSIAN, variance=2.0), 4.0),
            (KernelSpec(family=GAUSSIAN, scale=2.0), 0.5),
            (KernelSpec(family=DAMPED_COSINE, variance=1.5, scale=0.5, omega=2.0), 18.0),
        ],
    )
    def test_closed_form(self, spec, want):
        assert lambda2(spec) == pytest.approx(want, rel=1e-12)

    @pytest.mark.parametrize(
        "spec",
        [
            KernelSpec(family=GAUSSIAN),
            KernelSpec(family=DAMPED_COSINE, omega=1.0),
            KernelSpec(family=GAUSSIAN, variance=0.5),
            KernelSpec(family=GAUSSIAN, variance=2.0),
            KernelSpec(family=DAMPED_COSINE, variance=2.0, scale=1.5, omega=0.7),
        ],
    )
    def test_matches_finite_differences(self, spec):
        # independent oracle: -K''(0) by Richardson-extrapolated differences
        for h in (1e-3, 1e-4):
            fd = -second_derivative_fd(lambda x: eval_kernel(spec, x), 0.0, h)
            assert lambda2(spec) == pytest.approx(fd, rel=1e-6)


class TestBremanMargin:
    def test_decay_at_simulated_scales(self, gaussian_spec, damped_cosine_spec):
        assert breman_margin(gaussian_spec, 10.0) < 1e-30
        assert breman_margin(damped_cosine_spec, 10.0) < 1e-30

    def test_mesh_oracle(self, damped_cosine_spec):
        # recompute the documented mesh directly
        xs = [2.0 * 2.0 ** (k / 8.0) for k in range(65)]
        want = max(abs(eval_kernel(damped_cosine_spec, x) * math.log(x)) for x in xs)
        assert breman_margin(damped_cosine_spec, 2.0) == pytest.approx(want, rel=1e-12)

    def test_near_one_is_finite(self, gaussian_spec, damped_cosine_spec):
        for spec in (gaussian_spec, damped_cosine_spec):
            value = breman_margin(spec, 1.0001)
            assert np.isfinite(value) and value >= 0

    def test_requires_x_min_above_one(self, gaussian_spec):
        with pytest.raises(DomainError):
            breman_margin(gaussian_spec, 1.0)


class TestCirculantEigenvalues:
    def test_embedding_size(self):
        assert embedding_size(4) == 8
        assert embedding_size(5) == 16
        assert embedding_size(1024) == 2048
        assert embedding_size(1025) == 4096

    def test_white_noise_limit(self):
        # eps >> scale: off-diagonal covariances vanish, all eigenvalues
        # equal the variance
        spec = KernelSpec(family=GAUSSIAN, variance=1.3)
        grid = Grid1D(origin=0.0, eps=100.0, count=4)
        eigs = circulant_eigenvalues(spec, grid)
        assert eigs.shape == (8,)
        assert np.allclose(eigs, 1.3, atol=1e-12)

    @pytest.mark.parametrize("family_omega", [(GAUSSIAN, 0.0), (DAMPED_COSINE, 1.0)])
    def test_matches_dense_eigendecomposition(self, family_omega):
        family, omega = family_omega
        spec = KernelSpec(family=family, omega=omega)
        grid = Grid1D(origin=0.0, eps=0.25, count=32)
        row = circulant_row(spec, grid)
        m = len(row)
        dense = np.empty((m, m))
        for i in range(m):
            dense[i] = np.roll(row, i)
        want = np.sort(np.linalg.eigvalsh(dense))
        got = np.sort(circulant_eigenvalues(spec, grid))
        assert np.allclose(got, want, atol=1e-9)

    @pytest.mark.parametrize("count", [64, 1024])
    @pytest.mark.parametrize("eps", [0.1, 0.25, 1.0])
    def test_nonnegative_and_trace(self, gaussian_spec, damped_cosine_spec, count, eps):
        for spec in (gaussian_spec, damped_cosine_spec):
            grid = Grid1D(origin=0.0, eps=eps, count=count)
            eigs = circulant_eigenvalues(spec, grid)
            assert eigs.min() >= 0.0
            m = len(eigs)
            assert eigs.sum() == pytest.approx(m * spec.variance, rel=1e-12)

    def test_non_embeddable_detected(self, gaussian_spec, monkeypatch):
        # doctor the circulant row so the spectrum has genuine negative mass
        import additive_fields.kernels as kernels_module

        def bad_row(spec, grid):
            row = np.zeros(8)
            row[0] = 1.0
            row[1] = row[7] = 0.9
            return row

        monkeypatch.setattr(kernels_module, "circulant_row", bad_row)
        grid = Grid1D(origin=0.0, eps=0.25, count=4)
        with pytest.raises(NonEmbeddable):
            kernels_module.circulant_eigenvalues(gaussian_spec, grid)


class TestTauScaling:
    def test_identity_cases(self):
        assert tau_scaling(16.0, 1.0, 1.0) == 16.0
        assert tau_scaling(16.0, 1.0, 2.0) == 4.0
        assert tau_scaling(16.0, 2.0, 1.0) == 256.0

    def test_requires_t_above_one(self):
        with pytest.raises(DomainError):
            tau_scaling(1.0, 1.0, 1.0)
