import numpy as np
import pytest

from levyvolterra.kernels import (
    GammaKernel,
    Kernel,
    PerturbedKernel,
    constant_kernel,
    lp_distance,
    lp_distance_mass,
    lp_norm,
    rate_experiment,
    rate_fit,
    theoretical_rate,
)


class TestKernelTypes:
    def test_gamma_eval_and_deriv(self):
        g = GammaKernel(beta=-0.25, lam=2.0)
        u = np.array([0.1, 0.5, 1.3])
        assert np.allclose(g(u), u**-0.25 * np.exp(-2.0 * u))
        num = (g(u + 1e-7) - g(u - 1e-7)) / 2e-7
        assert np.allclose(g.deriv(u), num, rtol=1e-5)

    def test_singularity_metadata(self):
        assert GammaKernel(beta=-0.1, lam=0.0).singular_at_zero
        assert not GammaKernel(beta=0.5, lam=0.0).singular_at_zero
        with pytest.raises(ValueError):
            GammaKernel(beta=0.0, lam=1.0)
        with pytest.raises(ValueError):
            Kernel(lambda u: 1 / u, singular_at_zero=True)  # missing power

    def test_perturbed_never_singular(self):
        base = GammaKernel(beta=-0.25, lam=0.0)
        pert = PerturbedKernel(base=base, epsilon=0.01)
        assert not pert.singular_at_zero
        assert pert(0.0) == pytest.approx(base(0.01))
        assert np.isfinite(pert(0.0))
        with pytest.raises(ValueError):
            PerturbedKernel(base=base, epsilon=0.0)

    def test_perturbed_bounded_by_base_at_eps(self):
        base = GammaKernel(beta=-0.25, lam=1.0)
        pert = PerturbedKernel(base=base, epsilon=0.05)
        u = np.linspace(0.0, 1.0, 50)
        assert np.all(pert(u) <= base(0.05) + 1e-15)


class TestLpNorm:
    def test_linear_kernel(self):
        assert lp_norm(GammaKernel(beta=1.0, lam=0.0), 1.0, 1.0) == pytest.approx(0.5)

    def test_mildly_singular(self):
        expected = (128.0 / 119.0) ** (8.0 / 9.0)
        assert lp_norm(GammaKernel(beta=-1 / 16, lam=0.0), 1.0, 9 / 8) == pytest.approx(
            expected, rel=1e-9
        )

    def test_divergent(self):
        assert np.isinf(lp_norm(GammaKernel(beta=-0.5, lam=0.0), 1.0, 2.0))

    @pytest.mark.parametrize("beta,p", [(-0.3, 1.5), (-0.75, 1.2), (-0.05, 3.0)])
    def test_pure_power_closed_form(self, beta, p):
        t = 0.8
        expected = (t ** (1 + beta * p) / (1 + beta * p)) ** (1 / p)
        assert lp_norm(GammaKernel(beta=beta, lam=0.0), t, p) == pytest.approx(
            expected, rel=1e-8
        )

    def test_invalid_args(self):
        with pytest.raises(ValueError):
            lp_norm(GammaKernel(beta=1.0, lam=0.0), -1.0, 2.0)
        with pytest.raises(ValueError):
            lp_norm(GammaKernel(beta=1.0, lam=0.0), 1.0, 0.5)


class TestLpDistance:
    def test_identical_kernels(self):
        g = GammaKernel(beta=-0.25, lam=1.0)
        assert lp_distance(g, g, 1.0, 2.0) == pytest.approx(0.0, abs=1e-12)

    def test_linear_shift_exact(self):
        g = GammaKernel(beta=1.0, lam=0.0)
        dist = lp_distance(g, PerturbedKernel(base=g, epsilon=0.1), 1.0, 1.0)
        assert dist == pytest.approx(0.1, rel=1e-10)

    def test_monotone_vanishing(self):
        g = GammaKernel(beta=-1 / 16, lam=0.0)
        dists = [
            lp_distance(g, PerturbedKernel(base=g, epsilon=e), 1.0, 9 / 8)
            for e in (1e-1, 1e-2, 1e-3, 1e-4)
        ]
        assert all(b < a for a, b in zip(dists, dists[1:]))

    def test_triangle_inequality(self):
        rng = np.random.default_rng(17)
        for _ in range(5):
            betas = rng.uniform(-0.4, 1.0, size=3)
            betas[betas == 0] = 0.3
            lams = rng.uniform(0.0, 2.0, size=3)
            k1, k2, k3 = (GammaKernel(beta=b, lam=l) for b, l in zip(betas, lams))
            p = float(rng.uniform(1.0, 1.8))
            if any(1 + b * p <= 0 for b in betas):
                continue
            d13 = lp_distance(k1, k3, 1.0, p)
            d12 = lp_distance(k1, k2, 1.0, p)
            d23 = lp_distance(k2, k3, 1.0, p)
            assert d13 <= d12 + d23 + 2e-9

    def test_divergent_operand(self):
        g = GammaKernel(beta=-0.5, lam=0.0)
        assert np.isinf(lp_distance(g, GammaKernel(beta=1.0, lam=0.0), 1.0, 2.0))


class TestRateFit:
    def test_exact_power(self):
        eps = np.array([1e-1, 1e-2, 1e-3, 1e-4])
        fit = rate_fit(eps, eps)
        assert fit.slope == pytest.approx(1.0)
        assert fit.r_squared == pytest.approx(1.0)

    def test_degenerate_inputs(self):
        with pytest.raises(ValueError):
            rate_fit([1e-1, 1e-2], [1.0, 2.0])
        with pytest.raises(ValueError):
            rate_fit([1e-1, 1e-2, -1e-3], [1.0, 2.0, 3.0])
        with pytest.raises(ValueError):
            rate_fit([1e-1, 1e-2, 1e-3], [1.0, 0.0, 3.0])


class TestTheoreticalRate:
    def test_published_exponents(self):
        assert theoretical_rate(-1 / 16, 0.0, 9 / 8) == pytest.approx(119 / 128)
        assert theoretical_rate(2.0, 0.0, 1.0) == pytest.approx(1.0)
        assert theoretical_rate(0.5, 0.0, 1.0) == pytest.approx(1.0)  # min(1, 3/2)

    def test_out_of_region(self):
        with pytest.raises(ValueError):
            theoretical_rate(-0.5, 0.0, 2.0)  # 1 + beta*p = 0
        with pytest.raises(ValueError):
            theoretical_rate(0.0, 0.0, 1.0)


class TestRateExperiments:
    def test_negative_beta_regime(self):
        exp = rate_experiment(-1 / 16, 0.0, 9 / 8)
        assert abs(exp.fit.slope - exp.theoretical_exponent) < 0.1

    def test_beta_above_one_regime(self):
        exp = rate_experiment(1.5, 1.0, 2.0)
        assert abs(exp.fit.slope - 2.0) < 0.1

    def test_mid_beta_regime_lower_bound(self):
        # the eps**p term carries a vanishing coefficient at lam = 0, so only
        # a lower bound on the slope is asserted in this regime
        exp = rate_experiment(0.5, 1.0, 1.0)
        assert exp.fit.slope >= exp.theoretical_exponent - 0.1

    def test_rows_structure(self):
        exp = rate_experiment(1.5, 0.0, 1.0, eps_grid=(1e-1, 1e-2, 1e-3))
        rows = list(exp.rows())
        assert len(rows) == 3
        assert set(rows[0]) == {
            "epsilon", "distance_p_power", "theoretical_exponent", "fitted_slope",
        }


def test_constant_kernel_telescopes_in_mass():
    k = constant_kernel(1.0)
    assert lp_distance_mass(k, k, 1.0, 1.0) == 0.0
    assert lp_norm(k, 2.0, 1.0) == pytest.approx(2.0)
