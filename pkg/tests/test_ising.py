"""Parisi PDE, functional minimization, and the Gamma transform for ising mixtures."""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from glassdual import (
    DomainError,
    GammaResult,
    MixtureSpec,
    NumericsError,
    ParisiNumerics,
    StepDistribution,
    UsageError,
    gamma_transform,
    ising_derivative,
    parisi_family,
    parisi_functional,
    parisi_minimize,
    parisi_pde_value,
    verify_thm7,
)

SK_HALF = MixtureSpec(terms=((2, math.sqrt(0.5)),), kind="ising")
CONST = StepDistribution.constant()
DELTA1 = StepDistribution.point_mass_at_one()

# cheap solver settings; closed-form candidate paths keep RS values exact
FAST = ParisiNumerics(quad_nodes=24, x_points=512, multistart=4, seed=1234, tol=1e-9)


@pytest.fixture(scope="module")
def sol15():
    return parisi_minimize(SK_HALF, 1.5, 2, FAST)


class TestNumericsConfig:
    def test_validation(self):
        with pytest.raises(DomainError):
            ParisiNumerics(quad_nodes=4)
        with pytest.raises(DomainError):
            ParisiNumerics(x_points=32)
        with pytest.raises(DomainError):
            ParisiNumerics(tol=0.0)
        with pytest.raises(DomainError):
            ParisiNumerics(x_max=-1.0)


class TestPdeValue:
    def test_constant_alpha_closed_form(self):
        # a_l = 1 path collapses to beta^2 xi'(1) / 2
        assert parisi_pde_value(SK_HALF, 0.8, CONST, FAST) == pytest.approx(0.32, abs=1e-13)

    def test_tiny_beta(self):
        assert abs(parisi_pde_value(SK_HALF, 1e-8, CONST, FAST)) < 1e-12

    def test_point_mass_matches_quadrature_oracle(self):
        # E_z log cosh(z) at sigma^2 = xi'(1) = 1, adaptive quadrature
        ref, _ = quad(
            lambda z: math.log(math.cosh(z)) * math.exp(-0.5 * z * z) / math.sqrt(2 * math.pi),
            -12.0, 12.0, epsabs=1e-13,
        )
        assert ref == pytest.approx(0.374567207491438, abs=1e-12)
        num = ParisiNumerics(quad_nodes=40, x_points=2048, multistart=1, seed=0, tol=1e-9)
        assert parisi_pde_value(SK_HALF, 1.0, DELTA1, num) == pytest.approx(ref, abs=5e-7)

    def test_non_ising_spec_rejected(self):
        spherical = MixtureSpec(terms=((2, 0.5),), kind="spherical")
        with pytest.raises(UsageError):
            parisi_pde_value(spherical, 1.0, CONST, FAST)

    def test_grid_too_small(self):
        cramped = ParisiNumerics(quad_nodes=24, x_points=128, x_max=2.0, multistart=1)
        with pytest.raises(NumericsError) as err:
            parisi_pde_value(SK_HALF, 3.0, DELTA1, cramped)
        assert err.value.advice is not None

    def test_doubling_invariance(self):
        # refining quadrature and grid moves the value by <= 1e-7
        rng = np.random.default_rng(42)
        base = ParisiNumerics(quad_nodes=40, x_points=2048, multistart=1)
        fine = ParisiNumerics(quad_nodes=80, x_points=4096, multistart=1)
        for _ in range(20):
            beta = float(rng.uniform(0.2, 2.0))
            k = int(rng.integers(0, 4))
            qs = np.sort(rng.uniform(0.05, 0.95, size=k))
            levels = np.sort(rng.uniform(0.0, 1.0, size=k + 1))
            alpha = StepDistribution(
                knots=(0.0, *map(float, qs), 1.0),
                levels=tuple(float(a) for a in levels),
            )
            v0 = parisi_pde_value(SK_HALF, beta, alpha, base)
            v1 = parisi_pde_value(SK_HALF, beta, alpha, fine)
            assert abs(v0 - v1) <= 1e-7


class TestFunctional:
    @pytest.mark.parametrize("beta", [0.5, 0.8, 1.3])
    def test_annealed_value_exact(self, beta):
        # closed-form path: P(alpha == 1) = beta^2 xi(1) / 2
        assert parisi_functional(SK_HALF, beta, CONST, FAST) == pytest.approx(
            beta * beta * 0.25, abs=1e-13
        )

    def test_point_mass_has_no_correction(self):
        pde = parisi_pde_value(SK_HALF, 1.0, DELTA1, FAST)
        assert parisi_functional(SK_HALF, 1.0, DELTA1, FAST) == pde


class TestMinimize:
    @pytest.mark.parametrize("beta", [0.2, 0.5, 0.8])
    def test_replica_symmetric_values(self, beta):
        sol = parisi_minimize(SK_HALF, beta, 2, FAST)
        assert sol.value == pytest.approx(beta * beta / 4.0, abs=5e-4)
        assert sol.value <= beta * beta / 4.0 + 1e-10  # annealed bound
        assert sol.value == pytest.approx(sol.phi00 - sol.correction, abs=1e-12)

    def test_rsb_point(self, sol15):
        # below the annealed value, above the trivial bound F >= 0
        assert 0.0 < sol15.value < 1.5 * 1.5 * 0.25
        assert sol15.value == pytest.approx(sol15.phi00 - sol15.correction, abs=1e-12)
        assert sol15.derivative > 0.0

    def test_nested_k(self, sol15):
        sol_k1 = parisi_minimize(SK_HALF, 1.5, 1, FAST)
        assert sol15.value <= sol_k1.value + 1e-10

    def test_domain(self):
        with pytest.raises(DomainError):
            parisi_minimize(SK_HALF, 0.0, 2, FAST)
        with pytest.raises(UsageError):
            parisi_minimize(SK_HALF, 1.0, -1, FAST)


class TestDerivative:
    def test_rs_value(self):
        assert ising_derivative(SK_HALF, 0.8, CONST) == pytest.approx(0.4, abs=1e-14)

    def test_matches_finite_difference_in_rs_regime(self):
        # optimizer noise on the two offset solves dominates; budget 1e-4
        h = 1e-3
        fam = parisi_family(SK_HALF, [0.8 - h, 0.8, 0.8 + h], 2, FAST)
        fd = (fam[0.8 + h].value - fam[0.8 - h].value) / (2 * h)
        assert fam[0.8].derivative == pytest.approx(fd, abs=1e-4)

    def test_positive(self, sol15):
        assert ising_derivative(SK_HALF, 1.5, sol15.alpha_star) > 0.0


class TestGammaTransform:
    def test_constant_alpha_flat(self):
        res = gamma_transform(SK_HALF, CONST, FAST)
        assert isinstance(res, GammaResult)
        assert res.flat
        assert res.value == pytest.approx(0.0, abs=1e-12)

    def test_point_mass_escapes_bracket(self):
        with pytest.raises(NumericsError) as err:
            gamma_transform(SK_HALF, DELTA1, FAST)
        assert "bracket" in str(err.value.advice)

    def test_nonnegative_on_random_alphas(self):
        rng = np.random.default_rng(3)
        for _ in range(5):
            qs = np.sort(rng.uniform(0.1, 0.9, size=2))
            levels = np.sort(rng.uniform(0.1, 1.0, size=3))
            alpha = StepDistribution(
                knots=(0.0, *map(float, qs), 1.0),
                levels=tuple(float(a) for a in levels),
            )
            res = gamma_transform(SK_HALF, alpha, FAST)
            assert res.value >= -1e-10

    def test_at_minimizer(self, sol15):
        from glassdual import alpha_integral_xi_prime

        res = gamma_transform(SK_HALF, sol15.alpha_star, FAST)
        pen = 0.5 * 1.5**2 * alpha_integral_xi_prime(SK_HALF, sol15.alpha_star)
        assert res.value == pytest.approx(sol15.value - pen, abs=5e-4)
        assert res.beta_star == pytest.approx(1.5, abs=0.05)


class TestVerifyThm7:
    def test_rs_point(self):
        report = verify_thm7(SK_HALF, 0.8, 2, FAST)
        assert report.gaps["transform_at_minimizer"] <= 5e-3
        assert report.gaps["min_over_family"] <= 5e-3

    def test_family_must_contain_beta(self, sol15):
        with pytest.raises(DomainError):
            verify_thm7(SK_HALF, 0.8, 2, FAST, family={1.5: sol15})
