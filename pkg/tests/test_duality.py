"""Model-agnostic Legendre duality engine.

The REM handle gives closed forms on both sides, so it anchors the
engine tests; the ising spline handle exercises the capped-domain and
expansion paths. The max-representation (l_star / gamma_star /
corollary_check) is checked against the two proof identities for the
witness function.
"""

import math

import numpy as np
import pytest

from glassdual.core import MixtureSpec, StepDistribution
from glassdual.duality import (
    FreeEnergyHandle,
    GridFunction,
    SearchBox,
    concavity_check,
    corollary_check,
    gamma_star,
    ising_handle,
    l_star,
    legendre_inf_F,
    legendre_sup_V,
    oracle_handle,
    rem_handle,
    roundtrip_gap,
    spherical_handle,
    stationary_energy,
)
from glassdual.errors import DomainError, NumericsError
from glassdual.ising import ParisiNumerics, parisi_family
from glassdual.oracle import exact_free_energy, sample_disorder
from glassdual.rem import rem_critical_beta, rem_free_energy, rem_squared_free_energy

FAST = ParisiNumerics(quad_nodes=24, x_points=512, multistart=4, seed=1234, tol=1e-9)
SK_HALF = MixtureSpec(((2, math.sqrt(0.5)),), "ising")
BETA_C = rem_critical_beta()

ZERO_HANDLE = FreeEnergyHandle(name="zero", dim=1, evaluate=lambda b: 0.0)


@pytest.fixture(scope="module")
def sk_family():
    return parisi_family(SK_HALF, [0.4, 0.8, 1.2], k=1, num=FAST)


@pytest.fixture(scope="module")
def sk_handle(sk_family):
    return ising_handle(
        SK_HALF, k=1, num=FAST, beta_max=4.0, grid_points=16, family=dict(sk_family)
    )


@pytest.fixture(scope="module")
def corollary_report(sk_family):
    return corollary_check(SK_HALF, 0.8, k=1, num=FAST, family=dict(sk_family))


def rem_v_evaluator(marr) -> float:
    # natural extension beyond m = 1: the sup side is 0 there
    return rem_squared_free_energy(min(float(marr[0]), 1.0))


class TestHandles:
    def test_dim_floor(self):
        with pytest.raises(DomainError):
            FreeEnergyHandle(name="bad", dim=0, evaluate=lambda b: 0.0)

    def test_rem_handle_matches_closed_form(self):
        H = rem_handle()
        for b in (0.3, BETA_C, 2.5):
            assert H.evaluate(np.array([b])) == rem_free_energy(b)
        assert H.evaluate(np.array([0.0])) == 0.0
        assert H.derivative(np.array([2.0]))[0] == pytest.approx(BETA_C, abs=1e-15)

    def test_oracle_handle(self):
        s = sample_disorder("rem", None, 8, seed=3)
        H = oracle_handle(s)
        assert H.evaluate(np.array([1.1])) == exact_free_energy(s, 1.1)
        assert "rem" in H.name

    def test_spherical_handle_annealed_regime(self):
        H = spherical_handle(dim=2, k=1, num=FAST)
        val = H.evaluate(np.array([0.0, 0.2]))
        assert val == pytest.approx(0.005, abs=1e-9)


class TestLegendreSupV:
    def test_rem_halfway(self):
        res = legendre_sup_V(rem_handle(), 0.5)
        assert res.value == pytest.approx(math.log(2.0), abs=1e-8)
        assert res.arg[0] == pytest.approx(2.0 * BETA_C, abs=1e-4)
        assert not res.boundary

    def test_rem_at_one_is_flat_zero(self):
        # objective is identically 0 on (0, beta_c]; value matters, argmax not
        res = legendre_sup_V(rem_handle(), 1.0)
        assert abs(res.value) <= 1e-9

    def test_box_clamps_to_handle_cap(self):
        # evaluator only exists on [0, 2]; the default box reaches 4 and
        # must shrink to the cap instead of probing past the domain
        def ev(arr):
            b = float(arr[0])
            if b > 2.0:
                raise DomainError("out of domain")
            return min(b, 1.2)

        capped = FreeEnergyHandle(name="capped", dim=1, evaluate=ev, beta_cap=2.0)
        res = legendre_sup_V(capped, 1.0)
        assert res.value == pytest.approx(0.5, abs=1e-6)
        assert res.arg[0] == pytest.approx(1.0, abs=1e-4)

    def test_zero_handle(self):
        res = legendre_sup_V(ZERO_HANDLE, 0.7)
        assert res.value == 0.0
        assert res.arg[0] == 0.0
        assert res.boundary

    def test_ising_half(self, sk_handle):
        # F <= beta^2/4 with equality only at beta -> 0: sup of
        # F - beta^2/4 is 0, up to spline wiggle near the origin
        res = legendre_sup_V(sk_handle, 0.5)
        assert abs(res.value) <= 5e-3

    def test_nonpositive_m_rejected(self):
        with pytest.raises(DomainError):
            legendre_sup_V(rem_handle(), 0.0)

    def test_escape_raises_with_advice(self):
        # beta* = beta_c / m = 23.5 sits far outside the default box
        with pytest.raises(NumericsError, match="enlarge"):
            legendre_sup_V(rem_handle(), 0.05)

    def test_escape_resolves_in_a_larger_box(self):
        res = legendre_sup_V(rem_handle(), 0.05, SearchBox(hi=32.0))
        want = math.log(2.0) / 0.05 - math.log(2.0)
        assert res.value == pytest.approx(want, abs=1e-6)
        assert res.arg[0] == pytest.approx(BETA_C / 0.05, abs=1e-3)

    @pytest.mark.parametrize("seed", [0, 1])
    def test_one_sided_bound(self, seed):
        # V(m) >= F(beta) - penalty for every pair, straight from the sup
        H = rem_handle()
        rng = np.random.default_rng(seed)
        for _ in range(25):
            m = float(rng.uniform(0.3, 1.0))
            b = float(rng.uniform(0.1, 3.5))
            v = legendre_sup_V(H, m).value
            assert v >= rem_free_energy(b) - 0.5 * b * b * m - 1e-9

    def test_monotone_in_m(self):
        H = rem_handle()
        rng = np.random.default_rng(11)
        for _ in range(10):
            m1 = float(rng.uniform(0.3, 0.9))
            m2 = float(rng.uniform(m1, 1.0))
            v1 = legendre_sup_V(H, m1).value
            v2 = legendre_sup_V(H, m2).value
            assert v1 >= v2 - 1e-9


class TestLegendreInfF:
    def test_rem_cold(self):
        beta = 2.0 * BETA_C
        res = legendre_inf_F(rem_v_evaluator, beta)
        assert res.value == pytest.approx(3.0 * math.log(2.0), abs=2e-6)
        assert res.arg[0] == pytest.approx(0.5, abs=1e-3)

    def test_rem_warm_recovers_quadratic(self):
        beta = 0.6
        res = legendre_inf_F(rem_v_evaluator, beta)
        assert res.value == pytest.approx(rem_free_energy(beta), abs=1e-6)

    def test_vanishing_beta_sits_at_full_energy(self):
        res = legendre_inf_F(rem_v_evaluator, 1e-3)
        assert res.value <= 1e-6
        assert res.arg[0] == pytest.approx(1.0, abs=1e-2)


class TestStationaryEnergy:
    def test_rem_cold_branch(self):
        m = stationary_energy(rem_handle(), 2.0 * BETA_C)
        assert m.as_array()[0] == pytest.approx(0.5, abs=1e-12)

    def test_rem_warm_branch(self):
        m = stationary_energy(rem_handle(), 0.5)
        assert m.as_array()[0] == pytest.approx(1.0, abs=1e-12)

    def test_ising_rs(self, sk_handle):
        m = stationary_energy(sk_handle, 0.8)
        assert m.as_array()[0] == pytest.approx(0.5, abs=5e-3)

    def test_requires_positive_beta(self):
        with pytest.raises(DomainError):
            stationary_energy(rem_handle(), 0.0)

    def test_nonpositive_energies_rejected(self):
        H = FreeEnergyHandle(
            name="decreasing",
            dim=1,
            evaluate=lambda b: -float(b[0]),
            derivative=lambda b: np.array([-1.0]),
        )
        with pytest.raises(DomainError, match=r"\[1\]"):
            stationary_energy(H, 1.0)

    def test_finite_difference_fallback(self):
        H = FreeEnergyHandle(name="rem-nod", dim=1, evaluate=rem_handle().evaluate)
        m = stationary_energy(H, 2.0 * BETA_C)
        assert m.as_array()[0] == pytest.approx(0.5, abs=1e-4)


class TestConcavityCheck:
    def test_rem(self):
        report = concavity_check(rem_handle(), np.linspace(4.0 / 30, 4.0, 30))
        assert report["max_violation"] <= 1e-9

    def test_linear_in_t_handle(self):
        H = FreeEnergyHandle(
            name="linear", dim=1, evaluate=lambda b: 0.3 * float(b[0]) ** 2
        )
        report = concavity_check(H, np.linspace(0.1, 3.0, 30))
        assert report["max_violation"] <= 1e-12

    def test_ising_spline(self, sk_handle):
        # cheap 16-point spline wiggles at a few 1e-6; the tight bound
        # belongs to the production-grid handle
        report = concavity_check(sk_handle, np.linspace(4.0 / 30, 4.0, 30))
        assert report["max_violation"] <= 1e-5

    def test_report_shape(self):
        report = concavity_check(rem_handle(), np.linspace(0.1, 2.0, 10))
        assert {"max_violation", "second_difference", "t_at_max", "coordinate"} <= set(
            report
        )
        assert report["coordinate"] == 1

    def test_grid_validation(self):
        H = rem_handle()
        with pytest.raises(DomainError):
            concavity_check(H, [0.1, 0.2])
        with pytest.raises(DomainError):
            concavity_check(H, [0.0, 0.5, 1.0])
        with pytest.raises(DomainError):
            concavity_check(H, [0.1, 0.2, 0.5])


class TestRoundtrip:
    @pytest.mark.parametrize("beta", [0.3, BETA_C, 3.0])
    def test_rem(self, beta):
        rep = roundtrip_gap(rem_handle(), beta)
        assert rep.gaps["roundtrip"] <= 1e-6
        assert rep.direction == "roundtrip"
        assert rep.flags["model"] == "rem"

    def test_rem_vanishing_beta(self):
        rep = roundtrip_gap(rem_handle(), 0.05)
        assert rep.gaps["roundtrip"] <= 1e-6

    @pytest.mark.parametrize("beta", [0.8, 1.5])
    def test_ising_spline(self, sk_handle, beta):
        # exercises the capped-box expansion: tiny-m probes on the inf side
        # want beta* ~ 1/m, far beyond the spline domain
        rep = roundtrip_gap(sk_handle, beta)
        assert rep.gaps["roundtrip"] <= 5e-3
        assert not rep.flags["inf_boundary"]

    def test_report_optimizers(self, sk_handle):
        rep = roundtrip_gap(sk_handle, 0.8)
        for key in ("beta_star", "m_star", "free_energy", "recovered", "v_at_m_star"):
            assert key in rep.optimizers
        assert rep.optimizers["m_star"][0] == pytest.approx(0.5, abs=5e-3)


class TestGridFunction:
    def test_full_interval_matches_trapezoid(self):
        rng = np.random.default_rng(8)
        vals = rng.uniform(-1.0, 1.0, 33)
        f = GridFunction(tuple(vals))
        want = float(np.trapezoid(vals, dx=1.0 / 32))
        assert f.integral(0.0, 1.0) == pytest.approx(want, abs=1e-14)

    def test_partial_cells_exact_for_linear(self):
        f = GridFunction.from_callable(lambda x: 2.0 * x, 17)
        a, b = 0.13, 0.81  # off-grid endpoints
        assert f.integral(a, b) == pytest.approx(b * b - a * a, abs=1e-12)

    def test_bounds_checked(self):
        f = GridFunction((0.0, 1.0))
        with pytest.raises(DomainError):
            f.integral(-0.1, 0.5)
        with pytest.raises(DomainError):
            f.integral(0.7, 0.2)

    def test_values_must_be_finite(self):
        with pytest.raises(DomainError):
            GridFunction((0.0, math.inf))

    def test_needs_two_points(self):
        with pytest.raises(DomainError):
            GridFunction((1.0,))


class TestLStar:
    def test_positive_constant_at_zero_beta(self):
        f = GridFunction.from_callable(lambda s: 0.7, 9)
        # the point mass at 1 zeroes both terms; nothing goes lower
        assert l_star(f, 0.0, SK_HALF, k=1) == pytest.approx(0.0, abs=1e-12)

    def test_zero_function(self):
        f = GridFunction.from_callable(lambda s: 0.0, 9)
        assert l_star(f, 0.0, SK_HALF, k=1) == pytest.approx(0.0, abs=1e-12)

    def test_negative_constant(self):
        f = GridFunction.from_callable(lambda s: -1.0, 9)
        # indicator at q = 0 collects the whole mass
        assert l_star(f, 0.0, SK_HALF, k=1) == pytest.approx(-1.0, abs=1e-9)

    def test_witness_identity(self):
        beta = 0.8
        f = GridFunction.from_callable(lambda s: -0.5 * beta * beta * s, 65)
        # f_beta cancels the xi' term pointwise, so the objective is 0
        # for every alpha, not only at the minimizer
        assert abs(l_star(f, beta, SK_HALF, k=1)) <= 1e-10

    def test_negative_beta_rejected(self):
        f = GridFunction.from_callable(lambda s: 0.0, 9)
        with pytest.raises(DomainError):
            l_star(f, -0.5, SK_HALF)


class TestGammaStar:
    def test_empty_family_rejected(self):
        f = GridFunction.from_callable(lambda s: 0.0, 9)
        with pytest.raises(DomainError):
            gamma_star(f, SK_HALF, [])

    def test_singleton_family(self):
        f = GridFunction.from_callable(lambda s: 0.0, 9)
        fam = [(StepDistribution.constant(1.0), 0.0)]
        assert gamma_star(f, SK_HALF, fam) == 0.0

    def test_infinite_entries_skipped(self):
        f = GridFunction.from_callable(lambda s: 0.0, 9)
        fam = [
            (StepDistribution.point_mass_at_one(), math.inf),
            (StepDistribution.constant(1.0), 0.25),
        ]
        assert gamma_star(f, SK_HALF, fam) == pytest.approx(-0.25, abs=1e-15)

    def test_all_infinite_rejected(self):
        f = GridFunction.from_callable(lambda s: 0.0, 9)
        fam = [(StepDistribution.point_mass_at_one(), math.inf)]
        with pytest.raises(DomainError):
            gamma_star(f, SK_HALF, fam)


class TestCorollary:
    def test_witness_identities(self, corollary_report):
        assert corollary_report.gaps["l_star_at_witness"] <= 1e-8
        assert corollary_report.gaps["gamma_star_at_witness"] <= 5e-3
        assert corollary_report.gaps["witness_attainment"] <= 5e-3

    def test_no_candidate_beats_f(self, corollary_report):
        assert corollary_report.gaps["excess_over_F"] <= 5e-3

    def test_sign_convention_flags(self, corollary_report):
        assert corollary_report.flags["witness_sign"] == "-(beta^2/2) xi'"
        assert corollary_report.flags["witness_sign_l_star_zero"]
        assert corollary_report.flags["witness_sign_gamma_star_matches"]
        # the literal sign satisfies the L_* identity but not the Gamma^* one
        assert corollary_report.flags["literal_sign_l_star_zero"]
        assert not corollary_report.flags["literal_sign_gamma_star_matches"]

    def test_family_must_contain_beta(self, sk_family):
        with pytest.raises(DomainError):
            corollary_check(SK_HALF, 0.9, k=1, num=FAST, family=dict(sk_family))

    def test_nonpositive_beta_rejected(self):
        with pytest.raises(DomainError):
            corollary_check(SK_HALF, 0.0, k=1, num=FAST)
