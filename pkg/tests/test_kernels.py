import numpy as np
import pytest
from scipy.integrate import quad
from scipy.stats import poisson

from eolstop import (
    CostParameters,
    IntensityModel,
    LostSalesConvention,
    OutOfGrid,
    build_kernel_table,
    build_named_intensity,
    constant_A,
    holding_cost,
    one_period_cost,
    order_cost,
    reformulated_cost,
    replacement_cost,
    stopping_cost,
)
from eolstop.kernels import (
    period_c3_term,
    unit_poisson_integrals,
    unit_poisson_integrals_quadrature,
)

from conftest import base_params

ARR = LostSalesConvention.ARRIVAL
PAP = LostSalesConvention.PAPER


def quad_L(params, model, k, x, upper):
    """Replacement cost by adaptive quadrature of the defining integrals."""
    lam = model.rates[k]

    def c2(u):
        return params.c2_bar + params.c3_bar * np.exp(-params.gamma * u)

    full = quad(lambda u: np.exp(-params.delta * (u - k)) * c2(u) * lam, k, k + 1,
                epsabs=1e-13, epsrel=1e-13)[0]
    sub = 0.0
    for i in range(upper + 1):
        sub += quad(
            lambda u: np.exp(-params.delta * (u - k)) * c2(u) * lam
            * poisson.pmf(i, lam * (u - k)),
            k, k + 1, epsabs=1e-13, epsrel=1e-13,
        )[0]
    return full - sub


def quad_H(params, model, k, x):
    lam = model.rates[k]
    return params.c1 * quad(
        lambda u: np.exp(-params.delta * (u - k))
        * sum(poisson.cdf(n, lam * (u - k)) for n in range(x)),
        k, k + 1, epsabs=1e-13, epsrel=1e-13,
    )[0]


class TestIntegralEngine:
    @pytest.mark.parametrize("lam", [0.0, 0.3, 2.0, 10.0, 50.259])
    @pytest.mark.parametrize("decay", [0.0, 0.005, 0.015])
    def test_closed_form_vs_gauss_legendre(self, lam, decay):
        imax = 40
        closed = unit_poisson_integrals(lam, decay, imax)
        gl = unit_poisson_integrals_quadrature(lam, decay, imax)
        assert np.allclose(closed, gl, rtol=1e-9, atol=1e-15)

    def test_sums_to_discount_integral(self):
        # sum_i P_i = int_0^1 e^{-decay s} ds once the Poisson mass is spent
        out = unit_poisson_integrals(3.0, 0.5, 200)
        assert out.sum() == pytest.approx((1 - np.exp(-0.5)) / 0.5, rel=1e-12)


class TestOrderCost:
    def test_zero_order_free(self):
        assert order_cost(base_params(K=1000), 0) == 0.0

    def test_fixed_plus_linear(self):
        assert order_cost(base_params(K=1000), 5) == 1500.0

    def test_unit_cost_only(self):
        assert order_cost(base_params(K=0), 1) == 100.0

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            order_cost(base_params(), -1)


class TestHoldingCost:
    def test_zero_inventory(self, base_model):
        p = base_params()
        for k in (0, 17, 49):
            assert holding_cost(p, base_model, k, 0) == 0.0

    def test_closed_form_single_unit(self):
        # delta = 0, lam = 2, c1 = 1, x = 1  ->  (1 - e^-2)/2
        m = IntensityModel(horizon=1, rates=np.array([2.0]))
        p = base_params(T=1, delta=0.0)
        val = holding_cost(p, m, 0, 1)
        assert val == pytest.approx((1 - np.exp(-2)) / 2, rel=1e-12)
        assert val == pytest.approx(0.43233235838169365, rel=1e-9)

    def test_no_demand_full_period(self):
        m = IntensityModel(horizon=1, rates=np.array([0.0]))
        p = base_params(T=1, delta=0.0)
        assert holding_cost(p, m, 0, 3) == pytest.approx(3.0, rel=1e-12)

    def test_against_quadrature(self, base_model):
        p = base_params()
        for k, x in [(0, 1), (0, 7), (12, 3), (49, 2)]:
            assert holding_cost(p, base_model, k, x) == pytest.approx(
                quad_H(p, base_model, k, x), rel=1e-9
            )

    def test_out_of_grid(self, base_model):
        with pytest.raises(OutOfGrid):
            holding_cost(base_params(), base_model, 50, 1)


class TestReplacementCost:
    def test_zero_when_no_penalty(self, base_model):
        p = base_params(c2_bar=0.0, c3_bar=0.0)
        for k, x in [(0, 0), (5, 3), (49, 10)]:
            assert replacement_cost(p, base_model, ARR, k, x) == pytest.approx(0.0, abs=1e-15)

    def test_vanishes_for_large_inventory(self, base_model):
        p = base_params()
        l0 = replacement_cost(p, base_model, ARR, 0, 0)
        assert replacement_cost(p, base_model, ARR, 0, 1200) < 1e-6 * l0

    def test_all_arrivals_lost_at_zero_stock(self):
        # delta = gamma = 0, lam = 2, c2 = 1: every arrival lost -> cost 2
        m = IntensityModel(horizon=1, rates=np.array([2.0]))
        p = base_params(T=1, delta=0.0, gamma=0.0, c2_bar=1.0, c3_bar=0.0)
        assert replacement_cost(p, m, ARR, 0, 0) == pytest.approx(2.0, rel=1e-12)

    @pytest.mark.parametrize("conv,upper_of", [(ARR, lambda x: x - 1), (PAP, lambda x: x)])
    def test_against_quadrature(self, base_model, conv, upper_of):
        p = base_params()
        for k, x in [(0, 0), (0, 4), (30, 2)]:
            assert replacement_cost(p, base_model, conv, k, x) == pytest.approx(
                quad_L(p, base_model, k, x, upper_of(x)), rel=1e-9
            )

    def test_conventions_differ_by_one_term(self, base_model):
        p = base_params()
        diff = replacement_cost(p, base_model, ARR, 3, 5) - replacement_cost(p, base_model, PAP, 3, 5)
        assert diff > 0  # the paper-printed sum subtracts one extra term


class TestOnePeriodCost:
    def test_zero_case(self, base_model):
        p = base_params(c2_bar=0.0, c3_bar=0.0)
        assert one_period_cost(p, base_model, ARR, 0, 0) == 0.0

    def test_is_sum_of_kernels(self, base_model):
        p = base_params()
        for k, x in [(0, 0), (7, 11), (49, 120)]:
            assert one_period_cost(p, base_model, ARR, k, x) == pytest.approx(
                holding_cost(p, base_model, k, x)
                + replacement_cost(p, base_model, ARR, k, x),
                rel=1e-15,
            )


class TestStoppingCost:
    def test_terminal_is_scrap_only(self, base_model):
        p = base_params()
        assert stopping_cost(p, base_model, 50, 10) == pytest.approx(250.0)

    def test_no_outside_source(self, base_model):
        p = base_params(c3_bar=0.0)
        assert stopping_cost(p, base_model, 3, 7) == pytest.approx(7 * 25.0)

    def test_undiscounted_collapses_to_mean_demand(self, base_model):
        p = base_params(delta=0.0, gamma=0.0)
        want = 25.0 * 4 + 200.0 * base_model.total_demand
        assert stopping_cost(p, base_model, 0, 4) == pytest.approx(want, rel=1e-12)

    def test_against_quadrature(self, base_model):
        p = base_params()
        k = 20
        tail = quad(
            lambda u: np.exp(-p.delta * (u - k)) * p.c3_bar * np.exp(-p.gamma * u)
            * base_model.rates[min(int(u), 49)],
            k, 50, epsabs=1e-10, epsrel=1e-12, limit=400,
            points=list(range(k, 51)),
        )[0]
        assert stopping_cost(p, base_model, k, 6) == pytest.approx(25.0 * 6 + tail, rel=1e-8)


class TestReformulatedCost:
    def test_vanishes_without_premium(self, base_model):
        p = base_params(c2_bar=0.0)
        assert reformulated_cost(p, base_model, ARR, 4, 0) == pytest.approx(0.0, abs=1e-15)

    def test_identity_with_one_period_cost(self, base_model):
        # C - C_tilde equals the period's outside-source integral
        p = base_params()
        for k in (0, 13, 49):
            c3k = period_c3_term(p, base_model, k)
            for x in (0, 1, 2, 9, 40):
                lhs = one_period_cost(p, base_model, ARR, k, x) - reformulated_cost(
                    p, base_model, ARR, k, x
                )
                assert lhs == pytest.approx(c3k, rel=1e-12)

    def test_paper_mode_identity_only_beyond_zero(self, base_model):
        # the printed x = 0 special case follows the arrival accounting, so
        # under the paper-printed convention the identity breaks exactly there
        p = base_params()
        c30 = period_c3_term(p, base_model, 0)
        for x in (1, 3, 8):
            lhs = one_period_cost(p, base_model, PAP, 0, x) - reformulated_cost(
                p, base_model, PAP, 0, x
            )
            assert lhs == pytest.approx(c30, rel=1e-12)
        mismatch = one_period_cost(p, base_model, PAP, 0, 0) - reformulated_cost(
            p, base_model, PAP, 0, 0
        )
        assert abs(mismatch - c30) > 1e-6

    def test_base_case_x0_against_quadrature(self, base_model):
        # premium integral: int_0^1 e^{-delta u} (c2 - c3)(u) lam(u) du
        p = base_params()
        lam = base_model.rates[0]
        want = quad(lambda u: np.exp(-p.delta * u) * p.c2_bar * lam, 0, 1,
                    epsabs=1e-13, epsrel=1e-13)[0]
        assert reformulated_cost(p, base_model, ARR, 0, 0) == pytest.approx(want, rel=1e-9)


class TestConstantA:
    def test_zero_without_outside_source(self, base_model):
        assert constant_A(base_params(c3_bar=0.0), base_model) == 0.0

    def test_undiscounted_total(self, base_model):
        p = base_params(delta=0.0, gamma=0.0)
        assert constant_A(p, base_model) == pytest.approx(200.0 * 500.0, rel=1e-9)


class TestKernelTable:
    def test_matches_direct_evaluation(self, base_model):
        p = base_params()
        for conv in (ARR, PAP):
            kt = build_kernel_table(p, base_model, conv, x_max=300)
            rng = np.random.default_rng(5)
            for _ in range(25):
                k = int(rng.integers(0, 50))
                x = int(rng.integers(0, 301))
                # 1e-12 relative to the kernel's natural scale
                tol = dict(rel=1e-12, abs=1e-12 * max(1.0, kt.L[k, 0]))
                assert kt.H[k, x] == pytest.approx(holding_cost(p, base_model, k, x), **tol)
                assert kt.L[k, x] == pytest.approx(
                    replacement_cost(p, base_model, conv, k, x), **tol)
                assert kt.C_tilde[k, x] == pytest.approx(
                    reformulated_cost(p, base_model, conv, k, x), **tol)
            assert kt.A == pytest.approx(constant_A(p, base_model), rel=1e-12)
            assert kt.stop_tail[17] == pytest.approx(
                stopping_cost(p, base_model, 17, 0), rel=1e-12)

    def test_monotonicity_and_additivity(self, base_kernels):
        kt = base_kernels
        scale = kt.L[:, :1]  # per-period magnitude for tolerance
        assert np.all(np.diff(kt.H, axis=1) >= -1e-12)
        assert np.all(np.diff(kt.L, axis=1) <= 1e-12 * np.maximum(scale, 1.0))
        assert np.all(kt.H >= 0) and np.all(kt.L >= 0)
        assert np.allclose(kt.C, kt.H + kt.L, rtol=0, atol=0)
        assert np.all(kt.H[:, 0] == 0)
        assert np.all(kt.L[:, -1] < 1e-6 * kt.L[:, 0])

    def test_pmf_mass_accounted(self, base_kernels):
        for pmf, tail in zip(base_kernels.pmfs, base_kernels.pmf_tails):
            assert pmf.sum() + tail[-1] == pytest.approx(1.0, abs=1e-9)
            assert tail[-1] < 1e-11


class TestTailSumIdentity:
    def test_expected_surplus_matches_direct_expectation(self):
        # E[(x - N)^+] = sum_{n<x} P{N <= n}, against the truncated pmf
        for mu in (0.4, 3.0, 17.5):
            grid = np.arange(200)
            pmf = poisson.pmf(grid, mu)
            for x in range(21):
                direct = np.sum(np.maximum(x - grid, 0) * pmf)
                tail_sum = sum(poisson.cdf(n, mu) for n in range(x))
                assert direct == pytest.approx(tail_sum, rel=1e-10, abs=1e-12)
