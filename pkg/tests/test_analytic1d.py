import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from craquelure.analytic1d import (
    Bar1DParams,
    Layer1DQuery,
    crack_energy,
    critical_time,
    decay_rate,
    delta2,
    f_hat,
    halving_times,
    layer_point,
    layer_width,
    optimal_crack_count,
    u_continuous,
    verify_centered_optimality,
)
from craquelure.errors import ParameterError

BAR = Bar1DParams(half_length_L=6.5, mu=1.0, beta=0.15, Gc=1.0)


# ----------------------------------------------------------------------
# independent oracles
# ----------------------------------------------------------------------

def simpson_bar_energy(L, params, n=20000):
    """Composite-Simpson value of (1/2) mu |u'|^2 + beta |u - x|^2 at t = 1."""
    k = decay_rate(params)

    def du(x):
        return 1.0 - math.cosh(k * x) / math.cosh(k * L)

    def integrand(x):
        u = x - math.sinh(k * x) / (k * math.cosh(k * L))
        return 0.5 * params.mu * du(x) ** 2 + params.beta * (u - x) ** 2

    xs = np.linspace(-L, L, n + 1)
    ys = np.array([integrand(x) for x in xs])
    h = 2 * L / n
    return h / 3 * (ys[0] + ys[-1] + 4 * ys[1:-1:2].sum() + 2 * ys[2:-1:2].sum())


def bisect_equal_energy(L, params, lo=1e-6, hi=100.0):
    """Time where the 0-crack and 1-crack closed-form energies cross."""

    def gap(t):
        return crack_energy(t, L, 0, params) - crack_energy(t, L, 1, params)

    assert gap(lo) < 0 < gap(hi)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if gap(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def bisect_layer_point(query, L, params):
    k = decay_rate(params)
    rhs = math.cosh(k * L) * math.cosh(k * query.x_star) / math.cosh(k * query.L_star)
    lo, hi = 0.0, L
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if math.cosh(k * mid) < rhs:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ----------------------------------------------------------------------
# decay rate
# ----------------------------------------------------------------------

class TestDecayRate:
    def test_reference_value(self):
        assert_allclose(decay_rate(BAR), 0.5477225575051661, rtol=1e-12)

    def test_unit_case(self):
        assert decay_rate(Bar1DParams(1.0, mu=1.0, beta=0.5)) == 1.0

    def test_stiffness_scaling_halves(self):
        k1 = decay_rate(Bar1DParams(1.0, mu=1.0, beta=0.15))
        k4 = decay_rate(Bar1DParams(1.0, mu=4.0, beta=0.15))
        assert_allclose(k4, k1 / 2, rtol=1e-14)
        assert_allclose(k4, 0.27386127875258304, rtol=1e-12)


class TestContinuousSolution:
    def test_odd_function_vanishes_at_center(self):
        assert u_continuous(2.3, 0.0, BAR) == 0.0

    def test_neumann_ends_by_central_difference(self):
        h = 1e-6
        for x_end in (-6.5, 6.5):
            du = (u_continuous(1.0, x_end + h, BAR) - u_continuous(1.0, x_end - h, BAR)) / (2 * h)
            assert abs(du) < 1e-8

    def test_end_value_closed_form(self):
        k = decay_rate(BAR)
        expected = 6.5 - math.tanh(k * 6.5) / k
        got = u_continuous(1.0, 6.5, BAR)
        assert_allclose(got, expected, rtol=1e-14)
        assert_allclose(got, 4.6772077945187, rtol=1e-12)


class TestCrackFreeEnergy:
    def test_vanishes_at_zero_length(self):
        assert f_hat(1e-8, BAR) < 1e-12

    def test_reference_values_against_simpson(self):
        for L, frozen in [(6.5, 4.677207794518700), (12.5, 10.674262268766333)]:
            val = f_hat(L, BAR)
            assert_allclose(val, frozen, rtol=1e-12)
            assert abs(val - simpson_bar_energy(L, BAR)) < 1e-6

    def test_monotone_and_below_linear_bound(self):
        grid = np.arange(0.5, 20.5, 0.5)
        vals = [f_hat(L, BAR) for L in grid]
        assert all(a < b for a, b in zip(vals, vals[1:]))
        assert all(v < BAR.mu * L for v, L in zip(vals, grid))


class TestHalvingGap:
    def test_vanishes_at_zero_length(self):
        assert delta2(1e-8, BAR) < 1e-12

    def test_reference_value(self):
        val = delta2(6.5, BAR)
        assert_allclose(val, 1.6267853770961578, rtol=1e-12)
        # oracle: assemble from the Simpson-checked energies
        assert abs(val - (f_hat(6.5, BAR) - 2 * f_hat(3.25, BAR))) < 1e-14

    def test_increasing(self):
        grid = np.arange(0.5, 20.5, 0.5)
        vals = [delta2(L, BAR) for L in grid]
        assert all(v > 0 for v in vals)
        assert all(a < b for a, b in zip(vals, vals[1:]))
        assert delta2(6.5, BAR) < delta2(12.5, BAR)


class TestCriticalTime:
    def test_reference_value_and_bisection_oracle(self):
        t1 = critical_time(6.5, 1, BAR)
        assert_allclose(t1, 0.7840339522495882, rtol=1e-12)
        assert abs(t1 - bisect_equal_energy(6.5, BAR)) < 1e-10

    def test_identity_with_halving_gap(self):
        for L in (1.0, 3.25, 6.5, 12.5):
            assert_allclose(
                critical_time(L, 1, BAR), math.sqrt(BAR.Gc / delta2(L, BAR)), rtol=1e-12
            )

    @pytest.mark.parametrize("L", [6.5, 12.5])
    def test_strictly_increasing_in_crack_count(self, L):
        ts = [critical_time(L, m, BAR) for m in range(1, 11)]
        assert all(a < b for a, b in zip(ts, ts[1:]))

    def test_rejects_bad_arguments(self):
        with pytest.raises(ParameterError):
            critical_time(6.5, 0, BAR)
        with pytest.raises(ParameterError):
            critical_time(-1.0, 1, BAR)


class TestHalvingTimes:
    def test_first_element(self):
        hs = halving_times(6.5, 4, BAR)
        assert hs[0] == critical_time(6.5, 1, BAR)

    def test_strictly_increasing(self):
        hs = halving_times(6.5, 4, BAR)
        assert all(a < b for a, b in zip(hs, hs[1:]))

    def test_second_element_is_half_bar_transition(self):
        hs = halving_times(6.5, 2, BAR)
        assert_allclose(hs[1], critical_time(3.25, 1, BAR), rtol=1e-14)
        assert_allclose(hs[1], 1.0703040873679293, rtol=1e-12)


class TestLayerGeometry:
    QUERY = Layer1DQuery(x_star=0.5, L_star=6.5)

    def test_identity_case(self):
        x = layer_point(self.QUERY, 6.5, BAR)
        assert_allclose(x, 0.5, rtol=1e-10)

    def test_reference_value_against_bisection(self):
        x = layer_point(self.QUERY, 12.5, BAR)
        assert_allclose(x, 7.331066895583323, rtol=1e-12)
        assert abs(x - bisect_layer_point(self.QUERY, 12.5, BAR)) < 1e-9
        assert_allclose(12.5 - x, 5.168933104416677, rtol=1e-10)

    def test_offset_nearly_independent_of_length(self):
        offsets = [L - layer_point(self.QUERY, L, BAR) for L in np.linspace(10, 20, 21)]
        assert max(offsets) - min(offsets) < 0.05

    def test_no_solution_raises(self):
        with pytest.raises(ParameterError):
            layer_point(self.QUERY, 0.1, BAR)

    def test_width_limits(self):
        near = Layer1DQuery(x_star=6.5 - 1e-9, L_star=6.5)
        assert layer_width(near, BAR) < 1e-8

    def test_width_reference_value_and_asymptote(self):
        b = layer_width(self.QUERY, BAR)
        assert_allclose(b, 5.168341361827872, rtol=1e-10)
        assert abs(b - (20.0 - layer_point(self.QUERY, 20.0, BAR))) < 0.02

    def test_width_grows_with_adhesion_toward_span(self):
        # b increases with beta at a fixed query, approaching L* - x* from
        # below: a stiffer foundation pushes the matching point outward
        b_soft = layer_width(self.QUERY, BAR)
        stiff = Bar1DParams(6.5, mu=1.0, beta=0.6, Gc=1.0)
        b_stiff = layer_width(self.QUERY, stiff)
        assert b_soft < b_stiff < self.QUERY.L_star - self.QUERY.x_star
        # consistency with the same large-L limit under the stiff foundation
        assert abs(b_stiff - (20.0 - layer_point(self.QUERY, 20.0, stiff))) < 0.02

    def test_query_validation(self):
        with pytest.raises(ParameterError):
            Layer1DQuery(x_star=2.0, L_star=1.0)


class TestOptimalCrackCount:
    def test_zero_time(self):
        assert optimal_crack_count(0.0, 6.5, BAR) == 0

    def test_threshold_bracketing(self):
        t1 = critical_time(6.5, 1, BAR)
        assert optimal_crack_count(0.99 * t1, 6.5, BAR) == 0
        assert optimal_crack_count(1.01 * t1, 6.5, BAR) == 1

    def test_matches_brute_force_energy_scan(self):
        for t in np.linspace(0.0, 5.0, 41):
            best = min(range(11), key=lambda m: crack_energy(t, 6.5, m, BAR))
            # replicate the tie-break toward smaller m
            got = optimal_crack_count(t, 6.5, BAR, m_max=10)
            assert got == best

    def test_non_decreasing_in_time(self):
        counts = [optimal_crack_count(t, 6.5, BAR) for t in np.linspace(0, 6, 121)]
        assert all(a <= b for a, b in zip(counts, counts[1:]))

    def test_centered_crack_is_cheapest(self):
        off, cen = verify_centered_optimality(2.0, 4.5, BAR, t=1.0)
        assert off > cen
        off_eq, cen_eq = verify_centered_optimality(3.25, 3.25, BAR, t=1.0)
        assert_allclose(off_eq, cen_eq, rtol=1e-14)

    def test_parameter_validation(self):
        with pytest.raises(ParameterError):
            optimal_crack_count(-1.0, 6.5, BAR)
        with pytest.raises(ParameterError):
            Bar1DParams(half_length_L=0.0)
