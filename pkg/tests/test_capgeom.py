import math

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from doublecap import capgeom

mpmath.mp.dps = 40


def mp_real_volume(d):
    """Independent oracle: regularized incomplete beta at 40 digits."""
    return mpmath.betainc((d - 1) / mpmath.mpf(2), mpmath.mpf(1) / 2, 0, mpmath.mpf(1) / 2, regularized=True)


class TestRealVolume:
    def test_circle(self):
        assert abs(capgeom.real_cap_volume(2) - 0.5) < 1e-12

    def test_sphere_closed_form(self):
        # numerator integrates sin over [0, pi/4], denominator is 1
        assert abs(capgeom.real_cap_volume(3) - (1 - 1 / math.sqrt(2))) < 1e-12

    @pytest.mark.parametrize("d", [2, 3, 4, 5, 8, 17, 64, 200, 1000, 1500])
    def test_against_mpmath(self, d):
        ref = float(mp_real_volume(d))
        assert capgeom.real_cap_volume(d) == pytest.approx(ref, rel=1e-11)
        assert capgeom.real_cap_volume_beta(d) == pytest.approx(ref, rel=1e-11)

    @pytest.mark.parametrize("d", [4, 32, 256, 1024, 4096, 65536])
    def test_log2_against_mpmath(self, d):
        ref = float(mpmath.log(mp_real_volume(d), 2))
        assert capgeom.log2_real_cap_volume(d) == pytest.approx(ref, abs=1e-9)

    def test_monotone_decreasing(self):
        vals = [capgeom.real_cap_volume(d) for d in range(2, 60)]
        assert all(a > b for a, b in zip(vals, vals[1:]))

    def test_range(self):
        for d in (2, 3, 10, 500):
            assert 0 < capgeom.real_cap_volume(d) <= 0.5

    def test_large_d_linear_from_log(self):
        v = capgeom.real_cap_volume(2000)
        assert v == pytest.approx(2.0 ** capgeom.log2_real_cap_volume(2000), rel=1e-12)
        assert v > 0

    def test_half_exponent_rate(self):
        assert abs(capgeom.log2_real_cap_volume(512) / 512 + 0.5) < 0.02

    def test_bad_dimension(self):
        with pytest.raises(ValueError):
            capgeom.real_cap_volume(1)


class TestComplexVolume:
    @pytest.mark.parametrize("N", range(2, 51))
    def test_quadrature_matches_power_of_two(self, N):
        assert abs(capgeom.complex_cap_volume(N) - 2.0 ** (1 - N)) < 1e-10

    @pytest.mark.parametrize("N", range(2, 21))
    def test_decomposed(self, N):
        assert abs(capgeom.complex_cap_volume_decomposed(N) - 2.0 ** (1 - N)) < 1e-8

    def test_closed(self):
        assert capgeom.complex_cap_volume_closed(4) == 0.125

    def test_real_exceeds_complex_at_same_index(self):
        assert capgeom.real_cap_volume(2) == pytest.approx(capgeom.complex_cap_volume(2), abs=1e-12)
        for N in range(3, 40):
            assert capgeom.real_cap_volume(N) > capgeom.complex_cap_volume(N)

    def test_sphere_surface(self):
        assert capgeom.sphere_surface(1) == pytest.approx(2 * math.pi)
        assert capgeom.sphere_surface(2) == pytest.approx(4 * math.pi)
        assert capgeom.sphere_surface(3) == pytest.approx(2 * math.pi**2)


class TestMonteCarlo:
    @pytest.mark.parametrize("kind, dim", [("complex", 2), ("complex", 3), ("real", 3), ("real", 7)])
    def test_within_four_sigma(self, kind, dim):
        exact = capgeom.complex_cap_volume_closed(dim) if kind == "complex" else capgeom.real_cap_volume(dim)
        est = capgeom.monte_carlo_cap_volume(kind, dim, 200_000, seed=5)
        assert abs(est.estimate - exact) <= 4 * math.sqrt(exact * (1 - exact) / est.trials)

    def test_thread_count_invariant(self):
        a = capgeom.monte_carlo_cap_volume("complex", 3, 300_000, seed=9, threads=1)
        b = capgeom.monte_carlo_cap_volume("complex", 3, 300_000, seed=9, threads=3)
        assert a == b

    def test_minimum_trials(self):
        with pytest.raises(ValueError):
            capgeom.monte_carlo_cap_volume("real", 3, 10, seed=0)

    def test_bad_kind(self):
        with pytest.raises(ValueError):
            capgeom.monte_carlo_cap_volume("quaternion", 3, 1000, seed=0)


class TestAsymptotic:
    def test_error_shrinks(self):
        err = {N: abs(capgeom.asymptotic_real_cap_volume(N) / capgeom.real_cap_volume(N) - 1) for N in (64, 256)}
        assert err[256] < 0.05
        assert err[256] < err[64]

    def test_log_form(self):
        assert capgeom.log2_asymptotic_real_cap_volume(100) == pytest.approx(
            math.log2(capgeom.asymptotic_real_cap_volume(100)), abs=1e-12
        )

    def test_converges_in_log(self):
        N = 4096
        diff = capgeom.log2_asymptotic_real_cap_volume(N) - capgeom.log2_real_cap_volume(N)
        assert abs(diff) < 1e-3


class TestBounds:
    def test_n5_row(self):
        r = capgeom.lower_bounds(5)
        assert r.N == 32
        assert r.complex_bound_bits == 31
        assert r.entanglement_bits == 26
        assert r.real_bound_bits == pytest.approx(-float(mpmath.log(mp_real_volume(32), 2)), abs=1e-9)

    def test_linear_bound_coefficient(self):
        coeff = capgeom.theorem2_bits(1, 1e-6) / 2
        assert abs(coeff - 0.293) < 1e-3
        assert capgeom.CORNER_THETA == pytest.approx((2 / math.sqrt(3)) ** math.sqrt(2))

    def test_table_shape(self):
        rows = capgeom.bounds_table(6)
        assert [r.n for r in rows] == list(range(1, 7))
        assert [r.N for r in rows] == [2, 4, 8, 16, 32, 64]

    @settings(max_examples=20, deadline=None)
    @given(st.integers(min_value=2, max_value=14))
    def test_bound_ordering(self, n):
        r = capgeom.lower_bounds(n)
        assert r.complex_bound_bits > r.entanglement_bits
        assert r.real_bound_bits > 0
        # the rigorous coefficient sits well below the conjectured 1/2
        assert r.theorem2_bits < r.real_bound_bits + 2

    def test_linear_floor(self):
        assert capgeom.lower_bounds(12).VN is None
        assert capgeom.lower_bounds(4).VN == pytest.approx(capgeom.real_cap_volume(16), rel=1e-11)

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            capgeom.lower_bounds(0)
        with pytest.raises(ValueError):
            capgeom.lower_bounds(3, epsilon=0.0)
