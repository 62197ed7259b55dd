"""Profile construction, Fourier data, and self-convolution tests."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bandclt.profiles import (PeriodizedProfile, ProfileError, VarianceProfile,
                              conv_grid_aligned, evaluate,
                              fejer_coefficient_sum, fourier_coeff,
                              fourier_coeff_many, fourier_transform,
                              profile_from_config, self_convolution_at_zero,
                              self_convolution_sequence, total_jump_variation)


def normalized_piecewise(breaks, raw_values):
    breaks = tuple(breaks)
    widths = [b2 - b1 for b1, b2 in zip(breaks, breaks[1:])]
    total = sum(v * w for v, w in zip(raw_values, widths))
    return VarianceProfile.piecewise(breaks, [v / total for v in raw_values])


@st.composite
def piecewise_profiles(draw):
    m = draw(st.integers(min_value=1, max_value=4))
    cuts = draw(st.lists(st.floats(-0.45, 0.45), min_size=m - 1,
                         max_size=m - 1, unique=True))
    breaks = sorted([-0.5, 0.5] + cuts)
    if any(b2 - b1 < 0.02 for b1, b2 in zip(breaks, breaks[1:])):
        breaks = [-0.5, 0.5]
        m = 1
    values = draw(st.lists(st.floats(0.05, 3.0), min_size=m, max_size=m))
    return normalized_piecewise(breaks[:m + 1], values[:m])


class TestConstruction:
    def test_uniform(self):
        u = VarianceProfile.uniform()
        assert u(0.0) == 1.0
        assert u(0.49) == 1.0
        assert u(0.51) == 0.0

    def test_normalization_rejected(self):
        with pytest.raises(ProfileError):
            VarianceProfile.piecewise([-0.5, 0.5], [1.05])

    def test_negative_rejected(self):
        with pytest.raises(ProfileError):
            VarianceProfile.piecewise([-0.5, 0.0, 0.5], [2.5, -0.5])

    def test_support_rejected(self):
        with pytest.raises(ProfileError):
            VarianceProfile.piecewise([-0.6, 0.6], [1.0 / 1.2])

    def test_unsorted_breaks_rejected(self):
        with pytest.raises(ProfileError):
            VarianceProfile.piecewise([0.5, -0.5], [1.0])

    def test_tabulated_normalization(self):
        g = np.full(65, 1.0)
        assert VarianceProfile.tabulated(g).sup_w == 1.0
        with pytest.raises(ProfileError):
            VarianceProfile.tabulated(np.full(65, 1.1))

    def test_nu_range(self):
        u = VarianceProfile.uniform()
        with pytest.raises(ProfileError):
            PeriodizedProfile(base=u, nu=1.5)
        with pytest.raises(ProfileError):
            PeriodizedProfile(base=u, nu=1e-14)

    def test_from_config_round_trip(self):
        cfg = {"kind": "piecewise", "breaks": [-0.5, 0.0, 0.5],
               "values": [0.5, 1.5]}
        p = profile_from_config(cfg)
        assert p.values == (0.5, 1.5)
        with pytest.raises(ProfileError):
            profile_from_config({"kind": "nope"})


class TestEvaluate:
    def test_periodization(self):
        p = PeriodizedProfile(base=VarianceProfile.uniform(), nu=0.5)
        # period 2: x = 2.3 reduces to 0.3
        assert evaluate(p, 2.3) == evaluate(p, 0.3)
        assert evaluate(p, 2.3) == 1.0

    def test_nu_zero_no_reduction(self):
        p = PeriodizedProfile(base=VarianceProfile.uniform(), nu=0.0)
        assert evaluate(p, 2.3) == 0.0
        with pytest.raises(ProfileError):
            p.period


class TestFourier:
    def test_uniform_coeff_is_sinc(self):
        p = PeriodizedProfile(base=VarianceProfile.uniform(), nu=0.5)
        for k in range(-6, 7):
            want = 1.0 if k == 0 else math.sin(math.pi * k * 0.5) / (math.pi * k * 0.5)
            assert fourier_coeff(p, k) == pytest.approx(want, abs=1e-14)

    def test_transform_oracle_half(self):
        # integral of e^{i pi x} over [-1/2, 1/2] = 2/pi
        p = PeriodizedProfile(base=VarianceProfile.uniform(), nu=0.0)
        assert fourier_transform(p, 0.5) == pytest.approx(2.0 / math.pi, abs=1e-14)

    def test_quad_oracle_piecewise(self):
        from scipy.integrate import quad
        base = normalized_piecewise([-0.5, -0.2, 0.1, 0.5], [1.0, 2.0, 0.5])
        p = PeriodizedProfile(base=base, nu=0.0)
        pts = [-0.2, 0.1]
        for t in [0.3, 1.7, 5.2]:
            re, _ = quad(lambda x: base(x) * math.cos(2 * math.pi * t * x),
                         -0.5, 0.5, points=pts, limit=200)
            im, _ = quad(lambda x: base(x) * math.sin(2 * math.pi * t * x),
                         -0.5, 0.5, points=pts, limit=200)
            got = fourier_transform(p, t)
            assert got == pytest.approx(re + 1j * im, abs=1e-10)

    def test_quad_oracle_tabulated(self):
        from scipy.integrate import quad
        g = np.linspace(0.5, 1.5, 65)
        g = g / np.trapezoid(g, dx=1 / 64)
        base = VarianceProfile.tabulated(g)
        p = PeriodizedProfile(base=base, nu=0.0)
        for t in [0.4, 2.3]:
            re, _ = quad(lambda x: base(x) * math.cos(2 * math.pi * t * x),
                         -0.5, 0.5, limit=200)
            im, _ = quad(lambda x: base(x) * math.sin(2 * math.pi * t * x),
                         -0.5, 0.5, limit=200)
            assert fourier_transform(p, t) == pytest.approx(re + 1j * im, abs=1e-8)

    def test_coeff_many_matches_scalar(self):
        base = normalized_piecewise([-0.5, 0.2, 0.5], [1.0, 2.0])
        p = PeriodizedProfile(base=base, nu=0.25)
        ks = np.arange(-20, 21)
        many = fourier_coeff_many(p, ks)
        for k, v in zip(ks, many):
            assert v == pytest.approx(fourier_coeff(p, int(k)), abs=1e-13)

    def test_domain_guards(self):
        u = VarianceProfile.uniform()
        with pytest.raises(ProfileError):
            fourier_coeff(PeriodizedProfile(base=u, nu=0.0), 1)
        with pytest.raises(ProfileError):
            fourier_transform(PeriodizedProfile(base=u, nu=0.5), 1.0)
        with pytest.raises(ProfileError):
            fejer_coefficient_sum(PeriodizedProfile(base=u, nu=0.0), 100)

    def test_even_profile_coeff_real(self):
        p = PeriodizedProfile(base=VarianceProfile.uniform(), nu=0.5)
        for k in range(1, 10):
            assert abs(np.imag(fourier_coeff(p, k))) < 1e-14

    def test_fejer_recovers_w_at_zero(self):
        # w_nu(0) = nu * sum_k w_hat(k), Cesaro-summed
        for nu in [1.0, 0.5, 0.25]:
            p = PeriodizedProfile(base=VarianceProfile.uniform(), nu=nu)
            assert fejer_coefficient_sum(p, 20_000) == pytest.approx(1.0, abs=1e-3)

    def test_parseval_consistency(self):
        # nu * sum_{|k|<=K} w_hat(k)^l -> w^{(l)}(0); at nu=1 the uniform
        # coefficients are exactly delta_{k0}, so K=1e4 is already exact
        p1 = PeriodizedProfile(base=VarianceProfile.uniform(), nu=1.0)
        ks = np.arange(-10**4, 10**4 + 1)
        coeffs1 = fourier_coeff_many(p1, ks)
        for l in range(2, 7):
            s = float(np.sum(np.real(coeffs1**l)))
            assert s == pytest.approx(self_convolution_at_zero(p1, l), abs=1e-8)
        # at nu=1/2 the truncation tail is ~K^{-(l-1)}; check within it
        ph = PeriodizedProfile(base=VarianceProfile.uniform(), nu=0.5)
        coeffs = fourier_coeff_many(ph, ks)
        for l in range(2, 7):
            s = 0.5 * float(np.sum(np.real(coeffs**l)))
            tail = 2.0 / (math.pi ** l * (l - 1) * 10 ** (4 * (l - 1))) * 10
            assert s == pytest.approx(self_convolution_at_zero(ph, l),
                                      abs=max(1e-8, tail))


class TestConvolution:
    def test_uniform_matches_irwin_hall(self):
        from bandclt.theory import irwin_hall_pdf
        p = PeriodizedProfile(base=VarianceProfile.uniform(), nu=0.0)
        vals = self_convolution_sequence(p, 6)
        for l in range(1, 7):
            assert vals[l - 1] == pytest.approx(irwin_hall_pdf(l, 0.0), abs=1e-10)

    def test_triangle_closed_form(self):
        # w*w for the uniform box is the unit triangle: value 1 at 0
        p = PeriodizedProfile(base=VarianceProfile.uniform(), nu=0.0)
        assert self_convolution_at_zero(p, 2) == pytest.approx(1.0, abs=1e-10)

    def test_periodized_value(self):
        # nu=1: circular self-convolutions of the constant-1 profile are all 1
        p = PeriodizedProfile(base=VarianceProfile.uniform(), nu=1.0)
        vals = self_convolution_sequence(p, 8)
        assert np.allclose(vals, 1.0, atol=1e-10)

    def test_error_bounds_cover_truth(self):
        base = normalized_piecewise([-0.5, -0.1, 0.3, 0.5], [0.5, 1.75, 0.5])
        p = PeriodizedProfile(base=base, nu=0.5)
        vals, errs = self_convolution_sequence(p, 6, with_errors=True)
        fine = self_convolution_sequence(p, 6, grid_size=1 << 19)
        for l in range(2, 7):
            assert abs(vals[l - 1] - fine[l - 1]) <= errs[l - 1]

    def test_grid_guards(self):
        p = PeriodizedProfile(base=VarianceProfile.uniform(), nu=0.0)
        with pytest.raises(ProfileError):
            self_convolution_sequence(p, 4, grid_size=100)
        with pytest.raises(ProfileError):
            self_convolution_sequence(p, 4, grid_size=300)  # not a power of 2
        with pytest.raises(ProfileError):
            self_convolution_at_zero(p, 0)


class TestHelpers:
    def test_jump_variation(self):
        assert total_jump_variation(VarianceProfile.uniform()) == 2.0
        pw = normalized_piecewise([-0.5, 0.0, 0.5], [1.0, 3.0])
        assert total_jump_variation(pw) == pytest.approx(
            0.5 + 1.0 + 1.5)
        g = np.linspace(0.5, 1.5, 65)
        g = g / np.trapezoid(g, dx=1 / 64)
        tab = VarianceProfile.tabulated(g)
        assert total_jump_variation(tab) == pytest.approx(g[0] + g[-1])

    def test_alignment(self):
        u = PeriodizedProfile(base=VarianceProfile.uniform(), nu=0.5)
        assert conv_grid_aligned(u, 4, 1 << 12)
        off = PeriodizedProfile(
            base=normalized_piecewise([-0.5, 0.1, 0.5], [1.0, 1.0]), nu=0.5)
        assert not conv_grid_aligned(off, 4, 1 << 12)


class TestProperties:
    @settings(max_examples=25, deadline=None)
    @given(piecewise_profiles(), st.integers(min_value=-50, max_value=50))
    def test_coeff_bounded_by_one(self, base, k):
        p = PeriodizedProfile(base=base, nu=0.5)
        assert abs(fourier_coeff(p, k)) <= 1.0 + 1e-12

    @settings(max_examples=25, deadline=None)
    @given(piecewise_profiles(), st.floats(-40.0, 40.0))
    def test_transform_bounded_by_one(self, base, t):
        p = PeriodizedProfile(base=base, nu=0.0)
        assert abs(fourier_transform(p, t)) <= 1.0 + 1e-12

    @settings(max_examples=25, deadline=None)
    @given(piecewise_profiles(), st.floats(-3.0, 3.0))
    def test_nonnegative_everywhere(self, base, x):
        p = PeriodizedProfile(base=base, nu=0.25)
        assert evaluate(p, x) >= 0.0
