import numpy as np
import pytest

from tiletide.profiles import (
    AutocorrCutoff,
    build_cutoff_autocorr,
    build_cutoff_plateau,
    bump_ppoly,
    fitted_decay_exponent,
    gamma_partition,
    partition_check,
    smoothstep_coeffs,
    theta_profile,
    theta_scaled,
)
from fractions import Fraction


class TestSmoothstep:
    def test_endpoints_exact(self):
        for r in (2, 4, 8):
            c = smoothstep_coeffs(r)
            assert sum(c) == 1  # S(1) = 1 in exact arithmetic
            assert c[0] == 0

    def test_symmetry(self):
        c = smoothstep_coeffs(5)
        xs = np.linspace(0, 1, 101)
        vals = np.zeros_like(xs)
        for coeff in reversed(c):
            vals = vals * xs + float(coeff)
        assert np.allclose(vals + vals[::-1], 1.0, atol=1e-12)


class TestPlateau:
    def test_plateau_values(self):
        p = build_cutoff_plateau(6)
        assert p(0.5) == 1.0
        assert p(-1.0) == 1.0
        assert p(2.5) == 0.0
        assert p(-3.0) == 0.0
        assert 0.0 < p(1.5) < 1.0

    def test_even(self):
        p = build_cutoff_plateau(5)
        xs = np.linspace(0, 2.2, 313)
        assert np.allclose(p(xs), p(-xs), atol=1e-12)

    def test_smoothness_order_rejected(self):
        with pytest.raises(ValueError):
            build_cutoff_plateau(1)

    def test_inverse_transform_against_quadrature(self):
        p = build_cutoff_plateau(4)
        xs = np.linspace(-2, 2, 2**17 + 1)
        vals = p(xs)
        for s in (0.0, 0.3, 1.1, 2.7, 5.0):
            brute = np.trapezoid(vals * np.exp(2j * np.pi * s * xs), x=xs)
            assert abs(p.inverse_transform(s) - brute) < 1e-9

    def test_decay_exponent_meets_order(self):
        for r in (4, 8):
            p = build_cutoff_plateau(r)
            s = np.geomspace(4, 256, 60)
            assert fitted_decay_exponent(p.inverse_transform(s), s) >= r - 1

    def test_derivative_vanishes_on_plateau(self):
        p = build_cutoff_plateau(6)
        d = p.derivative(1)
        assert d(0.0) == 0.0
        assert d(0.99) == 0.0
        assert abs(d(1.5)) > 0


class TestTheta:
    def test_zero_at_origin_all_scales(self):
        p = build_cutoff_plateau(6)
        for i in (-3, 0, 5):
            assert theta_scaled(p, i, 0.0) == 0.0

    def test_plateau_difference_at_one(self):
        p = build_cutoff_plateau(6)
        assert theta_profile(p, 1.0) == 1.0  # alpha(1) - alpha(2) = 1 - 0

    def test_vanishes_when_both_arguments_plateau(self):
        p = build_cutoff_plateau(6)
        s = np.linspace(-0.5, 0.5, 101)
        assert np.max(np.abs(theta_profile(p, s))) == 0.0

    def test_vanishes_outside_double_support(self):
        p = build_cutoff_plateau(6)
        assert theta_profile(p, 2.0) == 0.0
        assert theta_profile(p, -3.7) == 0.0

    def test_telescoping_identity(self):
        p = build_cutoff_plateau(8)
        rng = np.random.default_rng(3)
        s = rng.uniform(-8, 8, size=2000)
        s = s[np.abs(s) > 1e-6]
        for k1 in range(-4, 5):
            # truncate once 2^(N+1)|s| > 2 for every sample
            nmax = int(np.ceil(np.log2(2 / np.abs(s).min()))) + 1
            total = np.zeros_like(s)
            for i in range(k1, nmax + 1):
                total += theta_scaled(p, i, s)
            target = p(np.ldexp(s, k1))
            assert np.max(np.abs(total - target)) <= 1e-12

    def test_requires_plateau_form(self):
        a = build_cutoff_autocorr()
        with pytest.raises(ValueError):
            theta_profile(a, 0.3)


class TestAutocorr:
    def test_normalization(self):
        a = build_cutoff_autocorr()
        assert abs(a.inverse_transform(0.0).real - 1.0) <= 1e-10

    def test_support_and_symmetry(self):
        a = build_cutoff_autocorr()
        assert a(1.2) == 0.0 and a(-1.2) == 0.0
        xs = np.linspace(0, 1.1, 57)
        assert np.allclose(a(xs), a(-xs), atol=1e-12)

    def test_nonnegative_inverse_transform(self):
        a = build_cutoff_autocorr()
        s = np.linspace(-48, 48, 4001)
        vals = a.inverse_transform(s).real
        assert vals.min() >= -1e-9 * vals.max()

    def test_not_flat_at_origin(self):
        # second difference is strictly negative: the profile cannot be
        # locally constant at 0 while keeping a nonnegative transform
        a = build_cutoff_autocorr()
        h = 1e-3
        lap = (a(h) - 2 * a(0.0) + a(-h)) / h**2
        assert lap < 0

    def test_degenerate_base_rejected(self):
        with pytest.raises(ValueError):
            build_cutoff_autocorr(base=lambda x: np.zeros_like(x))


class TestGammaPartition:
    def test_partition_identity_fine_grid(self):
        xs = np.linspace(-5, 5, 10**4)
        assert partition_check(xs) <= 1e-10

    def test_single_bump_dominance_point(self):
        total = sum(gamma_partition(l, 0.5) ** 2 for l in range(-3, 4))
        assert abs(total - 1.0) <= 1e-10

    def test_at_most_two_translates_active(self):
        rng = np.random.default_rng(11)
        for xi in rng.uniform(-4, 4, size=200):
            active = sum(1 for l in range(-15, 15) if gamma_partition(l, xi) > 0)
            assert active <= 2

    def test_support(self):
        assert gamma_partition(0, 0.19) == 0.0
        assert gamma_partition(0, 0.81) == 0.0
        assert gamma_partition(0, 0.5) > 0


class TestBump:
    def test_flat_and_support(self):
        b = bump_ppoly((Fraction(0), Fraction(1)), (Fraction(1, 4), Fraction(3, 4)), 4)
        assert b(0.5) == 1.0
        assert b(-0.1) == 0.0
        assert b(1.1) == 0.0
        assert 0 < b(0.1) < 1

    def test_invalid_layout(self):
        with pytest.raises(ValueError):
            bump_ppoly((Fraction(0), Fraction(1)), (Fraction(0), Fraction(1)), 3)
