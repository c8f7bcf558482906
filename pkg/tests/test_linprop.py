import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from apcgl import (
    ApSeries,
    CglParams,
    gaussian_integral,
    kernel_convolve_mode,
    kernel_eval,
    l1_norm,
    linear_multiplier,
    linear_step,
)
from apcgl.linprop import QuadratureError

from conftest import random_series


def quad_complex(f, lo, hi, **kw):
    re = integrate.quad(lambda y: f(y).real, lo, hi, limit=400, **kw)[0]
    im = integrate.quad(lambda y: f(y).imag, lo, hi, limit=400, **kw)[0]
    return complex(re, im)


class TestParams:
    def test_default_kappa_sign(self):
        assert CglParams(1, 0.5, 0, 2, 3).kappa == -(2 + 3j)

    def test_explicit_kappa(self):
        p = CglParams(1, 0, 0, 1, 0, kappa=0)
        assert p.kappa == 0
        assert p.with_kappa(2j).kappa == 2j

    @pytest.mark.parametrize("kw", [
        dict(alpha=0), dict(beta=-1), dict(gamma=-0.1), dict(a=0), dict(b=-1),
        dict(degree=1), dict(degree=2.5),
    ])
    def test_invalid(self, kw):
        base = dict(alpha=1, beta=0, gamma=0, a=1, b=0, degree=3)
        base.update(kw)
        with pytest.raises(ValueError):
            CglParams(**base)


class TestLinearStep:
    def test_zero_time_identity(self, rng, standard_params):
        u = random_series(rng, 10)
        assert linear_step(u, standard_params, 0.0) is u

    def test_negative_time_rejected(self, standard_params):
        with pytest.raises(ValueError):
            linear_step(ApSeries(1.0, [1]), standard_params, -1e-3)

    def test_multiplier_formula(self):
        p = CglParams(1.0, 2.0, 0.5, 1, 0)
        u = ApSeries.from_modes(0.7, 4, {3: 1.0})
        got = linear_step(u, p, 0.2)[3]
        assert got == cmath.exp((-(3 * 0.7) ** 2 * (1 + 2j) + 0.5) * 0.2)

    def test_pure_heat_decay(self):
        p = CglParams(1.0, 0.0, 0.0, 1, 0)
        assert linear_step(ApSeries(1.0, [1]), p, 1.0)[1] == pytest.approx(math.exp(-1), rel=1e-15)

    @settings(max_examples=60, deadline=None)
    @given(st.floats(0.1, 3), st.floats(0, 3), st.floats(0, 1), st.floats(0.2, 2),
           st.floats(0, 2), st.floats(0, 2))
    def test_semigroup(self, al, be, ga, lam, t1, t2):
        p = CglParams(al, be, ga, 1, 0)
        u = ApSeries(lam, np.linspace(1, 2, 6) * (1 + 0.5j))
        lhs = linear_step(linear_step(u, p, t2), p, t1).coeffs
        rhs = linear_step(u, p, t1 + t2).coeffs
        # Relative error is meaningless once values go subnormal.
        nz = np.abs(rhs) >= np.finfo(float).tiny
        assert np.all(np.abs(lhs[nz] - rhs[nz]) <= 1e-13 * np.abs(rhs[nz]))

    @settings(max_examples=60, deadline=None)
    @given(st.floats(0.1, 3), st.floats(0, 3), st.floats(0, 1), st.floats(0, 2))
    def test_norm_bound(self, al, be, ga, t):
        p = CglParams(al, be, ga, 1, 0)
        u = ApSeries(1.0, [1, -2j, 0.5, 3])
        assert l1_norm(linear_step(u, p, t)) <= math.exp(ga * t) * l1_norm(u) * (1 + 1e-15)

    def test_strong_continuity(self, standard_params, rng):
        u = random_series(rng, 12)
        gaps = [l1_norm(linear_step(u, standard_params, t) - u) for t in (1e-2, 1e-3, 1e-4)]
        assert gaps[0] > gaps[1] > gaps[2]
        assert gaps[2] < 1e-3

    @pytest.mark.parametrize("t", [1e-2, 1e-3, 1e-4])
    def test_multiplier_tends_to_one(self, t):
        p = CglParams(1.0, 2.0, 0.5, 1, 0)
        assert abs(linear_multiplier(p, 0.7, 3, t) - 1) < 50 * t


class TestGaussianIntegral:
    def test_real_gaussian(self):
        assert gaussian_integral(1, 0, 0) == pytest.approx(1.7724538509, abs=1e-10)

    def test_completed_square(self):
        assert gaussian_integral(1, 2, 0) == pytest.approx(math.e * math.sqrt(math.pi), rel=1e-15)

    def test_complex_against_quadrature(self):
        a, b = 1 - 1j, 1j
        numeric = quad_complex(lambda y: cmath.exp(-a * y * y - b * y), -40, 40, epsabs=1e-13)
        assert abs(gaussian_integral(a, b, 0) - numeric) <= 1e-8

    def test_divergent_rejected(self):
        with pytest.raises(ValueError):
            gaussian_integral(-1 + 1j, 0, 0)
        with pytest.raises(ValueError):
            gaussian_integral(1j, 0, 0)


class TestKernel:
    def test_heat_kernel_mass(self):
        p = CglParams(1.0, 0.0, 0.0, 1, 0)
        mass = quad_complex(lambda y: kernel_eval(p, 1.0, y), -np.inf, np.inf)
        assert mass == pytest.approx(1.0, abs=1e-10)

    def test_complex_kernel_mass(self):
        p = CglParams(1.0, 1.0, 0.3, 1, 0)
        L = 10 * math.sqrt(2 * 0.5 * 2 / 1)
        mass = quad_complex(lambda y: kernel_eval(p, 0.5, y), -L, L, epsabs=1e-12)
        assert mass == pytest.approx(math.exp(0.15), abs=1e-8)

    def test_even(self, standard_params):
        y = np.linspace(0, 5, 11)
        assert np.array_equal(kernel_eval(standard_params, 0.3, y), kernel_eval(standard_params, 0.3, -y))

    def test_modulus_decreasing(self, standard_params):
        y = np.linspace(0, 6, 50)
        assert np.all(np.diff(np.abs(kernel_eval(standard_params, 0.3, y))) < 0)

    def test_time_rejected(self, standard_params):
        with pytest.raises(ValueError):
            kernel_eval(standard_params, 0.0, 1.0)


class TestKernelConvolveMode:
    def test_heat_mode(self):
        p = CglParams(1.0, 0.0, 0.0, 1, 0)
        assert abs(kernel_convolve_mode(p, 1.0, 1, 1.0) - math.exp(-1)) <= 1e-6

    def test_dispersive_mode(self):
        p = CglParams(1.0, 2.0, 0.5, 1, 0)
        q = kernel_convolve_mode(p, 0.2, 3, 0.7)
        assert abs(q - linear_multiplier(p, 0.7, 3, 0.2)) <= 1e-6

    def test_against_scipy(self):
        p = CglParams(0.5, 1.0, 0.2, 1, 0)
        L = 10 * math.sqrt(2 * 0.3 * 1.25 / 0.5)
        ref = quad_complex(lambda y: kernel_eval(p, 0.3, y) * cmath.exp(-2j * y), -L, L,
                           epsabs=1e-13)
        assert abs(kernel_convolve_mode(p, 0.3, 2, 1.0) - ref) <= 1e-9

    def test_non_convergence_signalled(self):
        p = CglParams(1.0, 2.0, 0.0, 1, 0)
        with pytest.raises(QuadratureError):
            kernel_convolve_mode(p, 1.0, 40, 1.0, max_panels=8)

    def test_bad_inputs(self, standard_params):
        with pytest.raises(ValueError):
            kernel_convolve_mode(standard_params, 0.0, 1, 1.0)
        with pytest.raises(ValueError):
            kernel_convolve_mode(standard_params, 1.0, 0, 1.0)
