"""Linearized spectrum: eigenvalue oracle, rates, residuals, coercivity."""

import math

import numpy as np
import pytest

from twosol.params import ModelParams, RadialGridSpec
from twosol.spectrum import (
    coercivity_check,
    kernel_residual,
    linearized_mode_residual,
    rates_from_nu0,
    solve_linearized_spectrum,
)


# N = 1, p = 3: L = -d^2/dr^2 + 1 - 6 sech^2 has lowest eigenvalue -3 with
# eigenfunction sech^2, so nu0 = sqrt(3).  With alpha = 1 the rates are
#   nu+- = -1 +- 2,  zeta+- = 1 +- 2,  beta = 1/4.
NU0_SQ_13 = 3.0


class TestEigenvalue13:
    def test_nu0_squared(self, spectral113):
        assert spectral113.nu0 ** 2 == pytest.approx(NU0_SQ_13, abs=1e-9)

    def test_richardson_improves(self, spectral113):
        raw_err = abs(spectral113.nu0_sq_raw - NU0_SQ_13)
        ext_err = abs(spectral113.nu0 ** 2 - NU0_SQ_13)
        assert ext_err < raw_err / 100.0

    def test_eigenfunction_is_sech_squared(self, spectral113):
        r = spectral113.r
        exact = math.sqrt(3.0) / 2.0 * np.cosh(r) ** -2
        assert np.max(np.abs(spectral113.Y - exact)) < 1e-6

    def test_eigenfunction_normalized(self, spectral113):
        from scipy.integrate import simpson

        nrm = 2.0 * simpson(spectral113.Y ** 2, dx=spectral113.grid.h)
        assert nrm == pytest.approx(1.0, rel=1e-12)
        assert spectral113.Y[0] > 0


class TestRates:
    def test_rates_13(self, spectral113):
        assert spectral113.nu_plus == pytest.approx(1.0, abs=1e-9)
        assert spectral113.nu_minus == pytest.approx(-3.0, abs=1e-9)
        assert spectral113.zeta_plus == pytest.approx(3.0, abs=1e-9)
        assert spectral113.zeta_minus == pytest.approx(-1.0, abs=1e-9)
        assert spectral113.beta == pytest.approx(0.25, abs=1e-12)

    def test_rate_identities(self):
        # for any (nu0, alpha): zeta+- = -nu-+, nu+ nu- = -nu0^2,
        # zeta+ - zeta- = 1/beta
        nu_p, nu_m, ze_p, ze_m, beta = rates_from_nu0(2.7, 0.3)
        assert ze_p == pytest.approx(-nu_m)
        assert ze_m == pytest.approx(-nu_p)
        assert nu_p * nu_m == pytest.approx(-2.7)
        assert ze_p - ze_m == pytest.approx(1.0 / beta)

    def test_characteristic_equation(self):
        # nu+- are the roots of nu^2 + 2 alpha nu - nu0^2 = 0
        for alpha in (0.5, 1.0, 5.0):
            nu_p, nu_m, *_ = rates_from_nu0(3.0, alpha)
            for nu in (nu_p, nu_m):
                assert nu * nu + 2 * alpha * nu - 3.0 == pytest.approx(0.0, abs=1e-12)


class TestResiduals:
    def test_kernel_mode(self, profile113):
        # L applied to the translation mode dQ/dx vanishes identically
        assert kernel_residual(profile113) < 1e-5

    def test_kernel_mode_3d(self, profile313):
        assert kernel_residual(profile313) < 1e-4

    def test_growing_mode(self, profile113, spectral113):
        # exp(nu+ t)(Y, nu+ Y) solves the linearized flow
        assert linearized_mode_residual(profile113, spectral113) < 1e-5


class TestCoercivity:
    def test_projected_eigenvalue_positive(self, profile113, spectral113):
        report = coercivity_check(profile113, spectral113, n_samples=16)
        assert report["projected_min_eigenvalue"] > 0
        assert report["c_fit"] > 0

    def test_random_samples_satisfy_bound(self, profile113, spectral113):
        report = coercivity_check(profile113, spectral113, n_samples=32, seed=7)
        c, C = report["c_fit"], report["C_fit"]
        for lhs, h1, corr in report["samples"]:
            assert lhs >= c * h1 - C * corr - 1e-9 * h1


class TestOtherParameters:
    def test_3d_has_negative_eigenvalue(self, profile313):
        sp3 = solve_linearized_spectrum(profile313)
        assert sp3.nu0 > 0
        assert sp3.nu_plus > 0 > sp3.nu_minus

    def test_p5_eigenvalue(self, profile115):
        # L = -d^2 + 1 - 5 q^4 with q = 3^{1/4} sech^{1/2}(2r):
        # potential depth 15 sech^2; lowest eigenvalue known analytically
        # for the Poschl-Teller family: -(lam)^2 with
        # lam = (sqrt(1 + 4*15/4) - 1) = 3 so eigenvalue 1 - 9 = -8
        sp5 = solve_linearized_spectrum(profile115)
        assert sp5.nu0 ** 2 == pytest.approx(8.0, abs=1e-7)
