"""Field evolution: stationarity, growth rates, energy law, guards."""

import numpy as np
import pytest
from scipy.integrate import simpson

from twosol.errors import CFLViolation, GridTooSmall
from twosol.field1d import (
    FieldState,
    ManifoldPair,
    PlainPair,
    SeededPair,
    Stepper,
    build_initial_data,
    dissipation_check,
    energy,
    evolve,
)
from twosol.params import Grid1D, ModelParams


@pytest.fixture(scope="module")
def grid128():
    return Grid1D(-40.0, 40.0, 40 * 256 + 1)


def _single_soliton(profile, grid):
    x = grid.x
    return FieldState(grid, profile.q_at(np.abs(x)), np.zeros(grid.n))


class TestBuildInitialData:
    def test_seeded_pair_no_seeds(self, profile113, spectral113, grid128):
        st = build_initial_data(SeededPair(L=12.0), profile113, spectral113, grid128)
        x = grid128.x
        expected = profile113.q_at(np.abs(x - 6.0)) - profile113.q_at(np.abs(x + 6.0))
        assert np.max(np.abs(st.u - expected)) < 1e-12
        assert np.max(np.abs(st.v)) == 0.0

    def test_plain_pair_velocity_component(self, profile113, spectral113, grid128):
        st = build_initial_data(
            PlainPair(1, -1, 5.0, -5.0, ell1=0.01),
            profile113, spectral113, grid128,
        )
        x = grid128.x
        i = np.argmin(np.abs(x - 4.0))
        d1 = profile113.dq_at(np.array([1.0]))[0] * np.sign(4.0 - 5.0)
        assert st.v[i] == pytest.approx(-0.01 * d1, rel=1e-6)

    def test_manifold_zero_a_equals_plain(self, profile113, spectral113, grid128):
        plain = build_initial_data(
            PlainPair(1, -1, 5.0, -5.0, 0.003, -0.001),
            profile113, spectral113, grid128,
        )
        mani = build_initial_data(
            ManifoldPair(1, -1, 5.0, -5.0, 0.003, -0.001, a_plus=(0.0, 0.0)),
            profile113, spectral113, grid128,
        )
        assert np.max(np.abs(plain.u - mani.u)) < 1e-14
        assert np.max(np.abs(plain.v - mani.v)) < 1e-14

    def test_boundary_guard(self, profile113, spectral113):
        small = Grid1D(-12.0, 12.0, 1201)
        with pytest.raises(GridTooSmall):
            build_initial_data(SeededPair(L=12.0), profile113, spectral113, small)


class TestStepper:
    def test_zero_data_stays_zero(self, params113, grid128):
        st = FieldState(grid128, np.zeros(grid128.n), np.zeros(grid128.n))
        samples, status = evolve(st, params113, 2.0)
        assert status == "completed"
        assert np.max(np.abs(samples[-1].u)) == 0.0

    def test_cfl_guard(self, params113, grid128):
        st = FieldState(grid128, np.zeros(grid128.n), np.zeros(grid128.n))
        with pytest.raises(CFLViolation):
            Stepper(st, params113, dt=grid128.h)

    def test_single_soliton_persists(self, profile113, params113, grid128):
        st = _single_soliton(profile113, grid128)
        Q = st.u.copy()
        samples, status = evolve(st, params113, 10.0, sample_dt=1.0)
        assert status == "completed"
        assert np.max(np.abs(samples[-1].u - Q)) <= 1e-4

    def test_scheme_order(self, profile113, params113):
        # halving h (and dt = h/2 with it) cuts the drift by >= 8x
        drifts = []
        for n in (40 * 128 + 1, 40 * 256 + 1):
            grid = Grid1D(-40.0, 40.0, n)
            st = _single_soliton(profile113, grid)
            Q = st.u.copy()
            samples, _ = evolve(st, params113, 5.0, sample_dt=5.0)
            drifts.append(np.max(np.abs(samples[-1].u - Q)))
        assert drifts[0] / drifts[1] >= 8.0

    def test_linear_mode_growth_rate(
        self, profile113, spectral113, params113, grid128
    ):
        x = grid128.x
        Q = profile113.q_at(np.abs(x))
        Y = spectral113.Y_at(np.abs(x))
        amp = 1e-6
        st = FieldState(grid128, Q + amp * Y, amp * spectral113.nu_plus * Y)
        samples, _ = evolve(st, params113, 5.0, sample_dt=0.25)
        proj = [simpson((s.u - Q) * Y, dx=grid128.h) for s in samples]
        ts = [s.t for s in samples]
        rate = np.polyfit(ts, np.log(np.abs(proj)), 1)[0]
        assert rate == pytest.approx(spectral113.nu_plus, rel=0.02)

    def test_blowup_reported_not_raised(self, params113, grid128):
        # large coherent bump blows up in finite time for the focusing power
        x = grid128.x
        u = 10.0 * np.exp(-x ** 2)
        st = FieldState(grid128, u, np.zeros_like(u))
        samples, status = evolve(st, params113, 5.0, sample_dt=0.1)
        assert status == "blowup"


class TestEnergy:
    def test_zero_state(self, params113, grid128):
        st = FieldState(grid128, np.zeros(grid128.n), np.zeros(grid128.n))
        assert energy(st, params113) == 0.0

    def test_single_soliton_energy(self, profile113, params113, grid128):
        st = _single_soliton(profile113, grid128)
        assert energy(st, params113) == pytest.approx(4.0 / 3.0, abs=1e-6)

    def test_pair_energy_expansion(
        self, profile113, spectral113, params113, grid128
    ):
        st = build_initial_data(SeededPair(L=10.0), profile113, spectral113, grid128)
        q10 = float(profile113.q_at(np.array([10.0]))[0])
        gap = profile113.c1 * profile113.g0 * q10
        # opposite signs: energy sits above 2 E(Q,0) by c1 g0 q(10)
        assert energy(st, params113) - 2.0 * profile113.E_Q == pytest.approx(
            gap, rel=0.05
        )

    def test_energy_non_increasing(
        self, profile113, spectral113, params113, grid128
    ):
        st = build_initial_data(
            SeededPair(L=10.0, h1=1e-3), profile113, spectral113, grid128
        )
        samples, _ = evolve(st, params113, 5.0, sample_dt=0.5)
        es = [energy(s, params113) for s in samples]
        dts = np.diff([s.t for s in samples])
        assert np.all(np.diff(es) <= 1e-6 * dts)


class TestDissipation:
    def test_zero_data(self, params113, grid128):
        st = FieldState(grid128, np.zeros(grid128.n), np.zeros(grid128.n))
        samples, _ = evolve(st, params113, 1.0, sample_dt=0.1)
        assert dissipation_check(samples, params113) == 0.0

    def test_single_soliton_balance(self, profile113, params113, grid128):
        st = _single_soliton(profile113, grid128)
        samples, _ = evolve(st, params113, 10.0, sample_dt=0.05)
        assert dissipation_check(samples, params113) <= 1e-5

    def test_perturbed_pair_balance(
        self, profile113, spectral113, params113, grid128
    ):
        st = build_initial_data(
            SeededPair(L=12.0, h1=1e-4, h2=-1e-4),
            profile113, spectral113, grid128,
        )
        samples, _ = evolve(st, params113, 6.0, sample_dt=0.02)
        assert dissipation_check(samples, params113) <= 1e-4
