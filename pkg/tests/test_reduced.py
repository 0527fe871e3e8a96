"""Reduced two-soliton flow: closed-form laws, collisions, limits."""

import math

import numpy as np
import pytest

from twosol.errors import NotConverged, SeparationLost
from twosol.reduced import (
    OmegaLimit,
    ReducedConstants,
    ReducedState,
    asymptotic_distance,
    integrate,
    omega_limit,
    q_asym,
    rhs,
)


@pytest.fixture(scope="module")
def consts113(profile113, spectral113):
    return ReducedConstants.from_solutions(profile113, spectral113)


class TestRhs:
    def test_opposite_signs_repel(self, consts113):
        st = ReducedState(z1=[5.0], z2=[-5.0], sigma=-1)
        dy = rhs(st, consts113)
        # dl1 is component at index 2 (N=1 packing: z1 z2 l1 l2 a...)
        assert dy[2] > 0.0   # soliton 1 pushed toward +x
        assert dy[3] < 0.0

    def test_same_signs_attract(self, consts113):
        st = ReducedState(z1=[5.0], z2=[-5.0], sigma=1)
        dy = rhs(st, consts113)
        assert dy[2] < 0.0
        assert dy[3] > 0.0

    def test_exponential_modes(self, consts113):
        st = ReducedState(z1=[5.0], z2=[-5.0], sigma=-1, a1p=1e-6, a1m=2e-6)
        dy = rhs(st, consts113)
        assert dy[4] == pytest.approx(consts113.nu_plus * 1e-6)
        assert dy[6] == pytest.approx(consts113.nu_minus * 2e-6)

    def test_floor_guard(self, consts113):
        st = ReducedState(z1=[0.5], z2=[-0.5], sigma=-1)
        with pytest.raises(SeparationLost):
            rhs(st, consts113)


class TestDistanceLaw:
    def test_log_growth_oracle(self, consts113):
        # exact solution of the adiabatic law: r(t) = log(e^{r0} + 12 t)
        st = ReducedState(z1=[5.0], z2=[-5.0], sigma=-1)
        traj = integrate(st, consts113, 1e6)
        assert traj.status == "completed"
        assert traj.separation()[-1] == pytest.approx(
            math.log(math.exp(10.0) + 12.0 * 1e6), abs=1e-3
        )

    def test_same_sign_collision_time(self, consts113):
        st = ReducedState(z1=[5.0], z2=[-5.0], sigma=1)
        traj = integrate(st, consts113, 1e6)
        assert traj.status == "collision"
        assert traj.t_final == pytest.approx(math.exp(10.0) / 12.0, rel=0.01)

    def test_collision_for_every_initial_distance(self, consts113):
        for r0 in (8.0, 10.0, 12.0, 14.0):
            st = ReducedState(z1=[r0 / 2.0], z2=[-r0 / 2.0], sigma=1)
            traj = integrate(st, consts113, 1e8)
            assert traj.status == "collision", f"no collision from r0={r0}"

    def test_conserved_quantity(self, consts113):
        # 1/q_asym(r) - (g0/alpha) t stays constant to 1e-3 * t_end
        st = ReducedState(z1=[5.0], z2=[-5.0], sigma=-1)
        traj = integrate(st, consts113, 1e6)
        r = traj.separation()
        inv = 1.0 / q_asym(r, consts113.N, consts113.kappa) \
            - (consts113.g0 / consts113.alpha) * traj.t
        assert np.max(inv) - np.min(inv) <= 1e-3 * 1e6

    def test_ell_damping(self, consts113):
        # with the drive negligible at huge separation, ell decays as e^{-2at}
        st = ReducedState(z1=[40.0], z2=[-40.0], ell1=[0.01], sigma=-1)
        traj = integrate(st, consts113, 3.0)
        t_end = traj.t[-1]
        assert traj.ell1()[0, -1] == pytest.approx(
            0.01 * math.exp(-2.0 * consts113.alpha * t_end), rel=1e-5
        )

    def test_a_mode_growth(self, consts113):
        st = ReducedState(z1=[5.0], z2=[-5.0], sigma=-1, a1p=1e-6)
        traj = integrate(st, consts113, 5.0)
        i = np.argmin(np.abs(traj.t - 2.0))
        assert traj.a_modes()[0, i] == pytest.approx(
            1e-6 * math.exp(consts113.nu_plus * traj.t[i]), rel=1e-8
        )


class TestAsymptoticDistance:
    def test_1d_value(self, consts113):
        # kappa g0 = 2 sqrt2 * 3 sqrt2 = 12
        val = float(asymptotic_distance(1e6, consts113))
        assert val == pytest.approx(math.log(1e6) + math.log(12.0), abs=1e-6)

    def test_no_loglog_in_1d(self, consts113):
        v1 = float(asymptotic_distance(1e5, consts113))
        v2 = float(asymptotic_distance(1e6, consts113))
        assert v2 - v1 == pytest.approx(math.log(10.0), abs=1e-12)

    def test_convergence_of_trajectory(self, consts113):
        st = ReducedState(z1=[5.0], z2=[-5.0], sigma=-1)
        traj = integrate(st, consts113, 1e6)
        gaps = np.abs(
            traj.separation() - asymptotic_distance(np.maximum(traj.t, 10.0),
                                                    consts113)
        )
        sel = traj.t >= 1e3
        assert gaps[sel][-1] < 0.01
        assert np.all(np.diff(gaps[sel]) <= 1e-9)

    def test_t_guard(self, consts113):
        with pytest.raises(ValueError):
            asymptotic_distance(1.0, consts113)


class TestOmegaLimit:
    def test_1d_sign(self, consts113):
        st = ReducedState(z1=[5.0], z2=[-5.0], sigma=-1)
        traj = integrate(st, consts113, 1e6)
        om = omega_limit(traj)
        assert isinstance(om, OmegaLimit)
        assert om.omega[0] == pytest.approx(1.0)

    def test_2d_ray_is_invariant(self, consts113):
        consts2 = ReducedConstants(
            N=2, alpha=1.0, kappa=consts113.kappa, g0=consts113.g0,
            nu_plus=consts113.nu_plus, nu_minus=consts113.nu_minus,
        )
        st = ReducedState(z1=[10.0, 3.0], z2=[0.0, 0.0], sigma=-1)
        traj = integrate(st, consts2, 1e6)
        om = omega_limit(traj)
        ray = np.array([10.0, 3.0]) / math.hypot(10.0, 3.0)
        assert np.max(np.abs(om.omega - ray)) < 1e-6
        assert om.increments[0][1] < 1e-6

    def test_rotational_equivariance(self, consts113):
        consts2 = ReducedConstants(
            N=2, alpha=1.0, kappa=consts113.kappa, g0=consts113.g0,
            nu_plus=consts113.nu_plus, nu_minus=consts113.nu_minus,
        )
        th = 0.7
        R = np.array([[math.cos(th), -math.sin(th)],
                      [math.sin(th), math.cos(th)]])
        z1, z2 = np.array([6.0, 1.0]), np.array([-4.0, 0.5])
        l1 = np.array([0.001, -0.002])
        om_a = omega_limit(
            integrate(ReducedState(z1=z1, z2=z2, ell1=l1, sigma=-1),
                      consts2, 1e5)
        ).omega
        om_b = omega_limit(
            integrate(ReducedState(z1=R @ z1, z2=R @ z2, ell1=R @ l1, sigma=-1),
                      consts2, 1e5)
        ).omega
        assert np.max(np.abs(om_b - R @ om_a)) < 1e-8

    def test_not_converged(self, consts113):
        consts2 = ReducedConstants(
            N=2, alpha=1.0, kappa=consts113.kappa, g0=consts113.g0,
            nu_plus=consts113.nu_plus, nu_minus=consts113.nu_minus,
        )
        # transverse velocity keeps the direction drifting on a short run
        st = ReducedState(z1=[5.0, 0.0], z2=[-5.0, 0.0],
                          ell1=[0.0, 0.05], sigma=-1)
        traj = integrate(st, consts2, 7.0)
        with pytest.raises(NotConverged):
            omega_limit(traj, tol=1e-6)


class TestTabulatedG:
    def test_close_to_asymptotic(self, consts113, profile113):
        st = ReducedState(z1=[5.0], z2=[-5.0], sigma=-1)
        ta = integrate(st, consts113, 1e4)
        tb = integrate(st, consts113, 1e4, g_mode="tabulated", profile=profile113)
        assert abs(ta.separation()[-1] - tb.separation()[-1]) < 5e-3
