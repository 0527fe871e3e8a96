"""Pair interaction quantities: oracle values, asymptotics, symmetries."""

import math

import numpy as np
import pytest
from scipy.integrate import simpson

from twosol.errors import DomainTooSmall
from twosol.interactions import (
    SolitonPair,
    energy_expansion,
    interaction_g,
    overlap_integrals,
    project_G,
)


def _pair(s1, s2, x1, x2):
    return SolitonPair(s1, s2, np.array([x1]), np.array([x2]))


class TestSolitonPair:
    def test_derived_quantities(self):
        pair = _pair(1, -1, 3.0, -4.0)
        assert pair.sigma == -1
        assert pair.z[0] == pytest.approx(7.0)
        assert pair.separation == pytest.approx(7.0)

    def test_coincident_centers_rejected(self):
        with pytest.raises(ValueError):
            _pair(1, 1, 2.0, 2.0)

    def test_bad_sign_rejected(self):
        with pytest.raises(ValueError):
            _pair(0, 1, 1.0, -1.0)

    def test_swap(self):
        pair = _pair(1, -1, 3.0, -4.0)
        sw = pair.swapped()
        assert sw.sigma == pair.sigma
        assert sw.z[0] == -pair.z[0]


class TestInteractionG:
    def test_matches_high_resolution_oracle(self, profile113):
        # independent oracle: closed-form sech profile on a 10x finer grid
        r0 = 10.0
        h = 1e-4
        y = np.arange(-25.0 / h, 25.0 / h + 1) * h
        Q = np.sqrt(2.0) / np.cosh(y - r0 / 2.0)
        dQp = 3.0 * Q * Q * (
            -np.sqrt(2.0) * np.sinh(y - r0 / 2.0) / np.cosh(y - r0 / 2.0) ** 2
        )
        shifted = np.sqrt(2.0) / np.cosh(y + r0 / 2.0)
        oracle = simpson(dQp * shifted, dx=h) / (4.0 / 3.0)
        assert interaction_g(profile113, r0) == pytest.approx(oracle, rel=1e-8)

    def test_tail_asymptote(self, profile113):
        # |g(r) - g0 q(r)| <= C q(r) / r with a moderate C over [8, 16]
        for r in np.arange(8.0, 16.5, 2.0):
            g = interaction_g(profile113, r)
            q = float(profile113.q_at(np.array([r]))[0])
            assert g > 0
            assert abs(g - profile113.g0 * q) <= 5.0 * q / r

    def test_domain_guard(self, profile113):
        with pytest.raises(DomainTooSmall):
            interaction_g(profile113, 26.0)
        with pytest.raises(ValueError):
            interaction_g(profile113, 1.0)

    def test_3d_positive_and_decaying(self, profile313):
        g8 = interaction_g(profile313, 8.0)
        g12 = interaction_g(profile313, 12.0)
        assert g8 > g12 > 0
        q8 = float(profile313.q_at(np.array([8.0]))[0])
        assert abs(g8 - profile313.g0 * q8) <= 5.0 * q8 / 8.0


class TestProjectG:
    def test_matches_interaction_g(self, profile113):
        pair = _pair(1, -1, 6.0, -6.0)
        p1, _ = project_G(pair, profile113)
        target = pair.sigma * profile113.c1 * interaction_g(profile113, 12.0)
        assert abs(p1 - target) / abs(target) <= 1e-2

    def test_antisymmetry_under_reflection(self, profile113):
        pair = _pair(1, -1, 5.0, -5.0)
        refl = _pair(1, -1, -5.0, 5.0)
        p1, p2 = project_G(pair, profile113)
        r1, r2 = project_G(refl, profile113)
        assert r1 == pytest.approx(-p1, rel=1e-10)
        assert r2 == pytest.approx(-p2, rel=1e-10)

    def test_projections_cancel_exactly_in_1d(self, profile113):
        # a 1D pair is reflection-symmetric about its midpoint, so the
        # two projections are exact negatives; only roundoff survives
        p1, p2 = project_G(_pair(1, 1, 6.5, -4.5), profile113)
        assert abs(p1 + p2) < 1e-12 * abs(p1)

    def test_correction_decays_faster_than_main_term(self, profile113):
        # the deviation from sigma c1 g(|z|) dies at a rate theta > 1,
        # strictly faster than the e^{-|z|} of the main term
        devs = []
        for L in (8.0, 16.0):
            p1, _ = project_G(_pair(1, 1, L / 2.0, -L / 2.0), profile113)
            devs.append(abs(p1 - profile113.c1 * interaction_g(profile113, L)))
        rate = math.log(devs[0] / devs[1]) / 8.0
        assert rate > 1.2

    def test_swap_exchanges_projections(self, profile113):
        # G is symmetric in the two solitons, so swapping the labels
        # exchanges the projections unchanged
        pair = _pair(1, -1, 6.5, -4.5)
        p1, p2 = project_G(pair, profile113)
        s1, s2 = project_G(pair.swapped(), profile113)
        assert s1 == pytest.approx(p2, rel=1e-9)
        assert s2 == pytest.approx(p1, rel=1e-9)

    def test_separation_guard(self, profile113):
        with pytest.raises(ValueError):
            project_G(_pair(1, 1, 1.0, -1.0), profile113)


class TestOverlapIntegrals:
    def test_cross_term_oracle(self, profile113):
        # int |Q1 Q2| for sech solitons at separation L: closed form
        # 2 int sech(y - L/2) sech(y + L/2) dy = 2 * 2L / sinh(L)
        L = 10.0
        rec = overlap_integrals(_pair(1, 1, L / 2.0, -L / 2.0), profile113, 1.0)
        exact = 4.0 * L / math.sinh(L)
        assert rec["cross_m"] == pytest.approx(exact, rel=1e-8)

    def test_normG_tracks_q(self, profile113):
        rec8 = overlap_integrals(_pair(1, 1, 4.0, -4.0), profile113, 1.0)
        rec16 = overlap_integrals(_pair(1, 1, 8.0, -8.0), profile113, 1.0)
        q8 = float(profile113.q_at(np.array([8.0]))[0])
        q16 = float(profile113.q_at(np.array([16.0]))[0])
        assert rec16["normG"] / rec8["normG"] == pytest.approx(q16 / q8, rel=0.2)

    def test_decay_slope(self, profile113):
        Ls = np.arange(8.0, 16.5, 2.0)
        logs = [
            math.log(
                overlap_integrals(_pair(1, 1, L / 2, -L / 2), profile113, 1.0)["normG"]
            )
            for L in Ls
        ]
        slope = np.polyfit(Ls, logs, 1)[0]
        assert slope == pytest.approx(-1.0, abs=0.05)

    def test_m_validation(self, profile113):
        pair = _pair(1, 1, 5.0, -5.0)
        with pytest.raises(ValueError):
            overlap_integrals(pair, profile113, 0.0)
        with pytest.raises(ValueError):
            overlap_integrals(pair, profile113, 2.5)
        with pytest.raises(ValueError):
            overlap_integrals(pair, profile113, 1.0, m_prime=1.5)


class TestEnergyExpansion:
    def test_limit_is_twice_single_energy(self, profile113):
        pred = energy_expansion(_pair(1, 1, 14.0, -14.0), profile113)
        assert pred == pytest.approx(8.0 / 3.0, abs=1e-10)

    def test_opposite_signs_store_energy(self, profile113):
        same = energy_expansion(_pair(1, 1, 5.0, -5.0), profile113)
        opp = energy_expansion(_pair(1, -1, 5.0, -5.0), profile113)
        assert opp > 2.0 * profile113.E_Q > same

    def test_matches_direct_grid_energy(self, profile113):
        # assemble u = Q1 + Q2 and integrate the energy density directly
        L = 10.0
        pair = _pair(1, 1, L / 2.0, -L / 2.0)
        h = 1.0 / 256.0
        x = np.arange(-40.0 / h, 40.0 / h + 1) * h
        q1 = profile113.q_at(np.abs(x - L / 2.0))
        q2 = profile113.q_at(np.abs(x + L / 2.0))
        u = q1 + q2
        du = np.gradient(u, h)
        direct = simpson(0.5 * (du * du + u * u) - 0.25 * u ** 4, dx=h)
        pred = energy_expansion(pair, profile113)
        gap = 2.0 * profile113.E_Q - direct
        expected_gap = profile113.c1 * profile113.g0 * float(
            profile113.q_at(np.array([L]))[0]
        )
        assert gap == pytest.approx(expected_gap, rel=0.1)
        assert pred == pytest.approx(direct, abs=0.2 * expected_gap)
