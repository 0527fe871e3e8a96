"""Leading-order reduced dynamics of two interacting solitons.

Positions follow the velocity parameters, velocities are damped and driven
by the tail interaction g(|z|), and the exponential components evolve as
decoupled linear modes:

    dz_k/dt   = ell_k
    dell_k/dt = -2 alpha ell_k + (-1)^k sigma (z/|z|) g(|z|)
    da_k+-/dt = nu+- a_k+-

with z = z1 - z2.  For horizons beyond 1e4 the integration switches to the
logarithmic time variable so step counts scale with log t.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
from scipy.integrate import solve_ivp

from .errors import NotConverged, SeparationLost, StepUnderflow
from .groundstate import RadialProfile
from .spectrum import SpectralData

COLLISION_FLOOR = 2.0
_LOG_TIME_SWITCH = 1e4


@dataclass(frozen=True)
class ReducedConstants:
    """Physical constants the reduced flow depends on."""

    N: int
    alpha: float
    kappa: float
    g0: float
    nu_plus: float
    nu_minus: float

    @classmethod
    def from_solutions(cls, profile: RadialProfile, spectral: SpectralData):
        return cls(
            N=profile.params.N, alpha=profile.params.alpha,
            kappa=profile.kappa, g0=profile.g0,
            nu_plus=spectral.nu_plus, nu_minus=spectral.nu_minus,
        )


@dataclass
class ReducedState:
    """Positions, velocity parameters and exponential modes at time t."""

    z1: np.ndarray
    z2: np.ndarray
    ell1: Optional[np.ndarray] = None
    ell2: Optional[np.ndarray] = None
    a1p: float = 0.0
    a2p: float = 0.0
    a1m: float = 0.0
    a2m: float = 0.0
    t: float = 0.0
    sigma: int = -1

    def __post_init__(self):
        self.z1 = np.atleast_1d(np.asarray(self.z1, dtype=float))
        self.z2 = np.atleast_1d(np.asarray(self.z2, dtype=float))
        if self.ell1 is None:
            self.ell1 = np.zeros_like(self.z1)
        if self.ell2 is None:
            self.ell2 = np.zeros_like(self.z2)
        self.ell1 = np.atleast_1d(np.asarray(self.ell1, dtype=float))
        self.ell2 = np.atleast_1d(np.asarray(self.ell2, dtype=float))
        if self.sigma not in (1, -1):
            raise ValueError("sigma must be +1 or -1")
        if np.linalg.norm(self.z1 - self.z2) == 0.0:
            raise ValueError("centers must be distinct")

    @property
    def separation(self) -> float:
        return float(np.linalg.norm(self.z1 - self.z2))

    def pack(self) -> np.ndarray:
        return np.concatenate([
            self.z1, self.z2, self.ell1, self.ell2,
            [self.a1p, self.a2p, self.a1m, self.a2m],
        ])


def q_asym(r, N: int, kappa: float):
    """Tail form of the radial profile: kappa r^{-(N-1)/2} e^{-r}."""
    r = np.asarray(r, dtype=float)
    return kappa * r ** (-(N - 1) / 2.0) * np.exp(-r)


def _g_function(constants: ReducedConstants, g_mode: str, profile=None):
    if g_mode == "asymptotic":
        return lambda r: constants.g0 * float(
            q_asym(r, constants.N, constants.kappa)
        )
    if g_mode == "tabulated":
        if profile is None or profile.params.N != 1:
            raise ValueError("tabulated g needs a 1D profile")
        from scipy.interpolate import CubicSpline

        from .interactions import interaction_g

        r_tab = np.linspace(2.0, profile.grid.r_max - 5.0, 120)
        log_g = np.log([interaction_g(profile, r) for r in r_tab])
        spline = CubicSpline(r_tab, log_g)
        r_hi = r_tab[-1]

        def g(r):
            if r <= r_hi:
                return math.exp(float(spline(r)))
            return constants.g0 * float(q_asym(r, constants.N, constants.kappa))

        return g
    raise ValueError(f"unknown g_mode {g_mode!r}")


def rhs(
    state: ReducedState,
    constants: ReducedConstants,
    g_mode: str = "asymptotic",
    profile: Optional[RadialProfile] = None,
) -> np.ndarray:
    """Time derivative of the packed state vector."""
    if state.separation < COLLISION_FLOOR:
        raise SeparationLost(f"separation {state.separation:.3f} below floor")
    g = _g_function(constants, g_mode, profile)
    return _rhs_packed(state.pack(), constants, g, state.sigma,
                       len(state.z1))


def _rhs_geometric(y, constants, g, sigma, N):
    z1, z2 = y[0:N], y[N:2 * N]
    l1, l2 = y[2 * N:3 * N], y[3 * N:4 * N]
    z = z1 - z2
    sep = float(np.linalg.norm(z))
    unit = z / sep
    drive = sigma * g(sep) * unit
    alpha = constants.alpha
    dl1 = -2.0 * alpha * l1 - drive          # k = 1: (-1)^1 = -1
    dl2 = -2.0 * alpha * l2 + drive
    return np.concatenate([l1, l2, dl1, dl2])


def _rhs_packed(y, constants, g, sigma, N):
    a = y[4 * N:]
    da = np.array([
        constants.nu_plus * a[0], constants.nu_plus * a[1],
        constants.nu_minus * a[2], constants.nu_minus * a[3],
    ])
    return np.concatenate([_rhs_geometric(y[:4 * N], constants, g, sigma, N), da])


def _a_modes_closed_form(state0: ReducedState, constants, ts: np.ndarray):
    """a_k+-(t) = a_k+-(t0) exp(nu+- (t - t0))."""
    dt = ts - state0.t
    out = np.empty((4, len(ts)))
    for row, (a0, nu) in enumerate([
        (state0.a1p, constants.nu_plus), (state0.a2p, constants.nu_plus),
        (state0.a1m, constants.nu_minus), (state0.a2m, constants.nu_minus),
    ]):
        if a0 == 0.0:
            out[row] = 0.0
        else:
            with np.errstate(over="ignore"):
                out[row] = a0 * np.exp(nu * dt)
    return out


@dataclass
class ReducedTrajectory:
    """Sampled reduced flow with geometric time resolution."""

    t: np.ndarray
    y: np.ndarray                 # shape (4N+4, len(t))
    constants: ReducedConstants
    sigma: int
    N: int
    status: str                   # 'completed' or 'collision'
    t_final: float

    def z1(self):
        return self.y[0:self.N]

    def z2(self):
        return self.y[self.N:2 * self.N]

    def ell1(self):
        return self.y[2 * self.N:3 * self.N]

    def ell2(self):
        return self.y[3 * self.N:4 * self.N]

    def a_modes(self):
        return self.y[4 * self.N:]

    def separation(self):
        return np.linalg.norm(self.z1() - self.z2(), axis=0)

    def state_at(self, i: int) -> ReducedState:
        N = self.N
        y = self.y[:, i]
        return ReducedState(
            z1=y[0:N], z2=y[N:2 * N], ell1=y[2 * N:3 * N], ell2=y[3 * N:4 * N],
            a1p=y[4 * N], a2p=y[4 * N + 1], a1m=y[4 * N + 2], a2m=y[4 * N + 3],
            t=float(self.t[i]), sigma=self.sigma,
        )


def integrate(
    state0: ReducedState,
    constants: ReducedConstants,
    t_end: float,
    rtol: float = 1e-10,
    g_mode: str = "asymptotic",
    profile: Optional[RadialProfile] = None,
    n_samples: int = 400,
) -> ReducedTrajectory:
    """Adaptive RK45 with a log-time change of variable on long horizons."""
    if t_end <= state0.t:
        raise ValueError("t_end must exceed the initial time")
    g = _g_function(constants, g_mode, profile)
    N = len(state0.z1)
    sigma = state0.sigma

    # the exponential modes are decoupled scalar ODEs and are reconstructed
    # in closed form on the sample times; only the geometric part is stepped
    def f(t, y):
        return _rhs_geometric(y, constants, g, sigma, N)

    def f_log(tau, y):
        t = math.exp(tau)
        return t * _rhs_geometric(y, constants, g, sigma, N)

    def collision(t, y):
        z = y[0:N] - y[N:2 * N]
        return float(np.linalg.norm(z)) - COLLISION_FLOOR

    collision.terminal = True
    collision.direction = -1.0

    def collision_log(tau, y):
        return collision(tau, y)

    collision_log.terminal = True
    collision_log.direction = -1.0

    t0 = state0.t
    t_switch = min(t_end, _LOG_TIME_SWITCH)
    # geometric sampling from t0 (or 1e-2 if starting at 0)
    lo = max(t0, 1e-2)
    eval_pts = np.geomspace(lo, t_end, n_samples)
    first = [t0] if t0 < lo else []
    t_eval = np.unique(np.concatenate([first, eval_pts]))

    sol = solve_ivp(
        f, (t0, t_switch), state0.pack()[:4 * N], method="LSODA", rtol=rtol,
        atol=1e-14, t_eval=t_eval[t_eval <= t_switch], events=collision,
    )
    if sol.status == -1:
        raise StepUnderflow(sol.message)
    ts = [sol.t]
    ys = [sol.y]
    status = "completed"
    t_final = float(sol.t[-1]) if sol.t.size else t0
    if sol.status == 1:  # collision event
        status = "collision"
        t_final = float(sol.t_events[0][0])
        tc = np.array([t_final])
        ts.append(tc)
        ys.append(sol.y_events[0].T)
    elif t_end > t_switch:
        y_switch = sol.y[:, -1]
        sol2 = solve_ivp(
            f_log, (math.log(t_switch), math.log(t_end)), y_switch,
            method="LSODA", rtol=rtol, atol=1e-14,
            t_eval=np.log(t_eval[t_eval > t_switch]), events=collision_log,
        )
        if sol2.status == -1:
            raise StepUnderflow(sol2.message)
        ts.append(np.exp(sol2.t))
        ys.append(sol2.y)
        t_final = float(np.exp(sol2.t[-1])) if sol2.t.size else t_switch
        if sol2.status == 1:
            status = "collision"
            t_final = float(np.exp(sol2.t_events[0][0]))
            ts.append(np.array([t_final]))
            ys.append(sol2.y_events[0].T)
    t_all = np.concatenate(ts)
    y_all = np.concatenate(ys, axis=1)
    y_all = np.vstack([y_all, _a_modes_closed_form(state0, constants, t_all)])
    return ReducedTrajectory(
        t=t_all, y=y_all, constants=constants, sigma=sigma, N=N,
        status=status, t_final=t_final,
    )


def asymptotic_distance(t, constants: ReducedConstants):
    """log t - (N-1)/2 loglog t + log(kappa g0 / alpha)."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 10.0):
        raise ValueError("asymptotic form needs t >= 10")
    c0 = math.log(constants.kappa * constants.g0 / constants.alpha)
    return np.log(t) - 0.5 * (constants.N - 1) * np.log(np.log(t)) + c0


class OmegaLimit(NamedTuple):
    omega: np.ndarray
    increments: list


def omega_limit(traj: ReducedTrajectory, tol: float = 1e-6) -> OmegaLimit:
    """Limit direction z/|z| with dyadic Cauchy increments as evidence."""
    z = traj.z1() - traj.z2()
    sep = np.linalg.norm(z, axis=0)
    omega = z / sep
    T = traj.t[-1]

    def omega_at(tq):
        i = int(np.argmin(np.abs(traj.t - tq)))
        return omega[:, i]

    increments = []
    tq = T
    while tq / 2.0 > max(traj.t[0], 1.0):
        d = float(np.linalg.norm(omega_at(tq) - omega_at(tq / 2.0)))
        increments.append((tq, d))
        tq /= 2.0
    if not increments or increments[0][1] >= tol:
        raise NotConverged(
            "direction not Cauchy at the requested tolerance; extend t_end"
        )
    return OmegaLimit(omega[:, -1], increments)
