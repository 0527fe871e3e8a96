"""Decomposition of a field near a two-soliton sum and its diagnostics.

A state (u, v) close to a sum of two solitons is written as
u = Q_1 + Q_2 + eps, v = -sum ell_k dQ_k + eta with both remainders
orthogonal to the translation modes; the unstable/stable components a_k+-
are the projections on the exponential directions.  The module also builds
the corrector W(a+) whose vector form has prescribed unstable projections,
and evaluates the energy and Liapunov functionals used to monitor runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import simpson

from .errors import (
    InsufficientCadence,
    NewtonDiverged,
    ProximityViolated,
    SeparationLost,
    SingularSystem,
)
from .field1d import FieldState, _dx4
from .groundstate import RadialProfile
from .params import Grid1D
from .spectrum import SpectralData

DEFAULT_GAMMA = 0.1
DEFAULT_SEPARATION_FLOOR = 4.0
DEFAULT_K = 5.0
_NEWTON_MAX_ITER = 25


@dataclass
class Decomposition:
    """Modulation parameters and remainders of a state at time t."""

    sigma1: int
    sigma2: int
    z1: float
    z2: float
    ell1: float
    ell2: float
    eps: np.ndarray
    eta: np.ndarray
    a_plus: tuple
    a_minus: tuple
    t: float
    grid: Grid1D
    eps_norm: float          # H1 x L2 norm of (eps, eta)
    orth_residual: float     # worst orthogonality inner product, relative

    @property
    def z(self) -> float:
        return self.z1 - self.z2

    @property
    def separation(self) -> float:
        return abs(self.z)

    @property
    def sigma(self) -> int:
        return self.sigma1 * self.sigma2


@dataclass
class DiagnosticRecord:
    """Energy/Liapunov functionals of one decomposition."""

    N_norm: float
    b: float
    E_func: float
    F_func: float
    B_func: float
    M_func: float
    y: float
    r: float
    R_plus: float
    R_minus: float
    mu: float


def default_mu(spectral: SpectralData) -> float:
    return 0.5 * min(1.0, spectral.params.alpha, abs(spectral.nu_minus))


def _inner(f: np.ndarray, g: np.ndarray, h: float) -> float:
    return float(simpson(f * g, dx=h))


def _soliton_fields(profile: RadialProfile, x, z, sign):
    s = np.sign(x - z)
    q = sign * profile.q_at(np.abs(x - z))
    dq = sign * profile.dq_at(np.abs(x - z)) * s
    return q, dq


def _guess_centers(state: FieldState, floor: float):
    """Two largest separated peaks of |u|, ordered left-to-right descending z."""
    x, u = state.grid.x, np.abs(state.u)
    i1 = int(np.argmax(u))
    masked = u.copy()
    half = max(floor / 2.0, 2.0)
    masked[np.abs(x - x[i1]) < half] = 0.0
    i2 = int(np.argmax(masked))
    za, zb = x[i1], x[i2]
    return (za, zb) if za > zb else (zb, za)


def decompose(
    state: FieldState,
    profile: RadialProfile,
    spectral: SpectralData,
    guess: Optional[tuple] = None,
    signs: Optional[tuple] = None,
    gamma: float = DEFAULT_GAMMA,
    separation_floor: float = DEFAULT_SEPARATION_FLOOR,
) -> Decomposition:
    """Newton solve for the centers, then linear solves for ell and a+-."""
    x, h = state.grid.x, state.grid.h
    u, v = state.u, state.v
    if guess is None:
        guess = _guess_centers(state, separation_floor)
    z1, z2 = float(guess[0]), float(guess[1])
    if signs is None:
        idx1 = int(np.argmin(np.abs(x - z1)))
        idx2 = int(np.argmin(np.abs(x - z2)))
        signs = (int(np.sign(u[idx1])) or 1, int(np.sign(u[idx2])) or 1)
    s1, s2 = signs

    scale = profile.c1  # size of <dQ, dQ>, the dominant Jacobian entry
    for it in range(_NEWTON_MAX_ITER + 1):
        q1, d1 = _soliton_fields(profile, x, z1, s1)
        q2, d2 = _soliton_fields(profile, x, z2, s2)
        eps = u - q1 - q2
        F = np.array([_inner(eps, d1, h), _inner(eps, d2, h)])
        if max(abs(F[0]), abs(F[1])) < 1e-15 * scale and it > 0:
            break
        if it == _NEWTON_MAX_ITER:
            raise NewtonDiverged(
                f"center iteration stalled at residual {max(abs(F)):.3e}"
            )
        J = np.array([
            [_inner(d1, d1, h), _inner(d2, d1, h)],
            [_inner(d1, d2, h), _inner(d2, d2, h)],
        ])
        dz = np.linalg.solve(J, F)
        z1 -= dz[0]
        z2 -= dz[1]

    if abs(z1 - z2) <= separation_floor:
        raise SeparationLost(
            f"separation {abs(z1 - z2):.3f} at or below floor {separation_floor}"
        )

    # velocity parameters: <v + sum ell_j dQ_j, dQ_k> = 0
    G = np.array([
        [_inner(d1, d1, h), _inner(d2, d1, h)],
        [_inner(d1, d2, h), _inner(d2, d2, h)],
    ])
    rhs = -np.array([_inner(v, d1, h), _inner(v, d2, h)])
    ell = np.linalg.solve(G, rhs)
    eta = v + ell[0] * d1 + ell[1] * d2

    Y1 = spectral.Y_at(np.abs(x - z1))
    Y2 = spectral.Y_at(np.abs(x - z2))
    pe1, pe2 = _inner(eps, Y1, h), _inner(eps, Y2, h)
    pn1, pn2 = _inner(eta, Y1, h), _inner(eta, Y2, h)
    a_plus = (
        spectral.zeta_plus * pe1 + pn1,
        spectral.zeta_plus * pe2 + pn2,
    )
    a_minus = (
        spectral.zeta_minus * pe1 + pn1,
        spectral.zeta_minus * pe2 + pn2,
    )

    deps = _dx4(eps, h)
    eps_norm = math.sqrt(
        _inner(deps, deps, h) + _inner(eps, eps, h) + _inner(eta, eta, h)
    )
    if eps_norm >= gamma:
        raise ProximityViolated(
            f"remainder norm {eps_norm:.3e} at or above the gate {gamma}"
        )
    denom = max(eps_norm, 1e-30)
    orth = max(
        abs(_inner(eps, d1, h)), abs(_inner(eps, d2, h)),
        abs(_inner(eta, d1, h)), abs(_inner(eta, d2, h)),
    ) / denom

    return Decomposition(
        sigma1=s1, sigma2=s2, z1=z1, z2=z2,
        ell1=float(ell[0]), ell2=float(ell[1]),
        eps=eps, eta=eta, a_plus=a_plus, a_minus=a_minus,
        t=state.t, grid=state.grid, eps_norm=eps_norm, orth_residual=orth,
    )


def build_W(
    a_plus: Sequence[float],
    geometry: tuple,
    profile: RadialProfile,
    spectral: SpectralData,
    x: np.ndarray,
) -> tuple:
    """Corrector W with <W_vec, Z_k+> = a_k and <W, dQ_k> = 0.

    W is sought in span{Y_1, Y_2, dQ_1, dQ_2}; since the vector form is
    (W, nu+ W), the unstable projection reduces to <W, Y_k> = beta a_k.
    Returns (W, nu+ W).
    """
    s1, s2, z1, z2 = geometry
    if abs(z1 - z2) <= DEFAULT_SEPARATION_FLOOR:
        raise SingularSystem(
            f"separation {abs(z1 - z2):.3f} too small for the corrector system"
        )
    a1, a2 = float(a_plus[0]), float(a_plus[1])
    if a1 == 0.0 and a2 == 0.0:
        zero = np.zeros_like(x)
        return zero, zero.copy()
    h = float(x[1] - x[0])
    _, d1 = _soliton_fields(profile, x, z1, s1)
    _, d2 = _soliton_fields(profile, x, z2, s2)
    Y1 = spectral.Y_at(np.abs(x - z1))
    Y2 = spectral.Y_at(np.abs(x - z2))
    basis = [Y1, Y2, d1, d2]
    gram = np.array([[_inner(a, b, h) for b in basis] for a in basis])
    rhs = np.array([spectral.beta * a1, spectral.beta * a2, 0.0, 0.0])
    if np.linalg.cond(gram) > 1e12:
        raise SingularSystem("corrector basis is numerically degenerate")
    coef = np.linalg.solve(gram, rhs)
    W = coef[0] * Y1 + coef[1] * Y2 + coef[2] * d1 + coef[3] * d2
    return W, spectral.nu_plus * W


def diagnostics(
    dec: Decomposition,
    profile: RadialProfile,
    spectral: SpectralData,
    mu: Optional[float] = None,
    K: float = DEFAULT_K,
) -> DiagnosticRecord:
    """Evaluate the modified energy and the derived Liapunov quantities."""
    if mu is None:
        mu = default_mu(spectral)
    alpha = spectral.params.alpha
    if mu > min(1.0, alpha, abs(spectral.nu_minus)):
        raise ValueError("mu exceeds min(1, alpha, |nu-|)")
    x, h = dec.grid.x, dec.grid.h
    rho = 2.0 * alpha - mu
    q1, _ = _soliton_fields(profile, x, dec.z1, dec.sigma1)
    q2, _ = _soliton_fields(profile, x, dec.z2, dec.sigma2)
    R = q1 + q2
    Fn = spectral.params.F
    fn = spectral.params.f
    eps, eta = dec.eps, dec.eta
    deps = _dx4(eps, h)
    dens = (
        deps ** 2
        + (1.0 - rho * mu) * eps ** 2
        + (eta + mu * eps) ** 2
        - 2.0 * (Fn(R + eps) - Fn(R) - fn(R) * eps)
    )
    E_func = float(simpson(dens, dx=h))
    B_func = (
        dec.ell1 ** 2 + dec.ell2 ** 2
        + (dec.a_minus[0] ** 2 + dec.a_minus[1] ** 2) / (2.0 * mu)
    )
    F_func = E_func + B_func
    b = dec.a_plus[0] ** 2 + dec.a_plus[1] ** 2
    N_norm = math.sqrt(dec.eps_norm ** 2 + dec.ell1 ** 2 + dec.ell2 ** 2)
    M_func = (F_func - b / (2.0 * spectral.nu_plus)) / mu ** 2
    y = dec.z + (dec.ell1 - dec.ell2) / (2.0 * alpha)
    r = abs(y)
    qr = float(profile.q_at(np.array([r]))[0])
    R_plus = math.exp(K * M_func) / qr
    R_minus = math.exp(-K * M_func) / qr
    return DiagnosticRecord(
        N_norm=N_norm, b=b, E_func=E_func, F_func=F_func, B_func=B_func,
        M_func=M_func, y=y, r=r, R_plus=R_plus, R_minus=R_minus, mu=mu,
    )


def _central_dt(vals: np.ndarray, ts: np.ndarray) -> np.ndarray:
    """2nd-order central time derivative at the interior samples."""
    return (vals[2:] - vals[:-2]) / (ts[2:] - ts[:-2])


def check_parameter_odes(
    trajectory: Sequence[Decomposition],
    profile: RadialProfile,
    spectral: SpectralData,
    mu: Optional[float] = None,
    K: float = DEFAULT_K,
    theta: float = 1.5,
    cadence_limit: float = 0.05,
) -> dict:
    """Fitted implied constants of the modulation-parameter equations.

    Every estimate is evaluated as max over the trajectory of
    |left-hand side| / bound-expression; the report also carries the
    interior time grid.  Bounds use N^2 = ||(eps,eta)||^2 + sum |ell|^2.
    """
    from .interactions import interaction_g

    if len(trajectory) < 3:
        raise InsufficientCadence("need at least three decomposition samples")
    ts = np.array([d.t for d in trajectory])
    gaps = np.diff(ts)
    if np.max(gaps) > cadence_limit + 1e-12:
        raise InsufficientCadence(
            f"sample gap {np.max(gaps):.3f} above the {cadence_limit} limit"
        )
    if mu is None:
        mu = default_mu(spectral)
    alpha = spectral.params.alpha
    sigma = trajectory[0].sigma
    g0 = profile.g0

    z1 = np.array([d.z1 for d in trajectory])
    z2 = np.array([d.z2 for d in trajectory])
    l1 = np.array([d.ell1 for d in trajectory])
    l2 = np.array([d.ell2 for d in trajectory])
    ap = np.array([d.a_plus for d in trajectory])
    am = np.array([d.a_minus for d in trajectory])
    recs = [diagnostics(d, profile, spectral, mu, K) for d in trajectory]
    Nsq = np.array([rec.N_norm ** 2 for rec in recs])
    Fv = np.array([rec.F_func for rec in recs])
    Bv = np.array([rec.B_func for rec in recs])
    bv = np.array([rec.b for rec in recs])
    Mv = np.array([rec.M_func for rec in recs])
    rv = np.array([rec.r for rec in recs])
    sep = np.abs(z1 - z2)
    zsign = np.sign(z1 - z2)
    q_sep = profile.q_at(sep)
    q_r = profile.q_at(rv)
    g_sep = np.array([interaction_g(profile, s) for s in sep])

    mid = slice(1, -1)
    floor = 1e-300

    def fitted(lhs, bound):
        return float(np.max(np.abs(lhs) / np.maximum(bound, floor)))

    def fitted_onesided(lhs, bound):
        return float(np.max(lhs / np.maximum(bound, floor)))

    report = {"t": ts[mid], "mu": mu, "theta": theta}
    bound_n2q = Nsq[mid] + q_sep[mid]
    report["z"] = max(
        fitted(_central_dt(z1, ts) - l1[mid], Nsq[mid]),
        fitted(_central_dt(z2, ts) - l2[mid], Nsq[mid]),
    )
    report["l"] = max(
        fitted(_central_dt(l1, ts) + 2 * alpha * l1[mid], bound_n2q),
        fitted(_central_dt(l2, ts) + 2 * alpha * l2[mid], bound_n2q),
    )
    bound_theta = Nsq[mid] + np.exp(-theta * sep[mid])
    drive = sigma * zsign[mid] * g_sep[mid]
    report["lbis"] = max(
        fitted(_central_dt(l1, ts) + 2 * alpha * l1[mid] + drive, bound_theta),
        fitted(_central_dt(l2, ts) + 2 * alpha * l2[mid] - drive, bound_theta),
    )
    report["a"] = max(
        max(
            fitted(
                _central_dt(ap[:, k], ts) - spectral.nu_plus * ap[mid, k],
                bound_n2q,
            ),
            fitted(
                _central_dt(am[:, k], ts) - spectral.nu_minus * am[mid, k],
                bound_n2q,
            ),
        )
        for k in (0, 1)
    )
    inv_q = 1.0 / q_r
    report["dist"] = fitted(
        _central_dt(inv_q, ts) + sigma * g0 / alpha,
        inv_q[mid] * (Nsq[mid] + q_r[mid] / np.maximum(rv[mid], 1e-9)),
    )
    Nv = np.sqrt(Nsq)
    bound_cubic = (Nv ** 3 + q_r * Nv)[mid]
    report["b"] = fitted(_central_dt(bv, ts) - 2 * spectral.nu_plus * bv[mid],
                         bound_cubic)
    report["damped_F"] = fitted_onesided(
        _central_dt(Fv, ts) + 2 * mu * Fv[mid], bound_cubic
    )
    report["damped_B"] = fitted_onesided(
        _central_dt(Bv, ts) + 2 * mu * Bv[mid], bound_cubic
    )
    report["M"] = fitted_onesided(
        _central_dt(Mv, ts) + Nsq[mid], q_r[mid] ** 2
    )
    return report
