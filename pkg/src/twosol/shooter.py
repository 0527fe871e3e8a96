"""Locating persisting two-soliton data by exit-classification bisection.

Each opposite-sign pair carries two exponentially growing components, one
per soliton, so the set of initial data whose trajectory stays close to a
two-soliton sum has codimension two.  This module classifies trajectories
by which component ejects first, bisects the two seed coefficients on that
classification until the surviving box is tiny, converts the coefficients
to seeded-pair amplitudes h = beta * sigma * a, and probes the Lipschitz
dependence of the resulting amplitude map on the geometry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import simpson

from .errors import (
    MaxIterations,
    NewtonDiverged,
    NoSignChange,
    ProximityViolated,
    SeparationLost,
)
from .field1d import FieldState, ManifoldPair, Stepper, build_initial_data
from .groundstate import RadialProfile
from .modulation import decompose
from .params import Grid1D
from .spectrum import SpectralData

DEFAULT_BOX_TOL = 1e-10
DEFAULT_T_ACCEPT = 50.0
DEFAULT_CADENCE = 0.05
DEFAULT_COLLISION_FLOOR = 2.0
_MIN_SEPARATION = 8.0


def default_grid() -> Grid1D:
    """Domain wide enough for separation ~16 plus damped radiation."""
    return Grid1D(-40.0, 40.0, 80 * 64 + 1)


@dataclass(frozen=True)
class ShootConfig:
    """Numerical gates of the classification/bisection pipeline.

    delta sets the smallness scale; the search box half-width defaults to
    delta^{5/4} and the ejection threshold on b = (a1)^2 + (a2)^2 to
    delta^{3/2}.  A trajectory that reaches T_accept with b below the
    threshold counts as persisted.
    """

    delta: float = 1e-2
    search_radius: Optional[float] = None
    b_exit: Optional[float] = None
    T_accept: float = DEFAULT_T_ACCEPT
    box_tol: float = DEFAULT_BOX_TOL
    max_iterations: int = 200
    cadence: float = DEFAULT_CADENCE
    collision_floor: float = DEFAULT_COLLISION_FLOOR
    grid: Optional[Grid1D] = None
    dt: Optional[float] = None

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")
        if self.T_accept <= 0.0 or self.box_tol <= 0.0:
            raise ValueError("T_accept and box_tol must be positive")

    @property
    def radius(self) -> float:
        if self.search_radius is not None:
            return self.search_radius
        return self.delta ** 1.25

    @property
    def exit_level(self) -> float:
        if self.b_exit is not None:
            return self.b_exit
        return self.delta ** 1.5


@dataclass(frozen=True)
class ShootGeometry:
    """Pair geometry of a shooting run; the seeds are supplied separately.

    center is the midpoint of the coefficient search box, used to fold a
    known growing-mode content of (phi_u, phi_v) into the search.
    """

    z1: float
    z2: float
    sigma1: int = 1
    sigma2: int = -1
    ell1: float = 0.0
    ell2: float = 0.0
    phi_u: Optional[np.ndarray] = None
    phi_v: Optional[np.ndarray] = None
    center: tuple = (0.0, 0.0)

    def __post_init__(self):
        if self.sigma1 not in (1, -1) or self.sigma2 not in (1, -1):
            raise ValueError("signs must be +1 or -1")
        if abs(self.z1 - self.z2) < _MIN_SEPARATION:
            raise ValueError(
                f"separation must be at least {_MIN_SEPARATION}"
            )

    @classmethod
    def from_separation(cls, L: float, **kw) -> "ShootGeometry":
        return cls(z1=L / 2.0, z2=-L / 2.0, **kw)


@dataclass(frozen=True)
class ExitClassification:
    """Outcome of tracking one candidate trajectory.

    kind is one of 'persisted', 'unstable_exit', 'collision', 'blowup'.
    a_exit holds the last tracked coefficient pair; for an unstable exit
    mode (1 or 2) is the dominant component and sign its orientation.
    history carries the sampled (t, a1, a2, b, z1, z2, N_norm) arrays.
    """

    kind: str
    t: float
    a_exit: tuple
    b: float
    mode: Optional[int] = None
    sign: Optional[int] = None
    b_rate: Optional[float] = None
    decomposition_lost: bool = False
    history: dict = field(default_factory=dict, repr=False)


@dataclass
class ShootResult:
    """Persisting coefficient pair with the full probing trace."""

    a_plus: tuple
    h: tuple
    trace: list
    iterations: int
    residual_b_at_T: float
    final: ExitClassification


def candidate_state(
    geometry: ShootGeometry,
    a_plus: Sequence[float],
    profile: RadialProfile,
    spectral: SpectralData,
    grid: Grid1D,
) -> FieldState:
    """Initial data for one coefficient candidate on the given geometry."""
    spec = ManifoldPair(
        geometry.sigma1, geometry.sigma2, geometry.z1, geometry.z2,
        geometry.ell1, geometry.ell2,
        a_plus=(float(a_plus[0]), float(a_plus[1])),
        eps_u=geometry.phi_u, eps_v=geometry.phi_v,
    )
    return build_initial_data(spec, profile, spectral, grid)


def _fit_b_rate(ts, bs, level) -> Optional[float]:
    """Exponential rate of b over the samples above level/100."""
    ts = np.asarray(ts)
    bs = np.asarray(bs)
    sel = bs >= level / 100.0
    if np.count_nonzero(sel) < 4:
        sel = np.zeros(len(bs), dtype=bool)
        sel[-min(6, len(bs)):] = True
    sel &= bs > 0.0
    if np.count_nonzero(sel) < 2:
        return None
    return float(np.polyfit(ts[sel], np.log(bs[sel]), 1)[0])


def classify_exit(
    initial: FieldState,
    config: ShootConfig,
    profile: RadialProfile,
    spectral: SpectralData,
    guess: Optional[tuple] = None,
) -> ExitClassification:
    """Advance the field with modulation tracking until an exit triggers.

    The run stops at the first of: b reaching the ejection threshold
    (unstable exit, attributed to the component of largest magnitude),
    separation at the collision floor, field blowup, or t = T_accept
    (persisted).  A modulation failure before any of these is reported as
    a collision surrogate with decomposition_lost set.

    The ejection threshold is only armed for opposite-sign pairs: a
    same-sign pair has no nearby persisting trajectory to eject from, and
    its coefficients are dominated by the attraction drive, so it is
    tracked until the centers collide.
    """
    params = profile.params
    dt = config.dt if config.dt is not None else 0.5 * initial.grid.h
    stride = max(1, int(config.cadence / dt))
    level = config.exit_level
    stepper = Stepper(initial, params, dt)
    hist = {k: [] for k in ("t", "a1", "a2", "b", "z1", "z2", "N_norm")}

    def finish(kind, t, a, b, lost=False):
        mode = sign = rate = None
        if kind == "unstable_exit":
            mode = 1 if abs(a[0]) >= abs(a[1]) else 2
            sign = 1 if a[mode - 1] > 0 else -1
            rate = _fit_b_rate(hist["t"], hist["b"], level)
        history = {k: np.array(v) for k, v in hist.items()}
        return ExitClassification(
            kind=kind, t=t, a_exit=tuple(a), b=b, mode=mode, sign=sign,
            b_rate=rate, decomposition_lost=lost, history=history,
        )

    a = (math.nan, math.nan)
    b = math.nan
    opposite = True
    while True:
        state = stepper.state()
        try:
            dec = decompose(
                state, profile, spectral, guess=guess,
                separation_floor=config.collision_floor,
            )
        except SeparationLost:
            return finish("collision", state.t, a, b)
        except (NewtonDiverged, ProximityViolated):
            return finish("collision", state.t, a, b, lost=True)
        guess = (dec.z1, dec.z2)
        opposite = dec.sigma1 * dec.sigma2 == -1
        a = dec.a_plus
        b = a[0] * a[0] + a[1] * a[1]
        n = math.sqrt(dec.eps_norm ** 2 + dec.ell1 ** 2 + dec.ell2 ** 2)
        for key, val in zip(
            ("t", "a1", "a2", "b", "z1", "z2", "N_norm"),
            (state.t, a[0], a[1], b, dec.z1, dec.z2, n),
        ):
            hist[key].append(val)
        if opposite and b >= level:
            return finish("unstable_exit", state.t, a, b)
        if dec.separation <= config.collision_floor:
            return finish("collision", state.t, a, b)
        if state.t >= config.T_accept - 1e-12:
            return finish("persisted", state.t, a, b)
        remaining = int(round((config.T_accept - state.t) / dt))
        stepper.advance(min(stride, max(1, remaining)))
        if stepper.status == "blowup":
            return finish("blowup", stepper.t, a, b)


def _exit_sign(cls: ExitClassification, k: int) -> int:
    return 1 if cls.a_exit[k] > 0 else -1


def find_unstable_pair(
    geometry: ShootGeometry,
    config: ShootConfig,
    profile: RadialProfile,
    spectral: SpectralData,
) -> ShootResult:
    """Alternating coordinate bisection on the exit sign of each component.

    The four corners of the initial box must eject with the four distinct
    sign quadrants (each coordinate's sign matching its corner side);
    otherwise the box does not bracket and NoSignChange carries the corner
    classifications.  Midpoint classifications then halve the coordinates
    in alternation until both widths reach box_tol, and the final point is
    re-classified and required to persist.
    """
    if geometry.sigma1 * geometry.sigma2 != -1:
        raise ValueError("shooting requires an opposite-sign pair")
    grid = config.grid if config.grid is not None else default_grid()
    rad = config.radius
    c = geometry.center
    guess = (geometry.z1, geometry.z2)

    def classify(a):
        st = candidate_state(geometry, a, profile, spectral, grid)
        return classify_exit(st, config, profile, spectral, guess=guess)

    trace = []
    corners = []
    for s1 in (-1, 1):
        for s2 in (-1, 1):
            a = (c[0] + s1 * rad, c[1] + s2 * rad)
            cls = classify(a)
            trace.append((a, cls))
            corners.append(((s1, s2), cls))
    for (s1, s2), cls in corners:
        if cls.kind not in ("unstable_exit", "persisted"):
            raise NoSignChange(
                f"corner classified as {cls.kind}; box does not bracket",
                corners=corners,
            )
        if _exit_sign(cls, 0) != s1 or _exit_sign(cls, 1) != s2:
            raise NoSignChange(
                "corner exit signs do not match the quadrant pattern",
                corners=corners,
            )

    lo = [c[0] - rad, c[1] - rad]
    hi = [c[0] + rad, c[1] + rad]
    iterations = 0
    k = 0
    while max(hi[0] - lo[0], hi[1] - lo[1]) > config.box_tol:
        if hi[k] - lo[k] <= config.box_tol:
            k = 1 - k
        iterations += 1
        if iterations > config.max_iterations:
            raise MaxIterations(
                f"box width {max(hi[0] - lo[0], hi[1] - lo[1]):.3e} after "
                f"{config.max_iterations} classifications"
            )
        mid = ((lo[0] + hi[0]) / 2.0, (lo[1] + hi[1]) / 2.0)
        cls = classify(mid)
        trace.append((mid, cls))
        if cls.kind not in ("unstable_exit", "persisted"):
            raise NoSignChange(
                f"midpoint classified as {cls.kind}; bracketing lost",
                corners=corners,
            )
        if _exit_sign(cls, k) > 0:
            hi[k] = mid[k]
        else:
            lo[k] = mid[k]
        k = 1 - k

    a_star = ((lo[0] + hi[0]) / 2.0, (lo[1] + hi[1]) / 2.0)
    final = classify(a_star)
    trace.append((a_star, final))
    if final.kind != "persisted":
        raise MaxIterations(
            f"bisected point classified as {final.kind} at t = {final.t:.2f}; "
            "tighten box_tol or shorten T_accept"
        )
    h = (
        spectral.beta * geometry.sigma1 * a_star[0],
        spectral.beta * geometry.sigma2 * a_star[1],
    )
    return ShootResult(
        a_plus=a_star, h=h, trace=trace, iterations=iterations,
        residual_b_at_T=final.b, final=final,
    )


def _phi_arrays(phi, grid: Grid1D):
    if phi is None:
        return None, None
    phi_u, phi_v = phi
    if phi_u is not None and len(phi_u) != grid.n:
        raise ValueError("phi_u length does not match the grid")
    if phi_v is not None and len(phi_v) != grid.n:
        raise ValueError("phi_v length does not match the grid")
    return phi_u, phi_v


def growing_mode_projection(
    phi_u: Optional[np.ndarray],
    phi_v: Optional[np.ndarray],
    z: float,
    spectral: SpectralData,
    grid: Grid1D,
) -> float:
    """Growing-component coefficient of (phi_u, phi_v) at center z."""
    x, h = grid.x, grid.h
    Y = spectral.Y_at(np.abs(x - z))
    out = 0.0
    if phi_u is not None:
        out += spectral.zeta_plus * float(simpson(phi_u * Y, dx=h))
    if phi_v is not None:
        out += float(simpson(phi_v * Y, dx=h))
    return out


def find_H(
    L: float,
    phi,
    config: ShootConfig,
    profile: RadialProfile,
    spectral: SpectralData,
) -> ShootResult:
    """Seed amplitudes (h1, h2) whose trajectory persists at separation L.

    The growing-mode content of phi = (phi_u, phi_v) is projected out
    first, centering the coefficient search box so that the box midpoint
    already cancels it; the bisection then supplies the manifold
    correction.  The returned result carries h = beta * sigma * a_plus.
    """
    if L < _MIN_SEPARATION:
        raise ValueError(f"separation must be at least {_MIN_SEPARATION}")
    grid = config.grid if config.grid is not None else default_grid()
    phi_u, phi_v = _phi_arrays(phi, grid)
    a1 = growing_mode_projection(phi_u, phi_v, L / 2.0, spectral, grid)
    a2 = growing_mode_projection(phi_u, phi_v, -L / 2.0, spectral, grid)
    geometry = ShootGeometry.from_separation(
        L, phi_u=phi_u, phi_v=phi_v, center=(-a1, -a2),
    )
    cfg = config if config.grid is not None else _with_grid(config, grid)
    return find_unstable_pair(geometry, cfg, profile, spectral)


def _with_grid(config: ShootConfig, grid: Grid1D) -> ShootConfig:
    from dataclasses import replace

    return replace(config, grid=grid)


@dataclass(frozen=True)
class Omega:
    """Seeded-pair geometry descriptor: separation plus a free remainder."""

    L: float
    phi_u: Optional[np.ndarray] = None
    phi_v: Optional[np.ndarray] = None


def omega_distance(a: Omega, b: Omega, grid: Grid1D) -> float:
    """|L - L~| plus the H1 x L2 norm of the remainder difference."""
    from .field1d import _dx4

    h = grid.h
    du = (a.phi_u if a.phi_u is not None else 0.0) \
        - (b.phi_u if b.phi_u is not None else 0.0)
    dv = (a.phi_v if a.phi_v is not None else 0.0) \
        - (b.phi_v if b.phi_v is not None else 0.0)
    out = abs(a.L - b.L) ** 2
    if np.ndim(du) > 0:
        ddu = _dx4(du, h)
        out += float(simpson(ddu * ddu + du * du, dx=h))
    if np.ndim(dv) > 0:
        out += float(simpson(dv * dv, dx=h))
    return math.sqrt(out)


def lipschitz_probe(
    config: ShootConfig,
    omega: Omega,
    variants: Sequence[Omega],
    profile: RadialProfile,
    spectral: SpectralData,
) -> dict:
    """Difference quotients of the amplitude map over a probe batch.

    Reports each |h(omega) - h(variant)| / distance, their maximum, and
    the constant the maximum implies against the delta^{1/4} scale.
    """
    grid = config.grid if config.grid is not None else default_grid()
    cfg = _with_grid(config, grid)
    distances = []
    for var in variants:
        d = omega_distance(omega, var, grid)
        if d == 0.0:
            raise ValueError("probe geometry coincides with the base")
        if d >= config.delta:
            raise ValueError(
                f"probe distance {d:.3e} reaches the scale delta = "
                f"{config.delta}"
            )
        distances.append(d)
    base = find_H(omega.L, (omega.phi_u, omega.phi_v), cfg, profile, spectral)
    h0 = np.array(base.h)
    ratios = []
    for var, d in zip(variants, distances):
        res = find_H(var.L, (var.phi_u, var.phi_v), cfg, profile, spectral)
        ratios.append(float(np.linalg.norm(np.array(res.h) - h0)) / d)
    max_ratio = max(ratios)
    scale = config.delta ** 0.25
    return {
        "ratios": ratios,
        "distances": distances,
        "max_ratio": max_ratio,
        "delta": config.delta,
        "scale": scale,
        "fitted_constant": max_ratio / scale,
        "h_base": tuple(h0),
    }
