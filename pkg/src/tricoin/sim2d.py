"""Flat-rotation (single-axis) toss simulator.

A trial alternates exact ballistic flight with the single-impact model of
:mod:`tricoin.impact` until the bounce energy falls below the stop
fraction of the launch energy, then snaps the coin to the nearest stable
rest pose via the corner-balance sector rule.  The coin's cross section
in the tumble plane is the H x 2R rectangle; contact happens at whichever
corner reaches the ground first.  Contact times are located by
conservative advancement on the corner clearance (the clearance can close
no faster than |v| + |omega| * half_diagonal, so stepping by
clearance/rate can never tunnel through a touchdown).

All trial randomness lives in the initial conditions; given those, the
trajectory is deterministic, which keeps ensembles reproducible across
thread counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit, prange

from .core import GRAVITY, CoinSpec, Material, Outcome, inertia_of
from .impact import LeverRule

# outcome codes shared by both simulator kernels
CODE_SIDE = 0
CODE_FACE_UP = 1
CODE_FACE_DOWN = 2
CODE_DISCARDED = 3

OUTCOME_BY_CODE = {
    CODE_SIDE: Outcome.SIDE,
    CODE_FACE_UP: Outcome.FACE_UP,
    CODE_FACE_DOWN: Outcome.FACE_DOWN,
}

_TIE_EPS = 1e-9          # balance-point tie width, broken toward SIDE
_CLEARANCE_TOL = 1e-10   # m, treated as touching
_MIN_STEP = 1e-9         # s, contact-time resolution
_DEGENERATE_TRIG = 1e-12


@dataclass(frozen=True)
class TossState2D:
    """Planar toss state: COM position, axis angle from vertical, rates."""

    height: float
    horizontal: float = 0.0
    phi: float = 0.0
    v_vertical: float = 0.0
    v_horizontal: float = 0.0
    omega: float = 0.0


@dataclass(frozen=True)
class TossConfig2D:
    """Single-toss configuration.

    phi0/omega0 left as None are sampled uniformly from [0, pi) and
    [0, 10 pi) with the given seed; explicit values make the toss fully
    deterministic.  The initial vertical speed v0 is directed downward.
    Horizontal velocity is bookkeeping only (the planar model has no
    friction in flight or at impact), so it defaults to zero.
    """

    initial_height: float = 0.5
    phi0: float | None = None
    omega0: float | None = None
    v0: float = 0.0
    vx0: float = 0.0
    energy_stop_fraction: float = 0.01
    max_impacts: int = 10000
    timestep: float = 1e-5
    lever: LeverRule = LeverRule.PAPER

    def __post_init__(self) -> None:
        if not 0.0 < self.energy_stop_fraction < 1.0:
            raise ValueError(
                f"energy_stop_fraction must be in (0, 1), got {self.energy_stop_fraction}"
            )
        if not self.timestep > 0.0:
            raise ValueError(f"timestep must be > 0, got {self.timestep}")
        if self.max_impacts < 1:
            raise ValueError(f"max_impacts must be >= 1, got {self.max_impacts}")


@dataclass(frozen=True)
class TossResult2D:
    outcome: Outcome | None
    impacts: int
    final_phi: float
    stop_energy_ratio: float
    trajectory: np.ndarray | None = None  # columns: time, height, phi

    @property
    def discarded(self) -> bool:
        return self.outcome is None


@njit(cache=True)
def _corner(phi, height, radius):
    """Lowest cross-section corner at orientation phi.

    Returns (depth below COM, signed horizontal offset from COM, feature)
    with feature 0 = rim corner, 1 = face flat, 2 = lateral edge.  For the
    flat and edge-on features the contact resultant passes through the
    COM, so the offset is zero.
    """
    s = math.sin(phi)
    c = math.cos(phi)
    depth = 0.5 * height * abs(c) + radius * abs(s)
    if abs(s) <= _DEGENERATE_TRIG:
        return depth, 0.0, 1
    if abs(c) <= _DEGENERATE_TRIG:
        return depth, 0.0, 2
    ss = 1.0 if s > 0.0 else -1.0
    cs = 1.0 if c > 0.0 else -1.0
    dx = -radius * c * ss + 0.5 * height * s * cs
    return depth, dx, 0


@njit(cache=True)
def _classify_code(phi, height, radius):
    """Sector rule: SIDE iff tan(axis tilt) > 2R/H, ties toward SIDE."""
    c = math.cos(phi)
    ac = abs(c)
    asn = abs(math.sin(phi))
    if ac <= 0.0:
        return CODE_SIDE
    if height == 0.0:
        return CODE_FACE_DOWN if c > 0.0 else CODE_FACE_UP
    tan_tilt = asn / ac
    threshold = 2.0 * radius / height
    if abs(tan_tilt - threshold) < _TIE_EPS or tan_tilt > threshold:
        return CODE_SIDE
    return CODE_FACE_DOWN if c > 0.0 else CODE_FACE_UP


@njit(cache=True)
def _flight_to_contact(z, v, phi, w, height, radius, g, t_cap):
    """Time of the next corner touchdown along the current ballistic arc.

    Conservative advancement: while clearly airborne, jump straight to the
    earliest instant the COM could be within reach of the ground, then
    creep on the true clearance.  Returns (dt, hit) with hit False only if
    t_cap elapsed first.
    """
    rmax = math.sqrt(radius * radius + 0.25 * height * height)
    t = 0.0
    stalls = 0
    probes = 0
    while t < t_cap and probes < 200_000:
        probes += 1
        zt = z + v * t - 0.5 * g * t * t
        vt = v - g * t
        depth, dx, _feat = _corner(phi + w * t, height, radius)
        f = zt - depth
        if f <= _CLEARANCE_TOL:
            if vt + w * dx < 0.0:
                return t, True
            # touching but opening (grazing launch); creep forward
            stalls += 1
            t += _MIN_STEP if stalls < 1000 else 1e-5
            continue
        stalls = 0
        if zt - rmax > _CLEARANCE_TOL and vt < 0.0:
            # can't touch before the COM descends to within max reach
            drop = zt - rmax
            t_jump = (-abs(vt) + math.sqrt(vt * vt + 2.0 * g * drop)) / g
            if t_jump > _MIN_STEP:
                t += t_jump
                continue
        # largest step with b*s + g*s^2 <= 0.9 f, b the current closing-rate
        # bound (gravity term keeps it conservative through the step)
        b = abs(vt) + abs(w) * rmax + 1e-12
        step = (math.sqrt(b * b + 3.6 * g * f) - b) / (2.0 * g)
        if step < _MIN_STEP:
            step = _MIN_STEP
        t += step
    return t_cap, False


@njit(cache=True)
def _toss2d(
    phi0,
    omega0,
    z0,
    v0,
    height,
    radius,
    mass,
    restitution,
    eta,
    inertia,
    g,
    stop_fraction,
    max_impacts,
    lever_half_diagonal,
    rec_step,
    rec_buf,
):
    """One planar toss.  Returns (code, impacts, final phi, E_stop/E0, n_rec).

    rec_buf rows are (time, COM height, phi); pass rec_step <= 0 to skip
    recording.
    """
    depth, dx, _f = _corner(phi0, height, radius)
    z = z0 if z0 > depth else depth
    v = -abs(v0)
    phi = phi0
    w = omega0

    e0 = mass * g * (z - depth) + 0.5 * mass * v * v + 0.5 * inertia * w * w
    stop_energy = stop_fraction * e0
    n_rec = 0
    t_now = 0.0
    next_rec = 0.0
    if e0 <= 0.0:
        return _classify_code(phi, height, radius), 0, phi, 0.0, n_rec

    n_impacts = 0
    while True:
        # upper bound on this arc's duration: fall from apex to the ground plane
        t_cap = (v + math.sqrt(v * v + 2.0 * g * z)) / g + 1.0
        dt, hit = _flight_to_contact(z, v, phi, w, height, radius, g, t_cap)
        if rec_step > 0.0:
            while next_rec <= t_now + dt and n_rec < rec_buf.shape[0]:
                tau = next_rec - t_now
                rec_buf[n_rec, 0] = next_rec
                rec_buf[n_rec, 1] = z + v * tau - 0.5 * g * tau * tau
                rec_buf[n_rec, 2] = phi + w * tau
                n_rec += 1
                next_rec += rec_step
        z = z + v * dt - 0.5 * g * dt * dt
        v = v - g * dt
        phi = phi + w * dt
        t_now += dt
        if not hit:
            return CODE_DISCARDED, n_impacts, phi, 1.0, n_rec

        # impact sequence at this touchdown (re-applied while the corner
        # keeps closing; each pass is a braking contact, so it terminates)
        inner = 0
        while True:
            depth, dx, _feat = _corner(phi, height, radius)
            z = depth
            cos_tilt = abs(math.cos(phi))
            sin_tilt = abs(math.sin(phi))
            h1 = 0.5 * v * v / g
            if lever_half_diagonal:
                lever = abs(radius * cos_tilt - 0.5 * height * sin_tilt)
            else:
                lever = height * cos_tilt
            jump = eta * lever / inertia
            if dx > 0.0:
                dw = jump
            elif dx < 0.0:
                dw = -jump
            else:
                dw = 0.0
            w2 = w + dw
            budget = restitution * mass * g * h1 + 0.5 * inertia * (w * w - w2 * w2)
            v = math.sqrt(2.0 * budget / mass) if budget > 0.0 else 0.0
            w = w2
            n_impacts += 1
            energy = 0.5 * mass * v * v + 0.5 * inertia * w * w
            if rec_step > 0.0 and n_rec < rec_buf.shape[0]:
                rec_buf[n_rec, 0] = t_now
                rec_buf[n_rec, 1] = z
                rec_buf[n_rec, 2] = phi
                n_rec += 1
            if energy < stop_energy:
                return _classify_code(phi, height, radius), n_impacts, phi, energy / e0, n_rec
            if n_impacts >= max_impacts:
                return CODE_DISCARDED, n_impacts, phi, energy / e0, n_rec
            if v + w * dx > 0.0:
                break
            inner += 1
            if inner > 64:
                return CODE_DISCARDED, n_impacts, phi, energy / e0, n_rec


@njit(cache=True, parallel=True)
def _toss2d_batch(
    inits,
    height,
    radius,
    mass,
    restitution,
    eta,
    inertia,
    g,
    stop_fraction,
    max_impacts,
    lever_half_diagonal,
    out,
):
    """Run one toss per row of inits (phi0, omega0, z0, v0) into out."""
    empty = np.empty((0, 3))
    for i in prange(inits.shape[0]):
        code, n_impacts, phi, e_ratio, _n = _toss2d(
            inits[i, 0],
            inits[i, 1],
            inits[i, 2],
            inits[i, 3],
            height,
            radius,
            mass,
            restitution,
            eta,
            inertia,
            g,
            stop_fraction,
            max_impacts,
            lever_half_diagonal,
            -1.0,
            empty,
        )
        out[i, 0] = code
        out[i, 1] = n_impacts
        out[i, 2] = phi
        out[i, 3] = e_ratio


def lowest_corner(state: TossState2D, spec: CoinSpec) -> tuple[float, float, int]:
    """Lowest corner of the cross-section rectangle.

    Returns (corner height above ground, horizontal offset from the COM,
    feature id) with features as in the kernel: 0 rim corner, 1 face,
    2 lateral edge.
    """
    depth, dx, feature = _corner(state.phi, spec.height, spec.radius)
    return state.height - depth, dx, int(feature)


def step_flight(state: TossState2D, dt: float, g: float = GRAVITY) -> TossState2D:
    """One free-flight step; exact for constant gravity (drift-free).

    Velocity-Verlet form: positions advance with the half-step gravity
    term, velocity then updates, phi advances linearly (torque-free planar
    rotation).
    """
    return TossState2D(
        height=state.height + state.v_vertical * dt - 0.5 * g * dt * dt,
        horizontal=state.horizontal + state.v_horizontal * dt,
        phi=state.phi + state.omega * dt,
        v_vertical=state.v_vertical - g * dt,
        v_horizontal=state.v_horizontal,
        omega=state.omega,
    )


def flight_energy(state: TossState2D, spec: CoinSpec, g: float = GRAVITY) -> float:
    """Mechanical energy of an airborne coin (potential from the ground plane)."""
    inertia = inertia_of(spec).transverse
    return (
        spec.mass * g * state.height
        + 0.5 * spec.mass * (state.v_vertical ** 2 + state.v_horizontal ** 2)
        + 0.5 * inertia * state.omega ** 2
    )


def classify_rest_2d(phi: float, spec: CoinSpec) -> Outcome:
    """Rest classification by the corner-balance sector rule.

    SIDE iff tan(tilt of the axis from vertical) > 2R/H, i.e. the center
    of mass sits beyond the balance corner; balance ties go to SIDE.
    Otherwise the face whose normal points down names the outcome.
    """
    return OUTCOME_BY_CODE[_classify_code(phi, spec.height, spec.radius)]


def _resolve_initial(config: TossConfig2D, seed: int) -> tuple[float, float]:
    phi0, omega0 = config.phi0, config.omega0
    if phi0 is None or omega0 is None:
        rng = np.random.Generator(np.random.PCG64(seed))
        draw_phi, draw_omega = rng.random(2)
        if phi0 is None:
            phi0 = math.pi * draw_phi
        if omega0 is None:
            omega0 = 10.0 * math.pi * draw_omega
    return float(phi0), float(omega0)


def simulate_toss_2d(
    spec: CoinSpec,
    material: Material,
    config: TossConfig2D | None = None,
    seed: int = 0,
    g: float = GRAVITY,
    record: bool = False,
) -> TossResult2D:
    """Run a single planar toss.

    With record=True the returned trajectory holds (time, COM height, phi)
    samples at the config timestep cadence plus one row per impact.
    """
    config = config or TossConfig2D()
    phi0, omega0 = _resolve_initial(config, seed)
    inertia = inertia_of(spec).transverse
    if record:
        # generous cap: full-cadence flight plus impact rows
        cap = int(min(4_000_000, 240.0 / config.timestep)) + 2 * config.max_impacts
        rec_buf = np.empty((cap, 3))
        rec_step = config.timestep
    else:
        rec_buf = np.empty((0, 3))
        rec_step = -1.0
    code, n_impacts, phi, e_ratio, n_rec = _toss2d(
        phi0,
        omega0,
        config.initial_height,
        config.v0,
        spec.height,
        spec.radius,
        spec.mass,
        material.restitution,
        material.impact_eta,
        inertia,
        g,
        config.energy_stop_fraction,
        config.max_impacts,
        config.lever is LeverRule.HALF_DIAGONAL,
        rec_step,
        rec_buf,
    )
    trajectory = rec_buf[:n_rec].copy() if record else None
    outcome = OUTCOME_BY_CODE.get(int(code))
    return TossResult2D(
        outcome=outcome,
        impacts=int(n_impacts),
        final_phi=float(phi),
        stop_energy_ratio=float(e_ratio),
        trajectory=trajectory,
    )


def run_batch_2d(
    spec: CoinSpec,
    material: Material,
    inits: np.ndarray,
    energy_stop_fraction: float = 0.01,
    max_impacts: int = 10000,
    g: float = GRAVITY,
    lever: LeverRule = LeverRule.PAPER,
) -> np.ndarray:
    """Run one toss per row of inits (phi0, omega0, z0, v0).

    Returns an (n, 4) array of (outcome code, impacts, final phi,
    E_stop/E0).  Trials are independent; results do not depend on thread
    scheduling.
    """
    inits = np.ascontiguousarray(inits, dtype=np.float64)
    if inits.ndim != 2 or inits.shape[1] != 4:
        raise ValueError(f"inits must be (n, 4), got {inits.shape}")
    inertia = inertia_of(spec).transverse
    out = np.empty((inits.shape[0], 4))
    _toss2d_batch(
        inits,
        spec.height,
        spec.radius,
        spec.mass,
        material.restitution,
        material.impact_eta,
        inertia,
        g,
        energy_stop_fraction,
        max_impacts,
        lever is LeverRule.HALF_DIAGONAL,
        out,
    )
    return out
