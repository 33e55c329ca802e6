"""Volumetric-rotation rigid-body toss simulator.

State is COM position, a body-to-world unit quaternion, linear velocity,
and angular velocity.  Free flight composes gravity with the exact
torque-free motion of a symmetric top (the body axis precesses uniformly
about the fixed angular momentum while the transverse body-frame spin
rotates at w3 (It - Ia) / It), so in-flight angular momentum and the
quaternion norm are conserved to roundoff at any step size.  Touchdowns
are located by conservative advancement on the support-point clearance
and resolved as single-point impulses with Newtonian restitution along
the normal and a clamped Coulomb friction cone; near the ground the
simulator switches to fixed small steps so persistent contact (tipping,
rocking, rolling) is handled by the same impulse rule acting as an
implicit contact force.

A trial settles when contact has persisted for a streak of ground steps
while the decayable energy (vertical bounce plus transverse tumble) is
below the stop fraction of the launch energy and the residual hop is
geometrically negligible.  Axial spin and horizontal sliding are excluded
from the settle energy: neither can change the rest classification of a
cylinder on a plane.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from numba import njit, prange

from .core import GRAVITY, CoinSpec, Material, Outcome, inertia_of
from .sim2d import CODE_DISCARDED, CODE_FACE_DOWN, CODE_FACE_UP, CODE_SIDE, OUTCOME_BY_CODE

_TIE_EPS = 1e-9
_CLEARANCE_TOL = 1e-9    # m
_MIN_STEP = 1e-9         # s
_AXIS_DEGENERATE = 1e-9


class ContactFeature(enum.Enum):
    RIM_BOTTOM = "RimBottom"
    RIM_TOP = "RimTop"
    FACE_BOTTOM = "FaceBottom"
    FACE_TOP = "FaceTop"
    LATERAL = "Lateral"


_FEATURE_BY_CODE = {
    0: ContactFeature.RIM_BOTTOM,
    1: ContactFeature.FACE_BOTTOM,
    2: ContactFeature.LATERAL,
}


@dataclass(frozen=True)
class TossState3D:
    """Rigid-body state; orientation maps body coordinates to world."""

    position: np.ndarray          # (3,) m
    orientation: np.ndarray      # (4,) unit quaternion, scalar first
    velocity: np.ndarray          # (3,) m/s
    angular_velocity: np.ndarray  # (3,) rad/s, world frame

    def __post_init__(self) -> None:
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float))
        object.__setattr__(self, "orientation", np.asarray(self.orientation, dtype=float))
        object.__setattr__(self, "velocity", np.asarray(self.velocity, dtype=float))
        object.__setattr__(
            self, "angular_velocity", np.asarray(self.angular_velocity, dtype=float)
        )
        norm = float(np.linalg.norm(self.orientation))
        if abs(norm - 1.0) > 1e-6:
            raise ValueError(f"orientation must be a unit quaternion, |q| = {norm}")


@dataclass(frozen=True)
class ContactPoint:
    world_point: np.ndarray   # (3,)
    normal: np.ndarray        # (3,), unit, ground up
    penetration_depth: float  # >= 0
    feature: ContactFeature


@dataclass(frozen=True)
class TossConfig3D:
    """Single 3-D toss configuration.

    orientation/spin left as None are sampled (uniform axis on the sphere
    with a uniform roll, spin direction uniform with magnitude in
    [0, spin0_max]); explicit values make the toss deterministic.  v0 is
    the initial downward speed.
    """

    initial_height: float = 0.5
    orientation: np.ndarray | None = None
    spin: np.ndarray | None = None
    spin0_max: float = 10.0 * math.pi
    v0: float = 0.0
    energy_stop_fraction: float = 0.01
    max_impacts: int = 10000
    ground_timestep: float = 5e-4
    settle_streak: int = 50
    settle_hop: float = 5e-4   # m, residual hop height treated as at rest
    max_time: float = 120.0    # s of simulated time before discarding

    def __post_init__(self) -> None:
        if not 0.0 < self.energy_stop_fraction < 1.0:
            raise ValueError(
                f"energy_stop_fraction must be in (0, 1), got {self.energy_stop_fraction}"
            )
        if not self.ground_timestep > 0.0:
            raise ValueError(f"ground_timestep must be > 0, got {self.ground_timestep}")
        if self.max_impacts < 1 or self.settle_streak < 1:
            raise ValueError("max_impacts and settle_streak must be >= 1")


@dataclass(frozen=True)
class TossResult3D:
    outcome: Outcome | None
    impacts: int
    final_axis_z: float
    stop_energy_ratio: float
    diagnostics: dict

    @property
    def discarded(self) -> bool:
        return self.outcome is None


# ---------------------------------------------------------------------------
# quaternion helpers (scalar-first, body-to-world)

@njit(cache=True, inline="always")
def _qmul(aw, ax, ay, az, bw, bx, by, bz):
    return (
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    )


@njit(cache=True, inline="always")
def _qrot(qw, qx, qy, qz, vx, vy, vz):
    """Rotate a vector from body to world: q v q*."""
    tx = 2.0 * (qy * vz - qz * vy)
    ty = 2.0 * (qz * vx - qx * vz)
    tz = 2.0 * (qx * vy - qy * vx)
    return (
        vx + qw * tx + qy * tz - qz * ty,
        vy + qw * ty + qz * tx - qx * tz,
        vz + qw * tz + qx * ty - qy * tx,
    )


@njit(cache=True, inline="always")
def _qrot_inv(qw, qx, qy, qz, vx, vy, vz):
    return _qrot(qw, -qx, -qy, -qz, vx, vy, vz)


@njit(cache=True, inline="always")
def _axis_angle(ux, uy, uz, angle):
    half = 0.5 * angle
    s = math.sin(half)
    return math.cos(half), s * ux, s * uy, s * uz


@njit(cache=True)
def _free_step(qw, qx, qy, qz, w1, w2, w3, it, ia, dt):
    """Exact torque-free step of a symmetric top.

    Body angular velocity (w1, w2, w3) has w3 along the symmetry axis.
    The orientation advances by a world rotation about the (conserved)
    angular momentum at rate |L|/It composed with a body rotation about
    the symmetry axis at rate w3 (It - Ia)/It; the transverse body spin
    counter-rotates at the same rate.  Preserves |L| and the quaternion
    norm to roundoff at any dt.
    """
    l1 = it * w1
    l2 = it * w2
    l3 = ia * w3
    lnorm = math.sqrt(l1 * l1 + l2 * l2 + l3 * l3)
    if lnorm <= 0.0:
        return qw, qx, qy, qz, w1, w2, w3
    lwx, lwy, lwz = _qrot(qw, qx, qy, qz, l1 / lnorm, l2 / lnorm, l3 / lnorm)
    pw, px, py, pz = _axis_angle(lwx, lwy, lwz, (lnorm / it) * dt)
    spin_rate = w3 * (it - ia) / it
    rw, rx, ry, rz = _axis_angle(0.0, 0.0, 1.0, spin_rate * dt)
    qw, qx, qy, qz = _qmul(pw, px, py, pz, qw, qx, qy, qz)
    qw, qx, qy, qz = _qmul(qw, qx, qy, qz, rw, rx, ry, rz)
    ang = spin_rate * dt
    c = math.cos(ang)
    s = math.sin(ang)
    w1n = w1 * c + w2 * s
    w2n = -w1 * s + w2 * c
    return qw, qx, qy, qz, w1n, w2n, w3


@njit(cache=True, inline="always")
def _support(qw, qx, qy, qz, height, radius):
    """Lowest point of the cylinder at the given orientation.

    Returns (axis world components, depth of the point below the COM,
    point offset from the COM, feature code 0 rim / 1 face / 2 lateral).
    Face and lateral contacts report the resultant point under the COM
    (face center / line point), where the normal has no moment arm in
    the degenerate direction.
    """
    ax, ay, az = _qrot(qw, qx, qy, qz, 0.0, 0.0, 1.0)
    sxy2 = ax * ax + ay * ay
    sxy = math.sqrt(sxy2) if sxy2 > 0.0 else 0.0
    aaz = abs(az)
    depth = 0.5 * height * aaz + radius * sxy
    sgn = 1.0 if az >= 0.0 else -1.0
    if sxy <= _AXIS_DEGENERATE:
        # face down flat: resultant at the bottom face center
        return ax, ay, az, depth, -0.5 * height * sgn * ax, -0.5 * height * sgn * ay, -0.5 * height * sgn * az, 1
    if aaz <= _AXIS_DEGENERATE:
        # lying on the lateral surface: resultant below the COM
        return ax, ay, az, depth, 0.0, 0.0, -radius, 2
    # steepest-descent radial direction within the face plane
    inv = 1.0 / sxy
    dx = (az * ax) * inv
    dy = (az * ay) * inv
    dz = (az * az - 1.0) * inv
    rx = -0.5 * height * sgn * ax + radius * dx
    ry = -0.5 * height * sgn * ay + radius * dy
    rz = -0.5 * height * sgn * az + radius * dz
    return ax, ay, az, depth, rx, ry, rz, 0


@njit(cache=True)
def _impulse(
    qw, qx, qy, qz,
    vx, vy, vz,
    wx, wy, wz,
    rx, ry, rz,
    mass, it, ia,
    restitution, friction,
):
    """Single-point contact impulse at offset r with ground normal +z.

    Couples normal restitution and Coulomb friction: solve the sticking
    impulse first, keep it if inside the cone, otherwise slide along the
    pre-impact slip direction with |j_t| = mu j_n.  Returns the updated
    (v, w) plus (j_n, |j_t|, post normal point speed, pre normal point
    speed); a separating contact returns j_n = 0 and leaves the state
    unchanged.
    """
    # contact point velocity
    ux = vx + wy * rz - wz * ry
    uy = vy + wz * rx - wx * rz
    uz = vz + wx * ry - wy * rx
    if uz >= 0.0:
        return vx, vy, vz, wx, wy, wz, 0.0, 0.0, uz, uz

    inv_m = 1.0 / mass

    # K action: K(p) = p/m + (I^-1 (r x p)) x r, world frame
    # columns of K for the 3x3 stick solve
    k00 = 0.0; k01 = 0.0; k02 = 0.0
    k10 = 0.0; k11 = 0.0; k12 = 0.0
    k20 = 0.0; k21 = 0.0; k22 = 0.0
    for col in range(3):
        px = 1.0 if col == 0 else 0.0
        py = 1.0 if col == 1 else 0.0
        pz = 1.0 if col == 2 else 0.0
        cx = ry * pz - rz * py
        cy = rz * px - rx * pz
        cz = rx * py - ry * px
        b1, b2, b3 = _qrot_inv(qw, qx, qy, qz, cx, cy, cz)
        b1 /= it
        b2 /= it
        b3 /= ia
        gx, gy, gz = _qrot(qw, qx, qy, qz, b1, b2, b3)
        ex = px * inv_m + (gy * rz - gz * ry)
        ey = py * inv_m + (gz * rx - gx * rz)
        ez = pz * inv_m + (gx * ry - gy * rx)
        if col == 0:
            k00, k10, k20 = ex, ey, ez
        elif col == 1:
            k01, k11, k21 = ex, ey, ez
        else:
            k02, k12, k22 = ex, ey, ez

    # stick target: kill tangential point velocity, reflect normal by k
    tx = -ux
    ty = -uy
    tz = -(1.0 + restitution) * uz
    det = (
        k00 * (k11 * k22 - k12 * k21)
        - k01 * (k10 * k22 - k12 * k20)
        + k02 * (k10 * k21 - k11 * k20)
    )
    jx = 0.0
    jy = 0.0
    jz = 0.0
    solved = False
    if abs(det) > 1e-30:
        jx = (
            tx * (k11 * k22 - k12 * k21)
            - k01 * (ty * k22 - k12 * tz)
            + k02 * (ty * k21 - k11 * tz)
        ) / det
        jy = (
            k00 * (ty * k22 - k12 * tz)
            - tx * (k10 * k22 - k12 * k20)
            + k02 * (k10 * tz - ty * k20)
        ) / det
        jz = (
            k00 * (k11 * tz - ty * k21)
            - k01 * (k10 * tz - ty * k20)
            + tx * (k10 * k21 - k11 * k20)
        ) / det
        solved = jz > 0.0
    jt = math.sqrt(jx * jx + jy * jy)
    if not solved or jt > friction * jz:
        # slide: impulse along n - mu t_hat, t_hat the pre-impact slip
        # direction (or the stick solve's friction direction when there is
        # no slip and the cone still binds through inertial coupling)
        ut = math.sqrt(ux * ux + uy * uy)
        if ut > 1e-14:
            dx = -friction * ux / ut
            dy = -friction * uy / ut
        elif solved and jt > 1e-30:
            dx = friction * jx / jt
            dy = friction * jy / jt
        else:
            dx = 0.0
            dy = 0.0
        # normal component of K (n - mu t_hat)
        denom = k20 * dx + k21 * dy + k22
        if denom <= 1e-30:
            # pathological wedging; fall back to the frictionless impulse
            denom = k22
            dx = 0.0
            dy = 0.0
        jn = -(1.0 + restitution) * uz / denom
        jx = jn * dx
        jy = jn * dy
        jz = jn
        jt = friction * jn if (dx != 0.0 or dy != 0.0) else 0.0

    # apply
    vx += jx * inv_m
    vy += jy * inv_m
    vz += jz * inv_m
    cx = ry * jz - rz * jy
    cy = rz * jx - rx * jz
    cz = rx * jy - ry * jx
    b1, b2, b3 = _qrot_inv(qw, qx, qy, qz, cx, cy, cz)
    b1 /= it
    b2 /= it
    b3 /= ia
    gx, gy, gz = _qrot(qw, qx, qy, qz, b1, b2, b3)
    wx += gx
    wy += gy
    wz += gz
    uz_post = vz + wx * ry - wy * rx
    return vx, vy, vz, wx, wy, wz, jz, jt, uz_post, uz


_GROUND_ENTER_HOP = 2e-3   # m: rebounds smaller than this are handled grounded
_CONTACT_BAND = 1e-4       # m: clearance counted as persisting contact


@njit(cache=True)
def _toss3d(
    qw0, qx0, qy0, qz0,
    wx0, wy0, wz0,
    z0, v0,
    height, radius, mass,
    restitution, friction,
    it, ia, g,
    stop_fraction, max_impacts,
    dt_ground, settle_streak, settle_hop, max_time,
):
    """One volumetric toss.

    Ballistic arcs end with an impulse applied at the exact touchdown
    state; small rebounds and persistent contact (tipping, rocking,
    rolling) run on fixed ground steps where the same impulse rule acts as
    an implicit contact force.  Resting micro-impulses are not counted as
    impacts; the impact counter tracks genuine touchdowns.

    Returns (code, impacts, final axis z, E_settle/E0, max cone violation,
    max restitution violation, max |L| drift per arc, max |q| drift).
    """
    qw, qx, qy, qz = qw0, qx0, qy0, qz0
    z = z0
    vx = 0.0
    vy = 0.0
    vz = -abs(v0)
    # body-frame angular velocity
    w1, w2, w3 = _qrot_inv(qw, qx, qy, qz, wx0, wy0, wz0)

    axw, ayw, azw, depth, crx, cry, crz, feat = _support(qw, qx, qy, qz, height, radius)
    if z < depth:
        z = depth
    z_floor = 0.5 * height if 0.5 * height < radius else radius
    e0 = (
        mass * g * (z - z_floor)
        + 0.5 * mass * vz * vz
        + 0.5 * (it * (w1 * w1 + w2 * w2) + ia * w3 * w3)
    )
    stop_energy = stop_fraction * e0
    settle_energy = mass * g * settle_hop
    v_micro = 0.5 * math.sqrt(2.0 * g * settle_hop)  # below this, a contact is resting

    if e0 <= settle_energy:
        return _classify_axis(azw, height, radius), 0, azw, 0.0, -1.0, -1.0, 0.0, 0.0

    rmax = math.sqrt(radius * radius + 0.25 * height * height)
    t_now = 0.0
    n_impacts = 0
    streak = 0
    max_cone = -1.0e300
    max_rest = -1.0e300
    max_ldrift = 0.0
    max_qdrift = 0.0
    grounded = False
    work = 0  # probe/step budget so no state can stall the trial

    while t_now < max_time and work < 2_000_000:
        if not grounded:
            # ---- flight: conservative advancement to the next touchdown.
            # |omega| is constant along a torque-free arc, so the reach of
            # the support point changes at most at rate |omega| * rmax.
            wwx, wwy, wwz = _qrot(qw, qx, qy, qz, w1, w2, w3)
            wmag = math.sqrt(wwx * wwx + wwy * wwy + wwz * wwz)
            rate_rot = wmag * rmax
            l1 = it * w1
            l2 = it * w2
            l3 = ia * w3
            lmag0 = math.sqrt(l1 * l1 + l2 * l2 + l3 * l3)
            lx0, ly0, lz0 = _qrot(qw, qx, qy, qz, l1, l2, l3)

            zmax = z if z > 0.0 else 0.0
            t_cap = (vz + math.sqrt(vz * vz + 2.0 * g * zmax)) / g + 1.0
            t = 0.0
            hit = False
            while t < t_cap and work < 2_000_000:
                work += 1
                zt = z + vz * t - 0.5 * g * t * t
                vt = vz - g * t
                qtw, qtx, qty, qtz, w1t, w2t, w3t = _free_step(
                    qw, qx, qy, qz, w1, w2, w3, it, ia, t
                )
                axt, ayt, azt, depth, crx, cry, crz, feat = _support(
                    qtw, qtx, qty, qtz, height, radius
                )
                f = zt - depth
                if f <= _CLEARANCE_TOL:
                    hit = True
                    break
                if zt - rmax > _CLEARANCE_TOL and vt < 0.0:
                    # jump to the earliest instant the support could reach down
                    drop = zt - rmax
                    t_jump = (vt + math.sqrt(vt * vt + 2.0 * g * drop)) / g
                    if t_jump > _MIN_STEP:
                        t += t_jump
                        continue
                # largest step with b*s + g*s^2 <= 0.9 f, b the current
                # closing-rate bound (gravity term keeps it conservative
                # through the step)
                b = abs(vt) + rate_rot + 1e-12
                step = (math.sqrt(b * b + 3.6 * g * f) - b) / (2.0 * g)
                if step < _MIN_STEP:
                    step = _MIN_STEP
                t += step
            # advance the state to t exactly
            z = z + vz * t - 0.5 * g * t * t
            vz = vz - g * t
            qw, qx, qy, qz, w1, w2, w3 = _free_step(qw, qx, qy, qz, w1, w2, w3, it, ia, t)
            t_now += t
            qn = math.sqrt(qw * qw + qx * qx + qy * qy + qz * qz)
            qdev = abs(qn - 1.0)
            if qdev > max_qdrift:
                max_qdrift = qdev
            qw /= qn
            qx /= qn
            qy /= qn
            qz /= qn
            if lmag0 > 0.0:
                l1 = it * w1
                l2 = it * w2
                l3 = ia * w3
                lx1, ly1, lz1 = _qrot(qw, qx, qy, qz, l1, l2, l3)
                ld = math.sqrt(
                    (lx1 - lx0) ** 2 + (ly1 - ly0) ** 2 + (lz1 - lz0) ** 2
                ) / lmag0
                if ld > max_ldrift:
                    max_ldrift = ld
            if not hit:
                return CODE_DISCARDED, n_impacts, azw, 1.0, max_cone, max_rest, max_ldrift, max_qdrift

            # impulse at the exact touchdown state
            axw, ayw, azw, depth, crx, cry, crz, feat = _support(qw, qx, qy, qz, height, radius)
            wwx, wwy, wwz = _qrot(qw, qx, qy, qz, w1, w2, w3)
            nvx, nvy, nvz, nwx, nwy, nwz, jn, jt, uz_post, uz_pre = _impulse(
                qw, qx, qy, qz, vx, vy, vz, wwx, wwy, wwz,
                crx, cry, crz, mass, it, ia, restitution, friction,
            )
            if jn > 0.0:
                vx, vy, vz = nvx, nvy, nvz
                w1, w2, w3 = _qrot_inv(qw, qx, qy, qz, nwx, nwy, nwz)
                cone = jt - friction * jn
                if cone > max_cone:
                    max_cone = cone
                rest = uz_post - (-restitution * uz_pre)
                if rest > max_rest:
                    max_rest = rest
                if -uz_pre > v_micro:
                    n_impacts += 1
                    if n_impacts >= max_impacts:
                        return CODE_DISCARDED, n_impacts, azw, 1.0, max_cone, max_rest, max_ldrift, max_qdrift
                if 0.5 * vz * vz / g < _GROUND_ENTER_HOP:
                    grounded = True
                    streak = 0
            else:
                # touchdown with a separating/grazing contact point: hand
                # off to fixed ground steps, which always advance time
                grounded = True
                streak = 0
            continue

        # ---- grounded: fixed small steps with impulse contact resolution
        work += 1
        qw, qx, qy, qz, w1, w2, w3 = _free_step(qw, qx, qy, qz, w1, w2, w3, it, ia, dt_ground)
        z = z + vz * dt_ground - 0.5 * g * dt_ground * dt_ground
        vz = vz - g * dt_ground
        t_now += dt_ground
        qn = math.sqrt(qw * qw + qx * qx + qy * qy + qz * qz)
        qdev = abs(qn - 1.0)
        if qdev > max_qdrift:
            max_qdrift = qdev
        qw /= qn
        qx /= qn
        qy /= qn
        qz /= qn

        axw, ayw, azw, depth, crx, cry, crz, feat = _support(qw, qx, qy, qz, height, radius)
        f = z - depth
        if f < 0.0:
            z -= f  # project out of the ground
            wwx, wwy, wwz = _qrot(qw, qx, qy, qz, w1, w2, w3)
            nvx, nvy, nvz, nwx, nwy, nwz, jn, jt, uz_post, uz_pre = _impulse(
                qw, qx, qy, qz, vx, vy, vz, wwx, wwy, wwz,
                crx, cry, crz, mass, it, ia, restitution, friction,
            )
            if jn > 0.0:
                vx, vy, vz = nvx, nvy, nvz
                w1, w2, w3 = _qrot_inv(qw, qx, qy, qz, nwx, nwy, nwz)
                cone = jt - friction * jn
                if cone > max_cone:
                    max_cone = cone
                rest = uz_post - (-restitution * uz_pre)
                if rest > max_rest:
                    max_rest = rest
                if -uz_pre > v_micro:
                    n_impacts += 1
                    if n_impacts >= max_impacts:
                        return CODE_DISCARDED, n_impacts, azw, 1.0, max_cone, max_rest, max_ldrift, max_qdrift
            streak += 1
        elif f < _CONTACT_BAND:
            streak += 1
        else:
            streak = 0
            if f > _GROUND_ENTER_HOP:
                grounded = False
                continue

        if streak >= settle_streak:
            e_dec = 0.5 * mass * vz * vz + 0.5 * it * (w1 * w1 + w2 * w2)
            hop = 0.5 * vz * vz / g
            if (e_dec < stop_energy or e_dec < settle_energy) and hop < settle_hop:
                return (
                    _classify_axis(azw, height, radius),
                    n_impacts,
                    azw,
                    e_dec / e0 if e0 > 0.0 else 0.0,
                    max_cone,
                    max_rest,
                    max_ldrift,
                    max_qdrift,
                )
    return CODE_DISCARDED, n_impacts, azw, 1.0, max_cone, max_rest, max_ldrift, max_qdrift


@njit(cache=True, inline="always")
def _classify_axis(az, height, radius):
    """Band rule: SIDE iff tan(axis tilt) > 2R/H, ties toward SIDE."""
    aaz = abs(az)
    sxy = math.sqrt(max(0.0, 1.0 - az * az))
    if aaz <= 0.0:
        return CODE_SIDE
    if height == 0.0:
        return CODE_FACE_UP if az > 0.0 else CODE_FACE_DOWN
    tan_tilt = sxy / aaz
    threshold = 2.0 * radius / height
    if abs(tan_tilt - threshold) < _TIE_EPS or tan_tilt > threshold:
        return CODE_SIDE
    return CODE_FACE_UP if az > 0.0 else CODE_FACE_DOWN


@njit(cache=True, parallel=True)
def _toss3d_batch(
    inits,
    height, radius, mass,
    restitution, friction,
    it, ia, g,
    stop_fraction, max_impacts,
    dt_ground, settle_streak, settle_hop, max_time,
    out,
):
    """One toss per row of inits (qw qx qy qz, wx wy wz, z0, v0)."""
    for i in prange(inits.shape[0]):
        code, n_impacts, az, e_ratio, cone, rest, ldrift, qdrift = _toss3d(
            inits[i, 0], inits[i, 1], inits[i, 2], inits[i, 3],
            inits[i, 4], inits[i, 5], inits[i, 6],
            inits[i, 7], inits[i, 8],
            height, radius, mass,
            restitution, friction,
            it, ia, g,
            stop_fraction, max_impacts,
            dt_ground, settle_streak, settle_hop, max_time,
        )
        out[i, 0] = code
        out[i, 1] = n_impacts
        out[i, 2] = az
        out[i, 3] = e_ratio
        out[i, 4] = cone
        out[i, 5] = rest
        out[i, 6] = ldrift
        out[i, 7] = qdrift


# ---------------------------------------------------------------------------
# python-level API

def support_point(state: TossState3D, spec: CoinSpec, tol: float = 1e-9) -> ContactPoint | None:
    """Lowest point of the cylinder, as a contact when at or below ground.

    Returns None while the coin is airborne by more than tol.
    """
    q = state.orientation
    _ax, _ay, _az, depth, rx, ry, rz, feat = _support(
        q[0], q[1], q[2], q[3], spec.height, spec.radius
    )
    clearance = float(state.position[2]) - depth
    if clearance > tol:
        return None
    point = np.array(
        [state.position[0] + rx, state.position[1] + ry, state.position[2] + rz]
    )
    return ContactPoint(
        world_point=point,
        normal=np.array([0.0, 0.0, 1.0]),
        penetration_depth=max(0.0, -clearance),
        feature=_FEATURE_BY_CODE[int(feat)],
    )


def lowest_point_height(state: TossState3D, spec: CoinSpec) -> float:
    """Height of the support point above the ground plane."""
    q = state.orientation
    depth = _support(q[0], q[1], q[2], q[3], spec.height, spec.radius)[3]
    return float(state.position[2]) - depth


def resolve_impact_3d(
    state: TossState3D,
    contact: ContactPoint,
    material: Material,
    spec: CoinSpec,
) -> TossState3D:
    """Apply the restitution/friction impulse for an approaching contact.

    Raises ValueError when the contact point is separating (no impulse to
    apply).  Penetration is projected out along the normal.
    """
    inertia = inertia_of(spec)
    q = state.orientation
    r = contact.world_point - state.position
    vx, vy, vz, wx, wy, wz, jn, _jt, _uzp, uz_pre = _impulse(
        q[0], q[1], q[2], q[3],
        state.velocity[0], state.velocity[1], state.velocity[2],
        state.angular_velocity[0], state.angular_velocity[1], state.angular_velocity[2],
        r[0], r[1], r[2],
        spec.mass, inertia.transverse, inertia.axial,
        material.restitution, material.friction,
    )
    if uz_pre >= 0.0:
        raise ValueError("contact point is separating; no impulse applies")
    position = state.position + contact.normal * contact.penetration_depth
    return TossState3D(
        position=position,
        orientation=q.copy(),
        velocity=np.array([vx, vy, vz]),
        angular_velocity=np.array([wx, wy, wz]),
    )


def free_flight_step(state: TossState3D, spec: CoinSpec, dt: float, g: float = GRAVITY) -> TossState3D:
    """Advance gravity plus exact torque-free rotation by dt."""
    inertia = inertia_of(spec)
    q = state.orientation
    w1, w2, w3 = _qrot_inv(
        q[0], q[1], q[2], q[3],
        state.angular_velocity[0], state.angular_velocity[1], state.angular_velocity[2],
    )
    qw, qx, qy, qz, w1, w2, w3 = _free_step(
        q[0], q[1], q[2], q[3], w1, w2, w3, inertia.transverse, inertia.axial, dt
    )
    norm = math.sqrt(qw * qw + qx * qx + qy * qy + qz * qz)
    qw, qx, qy, qz = qw / norm, qx / norm, qy / norm, qz / norm
    wx, wy, wz = _qrot(qw, qx, qy, qz, w1, w2, w3)
    position = state.position + state.velocity * dt
    position = position + np.array([0.0, 0.0, -0.5 * g * dt * dt])
    velocity = state.velocity + np.array([0.0, 0.0, -g * dt])
    return TossState3D(
        position=position,
        orientation=np.array([qw, qx, qy, qz]),
        velocity=velocity,
        angular_velocity=np.array([wx, wy, wz]),
    )


def classify_rest_3d(orientation: np.ndarray, spec: CoinSpec) -> Outcome:
    """Rest classification from the settled orientation quaternion.

    SIDE iff tan(angle between the symmetry axis and vertical) > 2R/H;
    otherwise the sign of axis . up picks FACE_UP or FACE_DOWN.  Balance
    ties break toward SIDE, as in the planar rule.
    """
    q = np.asarray(orientation, dtype=float)
    _ax, _ay, az = _qrot(q[0], q[1], q[2], q[3], 0.0, 0.0, 1.0)
    return OUTCOME_BY_CODE[_classify_axis(az, spec.height, spec.radius)]


def orientation_from_axis(axis: np.ndarray, roll: float = 0.0) -> np.ndarray:
    """Unit quaternion taking the body z-axis to the given world axis."""
    ax, ay, az = (float(axis[0]), float(axis[1]), float(axis[2]))
    norm = math.sqrt(ax * ax + ay * ay + az * az)
    if norm <= 0.0:
        raise ValueError("axis must be nonzero")
    ax, ay, az = ax / norm, ay / norm, az / norm
    if az > -1.0 + 1e-12:
        w = 1.0 + az
        x, y, z = -ay, ax, 0.0
        n = math.sqrt(w * w + x * x + y * y)
        q_align = (w / n, x / n, y / n, z / n)
    else:
        q_align = (0.0, 1.0, 0.0, 0.0)  # pi about x
    half = 0.5 * roll
    q_roll = (math.cos(half), 0.0, 0.0, math.sin(half))
    qw, qx, qy, qz = _qmul(*q_align, *q_roll)
    return np.array([qw, qx, qy, qz])


def simulate_toss_3d(
    spec: CoinSpec,
    material: Material,
    config: TossConfig3D | None = None,
    seed: int = 0,
    g: float = GRAVITY,
) -> TossResult3D:
    """Run a single volumetric toss."""
    config = config or TossConfig3D()
    rng = np.random.Generator(np.random.PCG64(seed))
    if config.orientation is None:
        zc = 2.0 * rng.random() - 1.0
        azm = 2.0 * math.pi * rng.random()
        sxy = math.sqrt(max(0.0, 1.0 - zc * zc))
        axis = np.array([sxy * math.cos(azm), sxy * math.sin(azm), zc])
        orientation = orientation_from_axis(axis, roll=2.0 * math.pi * rng.random())
    else:
        orientation = np.asarray(config.orientation, dtype=float)
    if config.spin is None:
        zc = 2.0 * rng.random() - 1.0
        azm = 2.0 * math.pi * rng.random()
        sxy = math.sqrt(max(0.0, 1.0 - zc * zc))
        mag = config.spin0_max * rng.random()
        spin = mag * np.array([sxy * math.cos(azm), sxy * math.sin(azm), zc])
    else:
        spin = np.asarray(config.spin, dtype=float)
    init = np.empty((1, 9))
    init[0, 0:4] = orientation
    init[0, 4:7] = spin
    init[0, 7] = config.initial_height
    init[0, 8] = config.v0
    out = run_batch_3d(spec, material, init, config=config, g=g)
    return _result_from_row(out[0])


def _result_from_row(row: np.ndarray) -> TossResult3D:
    code = int(row[0])
    return TossResult3D(
        outcome=OUTCOME_BY_CODE.get(code),
        impacts=int(row[1]),
        final_axis_z=float(row[2]),
        stop_energy_ratio=float(row[3]),
        diagnostics={
            "max_cone_violation": float(row[4]),
            "max_restitution_violation": float(row[5]),
            "max_momentum_drift": float(row[6]),
            "max_quaternion_drift": float(row[7]),
        },
    )


def run_batch_3d(
    spec: CoinSpec,
    material: Material,
    inits: np.ndarray,
    config: TossConfig3D | None = None,
    g: float = GRAVITY,
) -> np.ndarray:
    """Run one toss per row of inits (qw qx qy qz, wx wy wz, z0, v0).

    Returns (n, 8): outcome code, impacts, final axis z, E_settle/E0, max
    friction-cone violation, max restitution violation, max angular
    momentum drift per arc, max quaternion norm drift.
    """
    config = config or TossConfig3D()
    inits = np.ascontiguousarray(inits, dtype=np.float64)
    if inits.ndim != 2 or inits.shape[1] != 9:
        raise ValueError(f"inits must be (n, 9), got {inits.shape}")
    inertia = inertia_of(spec)
    out = np.empty((inits.shape[0], 8))
    _toss3d_batch(
        inits,
        spec.height, spec.radius, spec.mass,
        material.restitution, material.friction,
        inertia.transverse, inertia.axial, g,
        config.energy_stop_fraction, config.max_impacts,
        config.ground_timestep, config.settle_streak, config.settle_hop,
        config.max_time,
        out,
    )
    return out
