"""Constellation aggregation gain: the dB ratio of worst-case aggregate
received power from all visible satellites to the maximum achievable
single-satellite received power.

Geometry model: circular Keplerian orbits in a Walker-delta arrangement,
spherical non-rotating Earth (user longitude is an inertial angle).  These
simplifications are fine for a power *ratio*; sub-0.1 dB absolute effects
cancel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .catalog import AntennaPattern, ConstellationSpec, ISOTROPIC

__all__ = [
    "EARTH_RADIUS_M", "MU_EARTH", "SPEED_OF_LIGHT",
    "SatState", "UserPoint",
    "orbital_period", "propagate_constellation", "free_space_path_loss",
    "received_power", "aggregation_gain",
]

EARTH_RADIUS_M = 6_371_000.0
MU_EARTH = 3.986004418e14       # m^3/s^2
SPEED_OF_LIGHT = 299_792_458.0  # m/s


@dataclass(frozen=True)
class SatState:
    position: np.ndarray        # ECI meters
    sat_id: tuple[int, int]     # (plane, slot)


@dataclass(frozen=True)
class UserPoint:
    latitude: float             # degrees
    longitude: float            # degrees
    mask_angle: float = 0.0     # degrees
    rx_pattern: AntennaPattern = ISOTROPIC

    def __post_init__(self):
        if abs(self.latitude) > 90.0:
            raise ValueError(f"|latitude| must be <= 90, got {self.latitude}")
        if not 0.0 <= self.mask_angle < 90.0:
            raise ValueError(f"mask_angle must be in [0, 90), got {self.mask_angle}")

    def position(self) -> np.ndarray:
        lat, lon = np.radians(self.latitude), np.radians(self.longitude)
        return EARTH_RADIUS_M * np.array(
            [np.cos(lat) * np.cos(lon), np.cos(lat) * np.sin(lon), np.sin(lat)])


def orbital_period(altitude: float) -> float:
    a = EARTH_RADIUS_M + altitude
    return 2.0 * np.pi * np.sqrt(a**3 / MU_EARTH)


def _positions(spec: ConstellationSpec, t: float) -> np.ndarray:
    """ECI positions of all satellites at time t, shape (n, 3).

    Epoch convention: plane 0 slot 0 sits at RAAN 0, anomaly 0 at t = 0.
    """
    a = EARTH_RADIUS_M + spec.altitude
    n_motion = 2.0 * np.pi / orbital_period(spec.altitude)
    inc = np.radians(spec.inclination)

    p = np.arange(spec.planes)
    s = np.arange(spec.sats_per_plane)
    raan = (2.0 * np.pi / spec.planes) * p                       # (P,)
    anom = (2.0 * np.pi / spec.sats_per_plane) * s               # (S,)
    u = anom[None, :] + np.radians(spec.phasing_offset) * p[:, None] \
        + n_motion * t                                           # (P, S)

    cos_u, sin_u = np.cos(u), np.sin(u)
    cos_O, sin_O = np.cos(raan)[:, None], np.sin(raan)[:, None]
    cos_i, sin_i = np.cos(inc), np.sin(inc)
    x = a * (cos_O * cos_u - sin_O * sin_u * cos_i)
    y = a * (sin_O * cos_u + cos_O * sin_u * cos_i)
    z = a * (sin_u * sin_i)
    return np.stack([x, y, z], axis=-1).reshape(-1, 3)


def propagate_constellation(spec: ConstellationSpec, t: float) -> list[SatState]:
    """Satellite states at time ``t`` (circular Walker-delta motion)."""
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    pos = _positions(spec, t)
    ids = [(p, s) for p in range(spec.planes) for s in range(spec.sats_per_plane)]
    return [SatState(position=pos[i], sat_id=ids[i]) for i in range(len(ids))]


def free_space_path_loss(distance: float, freq: float) -> float:
    """FSPL in dB (positive)."""
    return 20.0 * np.log10(4.0 * np.pi * distance * freq / SPEED_OF_LIGHT)


def _link_rip(sat_pos, user_pos, tx_eirp, tx_pattern, rx_pattern, mask_deg, freq):
    """Vectorized RIP [dBW] per satellite; -inf where below the mask."""
    rel = sat_pos - user_pos[None, :]
    d = np.linalg.norm(rel, axis=1)
    up = user_pos / np.linalg.norm(user_pos)
    elev = np.degrees(np.arcsin(np.clip(rel @ up / d, -1.0, 1.0)))
    sat_r = np.linalg.norm(sat_pos, axis=1)
    nadir = -sat_pos / sat_r[:, None]
    cos_ob = np.clip(np.einsum("ij,ij->i", -rel / d[:, None], nadir), -1.0, 1.0)
    off_boresight = np.degrees(np.arccos(cos_ob))
    rip = (tx_eirp + tx_pattern.gain(off_boresight) + rx_pattern.gain(elev)
           - 20.0 * np.log10(4.0 * np.pi * d * freq / SPEED_OF_LIGHT))
    return np.where(elev >= mask_deg, rip, -np.inf)


def received_power(sat: SatState, user: UserPoint, tx_eirp: float,
                   tx_pattern: AntennaPattern, freq: float) -> float:
    """Single-satellite received isotropic-reference power in dBW, or -inf
    when the satellite is below the user's mask angle."""
    if freq <= 0:
        raise ValueError(f"freq must be > 0, got {freq}")
    rip = _link_rip(sat.position[None, :], user.position(), tx_eirp,
                    tx_pattern, user.rx_pattern, user.mask_angle, freq)
    return float(rip[0])


def max_single_satellite_rip(spec: ConstellationSpec, user: UserPoint,
                             freq: float, n_elev: int = 2000) -> float:
    """Best achievable single-satellite RIP for this link geometry,
    optimized over elevation in [mask, 90] with the same patterns."""
    re, a = EARTH_RADIUS_M, EARTH_RADIUS_M + spec.altitude
    elev = np.linspace(user.mask_angle, 90.0, n_elev)
    el = np.radians(elev)
    d = np.sqrt(a**2 - (re * np.cos(el)) ** 2) - re * np.sin(el)
    off_boresight = np.degrees(np.arcsin(np.clip(re * np.cos(el) / a, -1.0, 1.0)))
    rip = (spec.tx_eirp + spec.tx_pattern.gain(off_boresight)
           + user.rx_pattern.gain(elev)
           - 20.0 * np.log10(4.0 * np.pi * d * freq / SPEED_OF_LIGHT))
    return float(rip.max())


def aggregation_gain(spec: ConstellationSpec, users, times, freq: float):
    """Worst-case aggregation gain over a (user, time) grid.

    Returns ``(g_agg_db, worst)`` where ``worst`` carries the argmax user,
    time, visible count, and the aggregate/single powers.
    """
    users = list(users)
    times = list(times)
    if not users or not times:
        raise ValueError("users and times must be non-empty")

    best = None
    for t in times:
        sat_pos = _positions(spec, t)
        for user in users:
            rip = _link_rip(sat_pos, user.position(), spec.tx_eirp,
                            spec.tx_pattern, user.rx_pattern,
                            user.mask_angle, freq)
            visible = np.isfinite(rip)
            if not visible.any():
                continue
            agg = float(np.sum(10.0 ** (rip[visible] / 10.0)))
            if best is None or agg > best[0]:
                best = (agg, user, t, int(visible.sum()))
    if best is None:
        raise ValueError("no satellite is ever visible from the user grid")

    agg, user, t, n_vis = best
    single = max_single_satellite_rip(spec, user, freq)
    g_agg = 10.0 * np.log10(agg) - single
    worst = {
        "user": user, "time": t, "visible_count": n_vis,
        "aggregate_power_dbw": 10.0 * np.log10(agg),
        "max_single_rip_dbw": single,
    }
    return float(g_agg), worst
