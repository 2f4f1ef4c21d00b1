"""Cross-correlated quasi-constant-envelope offset-quadrature modulation
(enhanced Feher-style QPSK).

The modulator maps each half-chip of the staggered I/Q chip streams onto one
of four waveform shapes selected by the local transition pattern of *both*
rails, following the cross-correlated offset-QPSK family of Kato & Feher
(XPSK) with the slope-matched "enhanced" transition shapes of Simon & Yan.
Shaping is done by the mapping itself, not by filtering.

Geometry, with T one chip and A = 1/sqrt(2):

* A rail's value at its own chip boundary is 0 when the chip flips there,
  otherwise +/-A.
* A rail's value at mid-chip is +/-1 when the other rail flips at that
  instant (the rails are offset by T/2, so one rail's mid-chip is the other's
  boundary), otherwise +/-A.
* Between those anchors each half-chip follows one of four shapes, indexed by
  (boundary level, mid level); u is the angle from the boundary end,
  u in [0, pi/2]:

      FLAT      A                  -> A               boundary A, mid A
      BUMP      b(u)                                  boundary A, mid 1
      ARC_RED   f(u) = sin u - (1-A) sin^3 u          boundary 0, mid A
      ARC_FULL  sin u                                 boundary 0, mid 1

  with b(u) = sqrt(1 - f(pi/2 - u)^2) so that every co-located half-chip pair
  satisfies I^2 + Q^2 = 1 identically: the envelope is constant by
  construction, and all shapes join with matched slopes (transition arcs
  leave zero crossings at the full-arc slope, flats and bumps join at zero
  slope).

Chip streams are treated as circular, so the waveform of periodic codes is
itself periodic and delaying both chip streams rolls the waveform exactly.
"""

from __future__ import annotations

import numpy as np

from .waveform import BasebandBuffer

__all__ = ["efqpsk_modulate", "rail_waveform"]

_A = 1.0 / np.sqrt(2.0)

# shape indices: bit0 = mid level is 1, bit1 = boundary level is 0 (arc)
_FLAT, _BUMP, _ARC_RED, _ARC_FULL = 0, 1, 2, 3


def _shape_tables(samples_per_chip: int) -> tuple[np.ndarray, np.ndarray]:
    """Half-chip lookup tables, shape (4, spc//2), for the first half
    (u measured from the left boundary) and second half (boundary on the
    right)."""
    half = samples_per_chip // 2
    u1 = np.arange(half) * (np.pi / samples_per_chip)        # 0 .. just below pi/2
    u2 = np.pi / 2 - u1                                       # pi/2 .. just above 0

    def f(u):
        s = np.sin(u)
        return s - (1.0 - _A) * s**3

    def b(u):
        return np.sqrt(1.0 - f(np.pi / 2 - u) ** 2)

    def table(u):
        return np.stack([
            np.full_like(u, _A),   # FLAT
            b(u),                  # BUMP
            f(u),                  # ARC_RED
            np.sin(u),             # ARC_FULL
        ])

    return table(u1), table(u2)


def rail_waveform(chips: np.ndarray, other_flips_at_mid: np.ndarray,
                  samples_per_chip: int) -> np.ndarray:
    """Shaped waveform of one rail.

    ``other_flips_at_mid[k]`` says whether the opposite rail transitions at
    this rail's mid-chip instant of chip k.  Chip indexing is circular.
    """
    d = np.asarray(chips, dtype=np.int8)
    o = np.asarray(other_flips_at_mid, dtype=bool)
    n = d.size
    spc = samples_per_chip
    half = spc // 2

    flips = d != np.roll(d, 1)          # flips[k]: transition at boundary k
    flips_next = np.roll(flips, -1)     # transition at boundary k+1

    t1, t2 = _shape_tables(spc)
    idx1 = 2 * flips.astype(np.int8) + o.astype(np.int8)
    idx2 = 2 * flips_next.astype(np.int8) + o.astype(np.int8)

    wave = np.empty((n, spc))
    wave[:, :half] = t1[idx1]
    wave[:, half:] = t2[idx2]
    wave *= d[:, None]
    return wave.reshape(n * spc)


def efqpsk_modulate(i_chips: np.ndarray, q_chips: np.ndarray,
                    samples_per_chip: int) -> BasebandBuffer:
    """Modulate staggered +/-1 chip streams into a unit-power, constant-
    envelope complex baseband buffer.

    The Q rail is delayed by half a chip.  ``samples_per_chip`` must be even
    and >= 8 so the intra-chip shaping is resolved.  The sample rate of the
    returned buffer is ``samples_per_chip`` per chip interval (chip rate 1);
    callers scale time via :class:`BasebandBuffer.sample_rate`.
    """
    i_chips = np.asarray(i_chips, dtype=np.int8)
    q_chips = np.asarray(q_chips, dtype=np.int8)
    if i_chips.shape != q_chips.shape:
        raise ValueError(
            f"chip stream length mismatch: {i_chips.size} vs {q_chips.size}")
    if samples_per_chip < 8 or samples_per_chip % 2:
        raise ValueError("samples_per_chip must be even and >= 8")
    if not (np.isin(i_chips, (-1, 1)).all() and np.isin(q_chips, (-1, 1)).all()):
        raise ValueError("chips must be +/-1")

    spc = samples_per_chip
    # each rail's mid-chip instant is the other rail's boundary (T/2 stagger)
    qi_flips = q_chips != np.roll(q_chips, 1)            # Q flip at boundary k
    i_rail = rail_waveform(i_chips, qi_flips, spc)
    ii_flips_next = np.roll(i_chips, -1) != i_chips      # I flip at boundary m+1
    q_rail = rail_waveform(q_chips, ii_flips_next, spc)
    q_rail = np.roll(q_rail, spc // 2)                   # half-chip stagger

    samples = i_rail + 1j * q_rail
    return BasebandBuffer(samples=samples, sample_rate=float(spc), epoch=0.0)


def modulate_at_rate(i_chips, q_chips, chip_rate: float,
                     samples_per_chip: int) -> BasebandBuffer:
    """Same as :func:`efqpsk_modulate` but with the sample rate expressed in
    Hz for a physical chip rate."""
    buf = efqpsk_modulate(i_chips, q_chips, samples_per_chip)
    return BasebandBuffer(samples=buf.samples,
                          sample_rate=chip_rate * samples_per_chip,
                          epoch=0.0)
