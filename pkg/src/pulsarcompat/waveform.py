"""Baseband I/Q buffers, BPSK reference modulation, the data+pilot chip
composition, and envelope measurement."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .prn import PrnConfig, gen_prn

__all__ = [
    "BasebandBuffer",
    "bpsk_modulate",
    "compose_data_pilot",
    "envelope_stats",
    "write_iq",
    "read_iq",
]


@dataclass(frozen=True)
class BasebandBuffer:
    """Complex baseband sample stream."""

    samples: np.ndarray
    sample_rate: float
    epoch: float = 0.0

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be > 0, got {self.sample_rate}")
        if len(self.samples) < 1:
            raise ValueError("empty buffer")

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate

    def mean_power(self) -> float:
        return float(np.mean(np.abs(self.samples) ** 2))


def bpsk_modulate(chips, samples_per_chip: int,
                  chip_rate: float = 1.0) -> BasebandBuffer:
    """Rectangular BPSK: chips held on I, Q = 0, constant envelope."""
    chips = np.asarray(chips)
    if samples_per_chip < 1:
        raise ValueError("samples_per_chip must be >= 1")
    if not np.isin(chips, (-1, 1)).all():
        raise ValueError("chips must be +/-1")
    i = np.repeat(chips.astype(np.float64), samples_per_chip)
    return BasebandBuffer(samples=i.astype(np.complex128),
                          sample_rate=chip_rate * samples_per_chip)


def compose_data_pilot(data_bits, data_prn: PrnConfig, pilot_prn: PrnConfig,
                       overlay, chips_per_bit: int | None = None):
    """Build the composite I (data) and Q (pilot) chip streams.

    I carries the data bits spread by the data PRN: each +/-1 bit is held
    over ``chips_per_bit`` chips (default: one data-code epoch) and
    multiplied chipwise onto the code.  Q carries the data-less pilot PRN
    with one +/-1 overlay element per pilot-code epoch, extending the
    composite period to ``len(overlay)`` pilot epochs.

    Returns ``(i_chips, q_chips)`` of equal length
    ``len(data_bits) * chips_per_bit``.
    """
    data_bits = np.asarray(data_bits, dtype=np.int8)
    overlay = np.asarray(overlay, dtype=np.int8)
    if not np.isin(data_bits, (-1, 1)).all():
        raise ValueError("data bits must be +/-1")
    if not np.isin(overlay, (-1, 1)).all():
        raise ValueError("overlay must be +/-1")
    if chips_per_bit is None:
        chips_per_bit = data_prn.length
    if chips_per_bit < 1 or chips_per_bit % data_prn.length:
        raise ValueError(
            f"chips_per_bit ({chips_per_bit}) must be a positive multiple of "
            f"the data code period ({data_prn.length})")

    n_chips = data_bits.size * chips_per_bit
    i_chips = gen_prn(data_prn, n_chips) * np.repeat(data_bits, chips_per_bit)

    q_code = gen_prn(pilot_prn, n_chips)
    n_epochs = -(-n_chips // pilot_prn.length)
    ov = np.repeat(np.tile(overlay, -(-n_epochs // overlay.size))[:n_epochs],
                   pilot_prn.length)[:n_chips]
    q_chips = q_code * ov
    return i_chips.astype(np.int8), q_chips.astype(np.int8)


def envelope_stats(buf: BasebandBuffer) -> tuple[float, float]:
    """(ripple_db, mean_power_w) of a buffer.

    ripple = 20*log10(max|s| / min|s|); a zero sample reports +inf.
    """
    mag = np.abs(buf.samples)
    mean_power = float(np.mean(mag**2))
    lo = float(mag.min())
    hi = float(mag.max())
    if lo == 0.0:
        return float("inf"), mean_power
    return 20.0 * float(np.log10(hi / lo)), mean_power


def write_iq(buf: BasebandBuffer, path) -> None:
    """Export as interleaved float32 I/Q plus a JSON sidecar."""
    path = Path(path)
    inter = np.empty(2 * len(buf.samples), dtype=np.float32)
    inter[0::2] = buf.samples.real
    inter[1::2] = buf.samples.imag
    inter.tofile(path)
    sidecar = {"sample_rate_hz": buf.sample_rate, "epoch_s": buf.epoch,
               "format": "interleaved-float32-iq", "n_samples": len(buf.samples)}
    path.with_suffix(path.suffix + ".json").write_text(
        json.dumps(sidecar, indent=2) + "\n")


def read_iq(path) -> BasebandBuffer:
    path = Path(path)
    meta = json.loads(path.with_suffix(path.suffix + ".json").read_text())
    inter = np.fromfile(path, dtype=np.float32)
    samples = inter[0::2].astype(np.float64) + 1j * inter[1::2].astype(np.float64)
    return BasebandBuffer(samples=samples, sample_rate=meta["sample_rate_hz"],
                          epoch=meta["epoch_s"])
