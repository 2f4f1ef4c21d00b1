"""PRN code generation: maximal-length LFSR sequences, Gold codes, and
explicit chip tables.

Chips are +/-1 valued numpy int8 arrays throughout; the 0/1 shift-register
domain is internal only.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "PrnConfig",
    "PrnError",
    "lfsr_sequence",
    "gold_code",
    "gen_prn",
]


class PrnError(ValueError):
    """Raised for an invalid tap specification or chip table."""


@dataclass(frozen=True)
class PrnConfig:
    """One PRN code: either an LFSR/Gold tap specification or an explicit
    chip table.

    length      code period in chips
    taps        feedback taps (1-based, tap n = stage n) for a single LFSR
    taps_b      second register's taps; if given the code is the Gold-style
                XOR of the two registers
    phase_b     circular shift applied to register B before combining
    chips       explicit +/-1 table (overrides the LFSR fields)
    overlay     optional short +/-1 sequence layered on top of a pilot code,
                one overlay element per code epoch
    """

    length: int
    taps: tuple[int, ...] | None = None
    taps_b: tuple[int, ...] | None = None
    phase_b: int = 0
    chips: tuple[int, ...] | None = None
    overlay: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.length < 1:
            raise PrnError(f"length must be >= 1, got {self.length}")
        if self.chips is None and self.taps is None:
            raise PrnError("PrnConfig needs either taps or an explicit chip table")
        if self.chips is not None:
            if len(self.chips) != self.length:
                raise PrnError(
                    f"chip table length {len(self.chips)} != declared length {self.length}"
                )
            if any(c not in (-1, 1) for c in self.chips):
                raise PrnError("chip table entries must be +/-1")
        if self.overlay is not None and any(c not in (-1, 1) for c in self.overlay):
            raise PrnError("overlay entries must be +/-1")


def _check_taps(taps, nstages):
    taps = tuple(int(t) for t in taps)
    if len(taps) == 0:
        raise PrnError("empty tap specification")
    if len(set(taps)) != len(taps):
        raise PrnError(f"duplicate taps in {taps}")
    if any(t < 1 or t > nstages for t in taps):
        raise PrnError(f"taps {taps} outside 1..{nstages}")
    if nstages not in taps:
        raise PrnError(f"tap specification {taps} must include the last stage {nstages}")
    return taps


def lfsr_sequence(taps, nstages: int, n_chips: int | None = None,
                  initial: int | None = None) -> np.ndarray:
    """Run a Fibonacci LFSR and return +/-1 chips.

    ``taps`` are 1-based stage numbers whose XOR feeds back into stage 1;
    the output is taken from the last stage.  With maximal taps the period
    is 2**nstages - 1.
    """
    taps = _check_taps(taps, nstages)
    period = 2**nstages - 1
    if n_chips is None:
        n_chips = period
    state = np.ones(nstages, dtype=np.int8) if initial is None else np.array(
        [(initial >> i) & 1 for i in range(nstages)], dtype=np.int8)
    if not state.any():
        raise PrnError("all-zero LFSR initial state")
    tap_idx = np.array([t - 1 for t in taps])
    out = np.empty(n_chips, dtype=np.int8)
    for i in range(n_chips):
        out[i] = state[-1]
        fb = np.bitwise_xor.reduce(state[tap_idx])
        state[1:] = state[:-1]
        state[0] = fb
    return (1 - 2 * out).astype(np.int8)


def gold_code(taps_a, taps_b, nstages: int, phase_b: int = 0,
              n_chips: int | None = None) -> np.ndarray:
    """Gold-style code: chipwise product (XOR in 0/1 domain) of two
    m-sequences, with register B circularly shifted by ``phase_b`` chips."""
    period = 2**nstages - 1
    a = lfsr_sequence(taps_a, nstages)
    b = np.roll(lfsr_sequence(taps_b, nstages), phase_b)
    code = (a * b).astype(np.int8)
    if n_chips is None:
        n_chips = period
    return np.tile(code, n_chips // period + 1)[:n_chips]


def gen_prn(config: PrnConfig, n_chips: int) -> np.ndarray:
    """Generate ``n_chips`` chips of the configured code (+/-1 int8).

    Deterministic for a given config; the output repeats with period
    ``config.length``.
    """
    if n_chips < 1:
        raise PrnError(f"n_chips must be >= 1, got {n_chips}")
    if config.chips is not None:
        one = np.asarray(config.chips, dtype=np.int8)
    else:
        nstages = max(config.taps)
        period = 2**nstages - 1
        if config.taps_b is not None:
            one = gold_code(config.taps, config.taps_b, nstages, config.phase_b)
        else:
            one = lfsr_sequence(config.taps, nstages)
        if config.length != period:
            if config.length > period:
                raise PrnError(
                    f"declared length {config.length} exceeds LFSR period {period}")
            one = one[:config.length]  # truncated code, period = declared length
    return np.tile(one, n_chips // config.length + 1)[:n_chips]
