"""Power spectral densities on frequency grids.

Closed forms for the classical GNSS modulation families (BPSK-R, QPSK,
sine/cosine BOC, CBOC mixtures, split-lobe AltBOC), a segment-averaged
windowed periodogram for waveforms without a closed form, and occupied
bandwidth measurement.

All returned densities are normalized to unit power over the PSD's
``normalization_band`` (trapezoidal integral = 1); frequency grids are
baseband offsets from the signal center in Hz.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.signal import welch

from .catalog import (AltBoc, BocCos, BocSin, BpskR, Cboc, Efqpsk,
                      ModulationKind, Qpsk)
from .waveform import BasebandBuffer

__all__ = [
    "SampledPsd",
    "SpectrumError",
    "modulation_psd",
    "analytic_psd",
    "numeric_psd",
    "occupied_bandwidth",
    "write_psd_csv",
    "read_psd_csv",
]

_NORMALIZATION_TOL = 1e-6


class SpectrumError(ValueError):
    pass


@dataclass(frozen=True)
class SampledPsd:
    """Unit-power-normalized PSD on a uniform frequency grid.

    grid                 offsets from the signal center, Hz, strictly
                         increasing with uniform spacing
    density              1/Hz, non-negative
    normalization_band   width of the grid-centered band over which the
                         trapezoidal integral equals 1
    """

    grid: np.ndarray
    density: np.ndarray
    normalization_band: float

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=np.float64)
        d = np.asarray(self.density, dtype=np.float64)
        if g.ndim != 1 or g.size < 2 or g.shape != d.shape:
            raise SpectrumError("grid/density must be 1-d arrays of equal length >= 2")
        step = np.diff(g)
        if (step <= 0).any() or not np.allclose(step, step[0], rtol=1e-9):
            raise SpectrumError("grid must be strictly increasing with uniform spacing")
        if (d < 0).any():
            raise SpectrumError("density must be non-negative")
        total = _band_integral(g, d, self.normalization_band)
        if abs(total - 1.0) > _NORMALIZATION_TOL:
            raise SpectrumError(
                f"density integrates to {total:.9f} over the normalization band, "
                f"expected 1 +/- {_NORMALIZATION_TOL}")
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "density", d)

    @property
    def spacing(self) -> float:
        return float(self.grid[1] - self.grid[0])


def _band_integral(grid, density, band):
    half = band / 2.0
    mask = (grid >= -half - 1e-9) & (grid <= half + 1e-9)
    if mask.sum() < 2:
        raise SpectrumError("normalization band not covered by the grid")
    return float(np.trapezoid(density[mask], grid[mask]))


def _normalize(grid, density, band):
    density = density / _band_integral(grid, density, band)
    return SampledPsd(grid=grid, density=density, normalization_band=band)


# --------------------------------------------------------------------------
# closed forms (two-sided, baseband, unit power over infinite bandwidth)
# --------------------------------------------------------------------------

def _psd_bpsk(f, chip_rate):
    tc = 1.0 / chip_rate
    return tc * np.sinc(f * tc) ** 2


def _boc_ratio(subcarrier_rate, chip_rate):
    n = 2.0 * subcarrier_rate / chip_rate
    n_int = round(n)
    if abs(n - n_int) > 1e-6 or n_int < 1:
        raise SpectrumError(
            f"BOC ratio 2*fs/fc = {n} must be a positive integer")
    return n_int


def _psd_boc_sin(f, subcarrier_rate, chip_rate):
    tc = 1.0 / chip_rate
    n = _boc_ratio(subcarrier_rate, chip_rate)
    x = np.pi * f / (2.0 * subcarrier_rate)
    with np.errstate(divide="ignore", invalid="ignore"):
        t2 = np.tan(x) ** 2
        if n % 2 == 0:
            g = tc * np.sinc(f * tc) ** 2 * t2
        else:
            core = np.where(f == 0.0, 0.0, np.cos(np.pi * f * tc) / (np.pi * f * tc))
            g = tc * core**2 * t2
            g = np.where(f == 0.0, tc / (2.0 * subcarrier_rate * tc) ** 2 * 0.0, g)
    # removable singularities where tan blows up but sinc is 0
    bad = ~np.isfinite(g)
    if bad.any():
        fb = np.asarray(f)[bad]
        g[bad] = 4.0 * subcarrier_rate**2 * tc**3 / (np.pi * fb * tc) ** 2
    return g


def _psd_boc_cos(f, subcarrier_rate, chip_rate):
    tc = 1.0 / chip_rate
    n = _boc_ratio(subcarrier_rate, chip_rate)
    x = np.pi * f / (2.0 * subcarrier_rate)
    with np.errstate(divide="ignore", invalid="ignore"):
        r2 = ((1.0 - np.cos(x)) / np.cos(x)) ** 2
        if n % 2 == 0:
            g = tc * np.sinc(f * tc) ** 2 * r2
        else:
            core = np.where(f == 0.0, 0.0, np.cos(np.pi * f * tc) / (np.pi * f * tc))
            g = tc * core**2 * r2
    bad = ~np.isfinite(g)
    if bad.any():
        fb = np.asarray(f)[bad]
        g[bad] = 4.0 * subcarrier_rate**2 * tc**3 / (np.pi * fb * tc) ** 2
    return g


def modulation_psd(mod: ModulationKind, freqs) -> np.ndarray:
    """Un-normalized closed-form baseband PSD (1/Hz, unit power over
    infinite bandwidth) evaluated at ``freqs``.

    The AltBOC form is the split-lobe model: the composite treated as a pair
    of chip-rate QPSK lobes at +/- the subcarrier rate, the convention used
    for wideband victim signals in ITU-style coordination tables.
    """
    f = np.asarray(freqs, dtype=np.float64)
    if isinstance(mod, (BpskR, Qpsk)):
        return _psd_bpsk(f, mod.chip_rate)
    if isinstance(mod, BocSin):
        return _psd_boc_sin(f, mod.subcarrier_rate, mod.chip_rate)
    if isinstance(mod, BocCos):
        return _psd_boc_cos(f, mod.subcarrier_rate, mod.chip_rate)
    if isinstance(mod, Cboc):
        low = _psd_boc_sin(f, mod.low_rate, mod.low_rate)
        high = _psd_boc_sin(f, mod.high_rate, mod.low_rate)
        return (1.0 - mod.power_split) * low + mod.power_split * high
    if isinstance(mod, AltBoc):
        lo = _psd_bpsk(f - mod.subcarrier_rate, mod.chip_rate)
        hi = _psd_bpsk(f + mod.subcarrier_rate, mod.chip_rate)
        return 0.5 * (lo + hi)
    if isinstance(mod, Efqpsk):
        raise SpectrumError(
            "EFQPSK has no closed-form PSD here; use numeric_psd on a "
            "modulated buffer")
    raise SpectrumError(f"unsupported modulation {mod!r}")


def analytic_psd(mod: ModulationKind, grid,
                 normalization_band: float | None = None) -> SampledPsd:
    """Closed-form PSD sampled on ``grid`` and normalized to unit power over
    ``normalization_band`` (default: the full grid span)."""
    grid = np.asarray(grid, dtype=np.float64)
    if normalization_band is None:
        normalization_band = float(grid[-1] - grid[0])
    density = modulation_psd(mod, grid)
    return _normalize(grid, density, normalization_band)


def numeric_psd(buf: BasebandBuffer, segment_length: int,
                normalization_band: float | None = None) -> SampledPsd:
    """Segment-averaged Hann-windowed periodogram (50% overlap) of a complex
    baseband buffer, two-sided, normalized over ``normalization_band``
    (default: the full sampled span).

    Frequency resolution is sample_rate / segment_length.
    """
    n = len(buf.samples)
    if segment_length > n:
        raise SpectrumError(
            f"segment_length {segment_length} longer than buffer ({n})")
    if n < 8 * segment_length:
        raise SpectrumError("buffer must be at least 8 segments long")
    freqs, pxx = welch(buf.samples, fs=buf.sample_rate, window="hann",
                       nperseg=segment_length, noverlap=segment_length // 2,
                       detrend=False, return_onesided=False,
                       scaling="density")
    grid = np.fft.fftshift(freqs)
    density = np.fft.fftshift(pxx)
    if normalization_band is None:
        normalization_band = float(grid[-1] - grid[0])
    return _normalize(grid, np.maximum(density, 0.0), normalization_band)


def raw_periodogram_integral(buf: BasebandBuffer, segment_length: int) -> float:
    """Integral of the un-normalized periodogram, for Parseval checks."""
    freqs, pxx = welch(buf.samples, fs=buf.sample_rate, window="hann",
                       nperseg=segment_length, noverlap=segment_length // 2,
                       detrend=False, return_onesided=False,
                       scaling="density")
    return float(np.sum(pxx) * buf.sample_rate / segment_length)


def occupied_bandwidth(psd: SampledPsd, fraction: float) -> float:
    """Smallest symmetric band about the power centroid containing at least
    ``fraction`` of the total power, with linear interpolation between grid
    points."""
    if not 0.0 < fraction < 1.0:
        raise SpectrumError(f"fraction must be in (0, 1), got {fraction}")
    g, d = psd.grid, psd.density
    total = np.trapezoid(d, g)
    centroid = np.trapezoid(g * d, g) / total

    def contained(halfwidth):
        lo, hi = centroid - halfwidth, centroid + halfwidth
        return _integral_between(g, d, lo, hi) / total

    lo_w, hi_w = 0.0, float(max(g[-1] - centroid, centroid - g[0]))
    if contained(hi_w) < fraction:
        raise SpectrumError("grid does not contain the requested power fraction")
    for _ in range(200):
        mid = 0.5 * (lo_w + hi_w)
        if contained(mid) >= fraction:
            hi_w = mid
        else:
            lo_w = mid
        if hi_w - lo_w < 1e-9 * max(1.0, hi_w):
            break
    return 2.0 * hi_w


def _integral_between(g, d, lo, hi):
    """Trapezoidal integral of the piecewise-linear density over [lo, hi]."""
    lo = max(lo, g[0])
    hi = min(hi, g[-1])
    if hi <= lo:
        return 0.0
    pts = g[(g > lo) & (g < hi)]
    xs = np.concatenate(([lo], pts, [hi]))
    ys = np.interp(xs, g, d)
    return float(np.trapezoid(ys, xs))


def write_psd_csv(psd: SampledPsd, path) -> None:
    """Two-column CSV (offset_hz, density_per_hz)."""
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["offset_hz", "density_per_hz"])
        for f, d in zip(psd.grid, psd.density):
            w.writerow([repr(float(f)), repr(float(d))])


def read_psd_csv(path) -> SampledPsd:
    with Path(path).open() as fh:
        rows = list(csv.reader(fh))
    data = np.array([[float(a), float(b)] for a, b in rows[1:]])
    grid, density = data[:, 0], data[:, 1]
    return SampledPsd(grid=grid, density=density,
                      normalization_band=float(grid[-1] - grid[0]))
