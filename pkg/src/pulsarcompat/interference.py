"""The analytic interference chain: spectral separation coefficients,
linear-domain noise aggregation, added-noise density, effective C/N0, and
degradation reports.

dB conventions: power densities in dB(W/Hz), powers in dBW, ratios in dB.
-inf is the "no power" sentinel and propagates as zero linear power.
Degradation is computed and stored as a non-negative loss; renderers that
follow the coordination-table sign convention prefix the minus sign at
output time.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .catalog import Catalog, Efqpsk, NoiseEnvironment, SignalSpec
from .efqpsk import efqpsk_modulate
from .spectrum import SampledPsd, SpectrumError, analytic_psd, numeric_psd
from .waveform import BasebandBuffer

__all__ = [
    "SSC_FLOOR_DB_HZ",
    "SscResult", "DegradationRow", "DegradationReport",
    "to_db", "to_linear",
    "compute_ssc", "total_noise_density", "i_alt", "effective_cn0",
    "cn0_degradation", "build_report",
    "interferer_numeric_psd", "victim_analytic_psd",
    "write_report_csv", "write_report_json",
]

SSC_FLOOR_DB_HZ = -300.0

# default frequency-domain working parameters (see README, "SSC conventions")
DEFAULT_GRID_SPACING_HZ = 1.0e3
DEFAULT_VICTIM_HALF_SPAN_HZ = 30.0e6
DEFAULT_NUMERIC_CHIPS = 200_000
DEFAULT_SAMPLES_PER_CHIP = {1023000.0: 64}  # else 12 (wideband)


def to_linear(db_value: float) -> float:
    """dB -> linear power ratio; -inf maps to 0."""
    if db_value == float("-inf"):
        return 0.0
    return 10.0 ** (db_value / 10.0)


def to_db(linear: float) -> float:
    """Linear power ratio -> dB; 0 maps to -inf."""
    if linear <= 0.0:
        return float("-inf")
    return 10.0 * math.log10(linear)


@dataclass(frozen=True)
class SscResult:
    value: float              # dB/Hz, or the -300 floor sentinel
    victim_id: str
    interferer_id: str
    frequency_offset: float   # Hz, interferer center minus victim center
    integration_band: float   # Hz, victim-centered
    grid_spacing: float       # Hz


@dataclass(frozen=True)
class DegradationRow:
    victim_id: str
    ssc: float                      # dB/Hz
    i_alt: float                    # dB(W/Hz)
    pre_noise_total: float | None   # dB(W/Hz), None when no environment
    delta_cn0: float | None         # dB, non-negative loss, None when no env
    effective_cn0_before: float | None = None  # dB-Hz
    effective_cn0_after: float | None = None


@dataclass(frozen=True)
class DegradationReport:
    interferer_id: str
    ssc_source: str
    rows: tuple[DegradationRow, ...]

    def __post_init__(self):
        object.__setattr__(
            self, "rows",
            tuple(sorted(self.rows, key=lambda r: r.victim_id)))
        for r in self.rows:
            if r.delta_cn0 is not None and r.delta_cn0 < 0:
                raise ValueError(f"negative degradation for {r.victim_id}")


# --------------------------------------------------------------------------
# the Eq. 1-4 chain
# --------------------------------------------------------------------------

def total_noise_density(env: NoiseEnvironment,
                        extra: float | None = None) -> float:
    """Linear-domain sum of all finite noise components (plus ``extra``),
    in dB(W/Hz).  Absent components count as zero power."""
    parts = [env.n0, env.i_ext, env.i_ref, env.i_rem]
    if extra is not None:
        parts.append(extra)
    finite = [p for p in parts if p is not None and p != float("-inf")]
    if not finite:
        raise ValueError("noise environment has no finite component")
    return to_db(sum(to_linear(p) for p in finite))


def i_alt(rip: float, g_agg: float, l_proc: float, ssc: float) -> float:
    """Added white-noise density of the new system: aggregate received
    power spread through the spectral overlap, straight dB-domain sum."""
    if rip == float("-inf"):
        return float("-inf")
    return rip + g_agg - l_proc + ssc


def effective_cn0(carrier: float, env: NoiseEnvironment,
                  added: float | None = None) -> float:
    """carrier [dBW] minus the total noise density [dB(W/Hz)], in dB-Hz."""
    if not math.isfinite(carrier):
        raise ValueError(f"carrier must be finite, got {carrier}")
    return carrier - total_noise_density(env, added)


def cn0_degradation(i_alt_density: float, pre_noise_total: float) -> float:
    """C/N0 loss from adding ``i_alt_density`` on top of the pre-existing
    noise floor: 10*log10(1 + I_alt/N_pre), non-negative."""
    if not math.isfinite(pre_noise_total):
        raise ValueError("pre_noise_total must be finite")
    return 10.0 * math.log10(1.0 + to_linear(i_alt_density - pre_noise_total))


# --------------------------------------------------------------------------
# spectral separation coefficient
# --------------------------------------------------------------------------

def compute_ssc(victim_psd: SampledPsd, interferer_psd: SampledPsd,
                freq_offset: float, integration_band: float | None = None,
                victim_id: str = "", interferer_id: str = "") -> SscResult:
    """10*log10 of the victim-centered overlap integral
    integral G_victim(f) * G_interferer(f - freq_offset) df.

    The interferer's density is linearly interpolated onto the shifted
    victim grid and taken as zero outside its own grid.  ``integration_band``
    defaults to the victim's full grid span; zero overlap returns the
    -300 dB/Hz floor sentinel.
    """
    g = victim_psd.grid
    if integration_band is None:
        integration_band = float(g[-1] - g[0])
    half = integration_band / 2.0
    mask = (g >= -half - 1e-9) & (g <= half + 1e-9)
    if mask.sum() < 2:
        raise SpectrumError("victim grid does not cover the integration band")
    if integration_band / 2.0 > (g[-1] - g[0]) / 2.0 + victim_psd.spacing:
        raise SpectrumError(
            f"integration band {integration_band} exceeds victim grid coverage")
    f = g[mask]
    gv = victim_psd.density[mask]
    gi = np.interp(f - freq_offset, interferer_psd.grid,
                   interferer_psd.density, left=0.0, right=0.0)
    overlap = float(np.trapezoid(gv * gi, f))
    value = to_db(overlap) if overlap > 10.0 ** (SSC_FLOOR_DB_HZ / 10.0) \
        else SSC_FLOOR_DB_HZ
    return SscResult(value=value, victim_id=victim_id,
                     interferer_id=interferer_id, frequency_offset=freq_offset,
                     integration_band=float(integration_band),
                     grid_spacing=victim_psd.spacing)


def victim_analytic_psd(victim: SignalSpec, half_span: float,
                        grid_spacing: float = DEFAULT_GRID_SPACING_HZ) -> SampledPsd:
    """Closed-form victim PSD on a victim-centered grid of +/- half_span,
    normalized over the full grid."""
    n = int(round(half_span / grid_spacing))
    grid = np.arange(-n, n + 1, dtype=np.float64) * grid_spacing
    return analytic_psd(victim.modulation, grid)


def interferer_numeric_psd(interferer: SignalSpec,
                           n_chips: int = DEFAULT_NUMERIC_CHIPS,
                           samples_per_chip: int | None = None,
                           seed: int = 20250, freq_resolution: float = 1.0e3,
                           ) -> SampledPsd:
    """Numeric PSD of the interferer's modulated waveform with seeded random
    chips, estimated by the segment-averaged periodogram at about
    ``freq_resolution`` bins."""
    mod = interferer.modulation
    if not isinstance(mod, Efqpsk):
        raise SpectrumError(
            "numeric interferer path currently models EFQPSK signals; use "
            "the analytic path for classical modulations")
    rc = mod.chip_rate
    if samples_per_chip is None:
        samples_per_chip = int(DEFAULT_SAMPLES_PER_CHIP.get(rc, 12))
    rng = np.random.default_rng(seed)
    pm = np.array([-1, 1], dtype=np.int8)
    ic = rng.choice(pm, n_chips)
    qc = rng.choice(pm, n_chips)
    buf = efqpsk_modulate(ic, qc, samples_per_chip)
    fs = rc * samples_per_chip
    buf = BasebandBuffer(samples=buf.samples, sample_rate=fs)
    seg = max(64, int(round(fs / freq_resolution)))
    return numeric_psd(buf, seg)


# --------------------------------------------------------------------------
# report assembly
# --------------------------------------------------------------------------

def build_report(victims, interferer: SignalSpec, envs: dict,
                 ssc_source: str = "numeric", *,
                 ssc_table: dict | None = None,
                 n_chips: int = DEFAULT_NUMERIC_CHIPS,
                 samples_per_chip: int | None = None,
                 seed: int = 20250,
                 grid_spacing: float = DEFAULT_GRID_SPACING_HZ,
                 rip_override: float | None = None) -> DegradationReport:
    """Per-victim SSC -> I_alt -> degradation.

    ssc_source:
      fixed     SSCs looked up in ``ssc_table`` (victim_id -> dB/Hz)
      numeric   victim closed form x interferer numeric periodogram
      analytic  both closed forms (rejects EFQPSK interferers)

    Victims without a NoiseEnvironment get SSC and I_alt only.  The SSC
    integration runs over the victim-centered pair-adaptive grid
    +/- max(30 MHz, |offset| + 30 MHz); each PSD carries unit power over its
    own grid (calibration recorded in the README).
    """
    if ssc_source not in ("fixed", "numeric", "analytic"):
        raise ValueError(f"unknown ssc_source {ssc_source!r}")
    num_psd = None
    if ssc_source == "numeric":
        num_psd = interferer_numeric_psd(interferer, n_chips=n_chips,
                                         samples_per_chip=samples_per_chip,
                                         seed=seed)
    rip = interferer.max_single_sat_rip if rip_override is None else rip_override

    rows = []
    for victim in victims:
        offset = interferer.center_frequency - victim.center_frequency
        if ssc_source == "fixed":
            if ssc_table is None or victim.id not in ssc_table:
                raise ValueError(f"no fixed SSC for victim {victim.id!r}")
            ssc_db = float(ssc_table[victim.id])
        else:
            half_span = max(DEFAULT_VICTIM_HALF_SPAN_HZ,
                            abs(offset) + DEFAULT_VICTIM_HALF_SPAN_HZ)
            vic_psd = victim_analytic_psd(victim, half_span, grid_spacing)
            if ssc_source == "analytic":
                int_psd = victim_analytic_psd(
                    SignalSpec(id=interferer.id, system=interferer.system,
                               center_frequency=interferer.center_frequency,
                               modulation=interferer.modulation,
                               max_single_sat_rip=rip,
                               aggregation_gain=interferer.aggregation_gain,
                               doppler_range=interferer.doppler_range,
                               occupied_bandwidth_99_5=interferer.occupied_bandwidth_99_5,
                               receiver_ref_bandwidth=interferer.receiver_ref_bandwidth),
                    half_span, grid_spacing)
            else:
                int_psd = num_psd
            ssc_db = compute_ssc(vic_psd, int_psd, offset,
                                 victim_id=victim.id,
                                 interferer_id=interferer.id).value

        ialt_db = i_alt(rip, interferer.aggregation_gain,
                        _l_proc(envs.get(victim.id)), ssc_db)
        env = envs.get(victim.id)
        if env is None:
            rows.append(DegradationRow(victim_id=victim.id, ssc=ssc_db,
                                       i_alt=ialt_db, pre_noise_total=None,
                                       delta_cn0=None))
            continue
        pre = total_noise_density(env)
        delta = cn0_degradation(ialt_db, pre) if ialt_db != float("-inf") else 0.0
        before = after = None
        if victim.carrier_power is not None:
            before = effective_cn0(victim.carrier_power, env)
            after = effective_cn0(victim.carrier_power, env, ialt_db)
        rows.append(DegradationRow(victim_id=victim.id, ssc=ssc_db,
                                   i_alt=ialt_db, pre_noise_total=pre,
                                   delta_cn0=delta,
                                   effective_cn0_before=before,
                                   effective_cn0_after=after))
    return DegradationReport(interferer_id=interferer.id,
                             ssc_source=ssc_source, rows=tuple(rows))


def _l_proc(env):
    return env.l_proc if env is not None else 1.0


_REPORT_COLUMNS = ("victim", "ssc_db_hz", "i_alt_dbw_hz", "pre_noise_dbw_hz",
                   "delta_cn0_db")


def write_report_csv(report: DegradationReport, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(_REPORT_COLUMNS)
        for r in report.rows:
            w.writerow([r.victim_id, repr(round(r.ssc, 6)),
                        repr(round(r.i_alt, 6)) if math.isfinite(r.i_alt) else "-inf",
                        "" if r.pre_noise_total is None else repr(round(r.pre_noise_total, 6)),
                        "" if r.delta_cn0 is None else repr(round(r.delta_cn0, 6))])


def write_report_json(report: DegradationReport, path) -> None:
    doc = {
        "interferer": report.interferer_id,
        "ssc_source": report.ssc_source,
        "delta_cn0_sign_convention": "non-negative loss; tables print -delta",
        "rows": [
            {"victim": r.victim_id, "ssc_db_hz": r.ssc,
             "i_alt_dbw_hz": None if not math.isfinite(r.i_alt) else r.i_alt,
             "pre_noise_dbw_hz": r.pre_noise_total,
             "delta_cn0_db": r.delta_cn0,
             "effective_cn0_before_dbhz": r.effective_cn0_before,
             "effective_cn0_after_dbhz": r.effective_cn0_after}
            for r in report.rows
        ],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
