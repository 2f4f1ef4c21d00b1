"""Software replica of the conductive bench experiment: victim + interferer
+ calibrated noise at complex baseband, correlator-based C/N0 estimation,
and the stepped interferer power-ramp protocol with side-by-side analytic
predictions.

No acquisition or tracking: code phase and carrier are genie-aided, so the
measurement isolates C/N0 physics from receiver dynamics.  All randomness
comes from counter-based Philox streams keyed by the scenario seed, so runs
are bit-reproducible; Gaussian noise uses numpy's deterministic ziggurat
transform on those streams.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .catalog import BpskR, Efqpsk, Qpsk, SignalSpec
from .efqpsk import efqpsk_modulate
from .interference import compute_ssc, to_db, to_linear
from .prn import PrnConfig, gen_prn
from .spectrum import numeric_psd
from .waveform import BasebandBuffer

__all__ = [
    "ScenarioConfig", "RampStage", "RampProfile", "StageResult", "Replica",
    "CN0_FLOOR_DBHZ",
    "synthesize_scenario", "estimate_cn0", "run_ramp_profile",
    "default_ramp_profile", "simulation_ssc", "write_ramp_csv",
]

CN0_FLOOR_DBHZ = 20.0
_NWPR_BLOCK = 20  # coherent epochs per narrowband accumulation


@dataclass(frozen=True)
class ScenarioConfig:
    """One bench scenario: a trackable victim at baseband center, an
    optional offset interferer, and a white noise floor.

    Powers are dBW at the buffer; noise_density is dB(W/Hz).  The default
    noise floor is the fixed conservative bench value -200.3 dB(W/Hz).
    """

    victim: SignalSpec
    victim_prn: PrnConfig
    victim_power: float
    sample_rate: float
    duration: float
    interferer: SignalSpec | None = None
    interferer_power: float = float("-inf")
    noise_density: float = -200.3
    seed: int = 0

    def __post_init__(self):
        if self.duration < 0.1:
            raise ValueError(f"duration must be >= 100 ms, got {self.duration}")
        widest = self.victim.receiver_ref_bandwidth
        if self.interferer is not None:
            widest = max(widest, self.interferer.receiver_ref_bandwidth)
        if self.sample_rate <= 2.0 * widest:
            raise ValueError(
                f"sample_rate {self.sample_rate} must exceed twice the wider "
                f"receiver reference bandwidth ({widest}); aliasing guard")
        for sig, name in ((self.victim, "victim"), (self.interferer, "interferer")):
            if sig is None:
                continue
            spc = self.sample_rate / sig.modulation.chip_rate
            if abs(spc - round(spc)) > 1e-9:
                raise ValueError(
                    f"sample_rate must be an integer multiple of the {name} "
                    f"chip rate ({sig.modulation.chip_rate})")

    @property
    def victim_spc(self) -> int:
        return round(self.sample_rate / self.victim.modulation.chip_rate)

    @property
    def interferer_spc(self) -> int:
        return round(self.sample_rate / self.interferer.modulation.chip_rate)

    @property
    def freq_offset(self) -> float:
        return (self.interferer.center_frequency
                - self.victim.center_frequency)


@dataclass(frozen=True)
class Replica:
    """Genie correlator replica: the victim's chips and sampling."""

    chips: np.ndarray
    samples_per_chip: int

    @property
    def code_period_chips(self) -> int:
        return len(self.chips)


@dataclass(frozen=True)
class RampStage:
    label: str
    interferer_offset_db: float   # dB relative to aggregate FOC power
    dwell: float                  # seconds


@dataclass(frozen=True)
class RampProfile:
    stages: tuple[RampStage, ...]

    def __post_init__(self):
        if len(self.stages) < 2:
            raise ValueError("profile needs at least two stages")
        for idx in (0, -1):
            if self.stages[idx].interferer_offset_db != float("-inf"):
                raise ValueError(
                    "first and last stage must be interferer-off baselines")


def default_ramp_profile(dwell: float = 2.0) -> RampProfile:
    """The stepped bench ladder: baselines bracketing CADL / IOV / FOC and
    the +5/+10/+20/+30 dB sensitivity rungs.  CADL and IOV absolute levels
    are not public; the defaults are placeholders at FOC-10 and FOC-3 dB."""
    inf = float("-inf")
    return RampProfile(stages=(
        RampStage("baseline", inf, dwell),
        RampStage("cadl", -10.0, dwell),
        RampStage("iov", -3.0, dwell),
        RampStage("foc", 0.0, dwell),
        RampStage("foc+5", 5.0, dwell),
        RampStage("foc+10", 10.0, dwell),
        RampStage("foc+20", 20.0, dwell),
        RampStage("foc+30", 30.0, dwell),
        RampStage("baseline-after", inf, dwell),
    ))


@dataclass(frozen=True)
class StageResult:
    label: str
    t_start: float
    measured_cn0: float        # dB-Hz (may be the -inf below-floor sentinel)
    predicted_cn0: float       # dB-Hz
    interferer_power: float    # dBW at the buffer


# --------------------------------------------------------------------------
# synthesis
# --------------------------------------------------------------------------

def _stage_rngs(seed: int, stage_index: int):
    ss = np.random.SeedSequence(entropy=(seed, stage_index))
    noise_ss, chip_ss = ss.spawn(2)
    return (np.random.Generator(np.random.Philox(noise_ss)),
            np.random.Generator(np.random.Philox(chip_ss)))


def _victim_epoch_wave(cfg: ScenarioConfig) -> np.ndarray:
    """One code period of the unit-power victim waveform."""
    mod = cfg.victim.modulation
    if not isinstance(mod, (BpskR, Qpsk)):
        raise ValueError(
            "victim must be a BPSK/QPSK replica-trackable signal, got "
            f"{type(mod).__name__}")
    chips = gen_prn(cfg.victim_prn, cfg.victim_prn.length)
    return np.repeat(chips.astype(np.float64), cfg.victim_spc)


def _efqpsk_segment(i_chips, q_chips, spc, pad=2):
    """Modulate a padded chip segment and return the interior, identical to
    the same span of an infinite stream (the construction only looks one
    chip to each side)."""
    buf = efqpsk_modulate(i_chips, q_chips, spc)
    return buf.samples[pad * spc:-pad * spc]


def _epoch_stream(cfg: ScenarioConfig, stage_power_dbw: float,
                  n_epochs: int, epoch_samples: int, stage_index: int = 0):
    """Yield per-epoch complex buffers of the composite scenario.

    Per-component mean powers are calibrated at the buffer: the victim and
    interferer waveforms are exactly unit power before scaling; the noise
    generator realizes the configured density statistically.
    """
    noise_rng, chip_rng = _stage_rngs(cfg.seed, stage_index)
    spc_v = cfg.victim_spc
    epoch_wave = None
    amp_v = 10.0 ** (cfg.victim_power / 20.0)
    if cfg.victim_power != float("-inf"):
        epoch_wave = _victim_epoch_wave(cfg)
        period = len(epoch_wave)
        if epoch_samples % period:
            reps = -(-epoch_samples // period)
            epoch_wave = np.tile(epoch_wave, reps)[:epoch_samples]
        else:
            epoch_wave = np.tile(epoch_wave, epoch_samples // period)
        epoch_wave = amp_v * epoch_wave

    use_interferer = (cfg.interferer is not None
                      and stage_power_dbw != float("-inf"))
    if use_interferer:
        if not isinstance(cfg.interferer.modulation, Efqpsk):
            raise ValueError("interferer waveform source must be EFQPSK")
        spc_i = cfg.interferer_spc
        pad = 2
        n_chips_epoch = epoch_samples // spc_i
        if epoch_samples % spc_i:
            raise ValueError("epoch length must be an integer chip count "
                             "of the interferer")
        total_chips = n_epochs * n_chips_epoch + 2 * pad
        pm = np.array([-1, 1], dtype=np.int8)
        ichips = chip_rng.choice(pm, total_chips)
        qchips = chip_rng.choice(pm, total_chips)
        amp_i = 10.0 ** (stage_power_dbw / 20.0)
        dphi = 2.0 * np.pi * cfg.freq_offset / cfg.sample_rate

    sigma = math.sqrt(to_linear(cfg.noise_density) * cfg.sample_rate / 2.0)
    sample_base = 0
    for k in range(n_epochs):
        out = noise_rng.standard_normal(epoch_samples) * sigma \
            + 1j * (noise_rng.standard_normal(epoch_samples) * sigma)
        if epoch_wave is not None:
            out += epoch_wave
        if use_interferer:
            lo = k * n_chips_epoch
            seg = _efqpsk_segment(ichips[lo:lo + n_chips_epoch + 2 * pad],
                                  qchips[lo:lo + n_chips_epoch + 2 * pad],
                                  spc_i, pad)
            n = sample_base + np.arange(epoch_samples)
            out += amp_i * seg * np.exp(1j * dphi * n)
        sample_base += epoch_samples
        yield out


def _epoch_layout(cfg: ScenarioConfig) -> tuple[int, int]:
    """(epoch_samples, n_epochs) using one victim code period per epoch."""
    epoch_samples = cfg.victim_prn.length * cfg.victim_spc
    n_epochs = int(cfg.duration * cfg.sample_rate) // epoch_samples
    if n_epochs < 1:
        raise ValueError("duration shorter than one victim code period")
    return epoch_samples, n_epochs


def synthesize_scenario(cfg: ScenarioConfig) -> BasebandBuffer:
    """Materialize the full scenario buffer (victim + interferer + noise).

    Deterministic for a given seed; duration rounds down to a whole number
    of victim code periods.
    """
    epoch_samples, n_epochs = _epoch_layout(cfg)
    chunks = list(_epoch_stream(cfg, cfg.interferer_power, n_epochs,
                                epoch_samples))
    return BasebandBuffer(samples=np.concatenate(chunks),
                          sample_rate=cfg.sample_rate)


# --------------------------------------------------------------------------
# C/N0 estimation
# --------------------------------------------------------------------------

def _nwpr_cn0(z: np.ndarray, t_sub: float, block: int = _NWPR_BLOCK) -> float:
    """C/N0 from prompt correlator outputs via moment inversion of the
    narrowband/wideband powers.

    With M outputs per block, E[NBP] - E[WBP] = M(M-1) A^2 and
    E[WBP]/M - A^2 = E|noise|^2, so carrier and noise powers come out of the
    block-averaged NBP/WBP linearly; this keeps the estimator unbiased
    across the whole 25-55 dB-Hz range where the classic ratio lookup
    saturates near the top.
    """
    n_blocks = z.size // block
    if n_blocks < 1:
        raise ValueError(f"need at least {block} epochs, got {z.size}")
    zb = z[:n_blocks * block].reshape(n_blocks, block)
    nbp = np.abs(zb.sum(axis=1)) ** 2
    wbp = (np.abs(zb) ** 2).sum(axis=1)
    a2 = (nbp.mean() - wbp.mean()) / (block * (block - 1))
    noise_var = wbp.mean() / block - a2
    if a2 <= 0.0 or noise_var <= 0.0:
        return float("-inf")
    cn0 = 10.0 * math.log10(a2 / (noise_var * t_sub))
    return cn0 if cn0 >= CN0_FLOOR_DBHZ else float("-inf")


def _correlate_epochs(chunks, replica_wave, epoch_samples):
    z = []
    for chunk in chunks:
        if len(chunk) != epoch_samples:
            raise ValueError("epoch length mismatch")
        z.append(np.vdot(replica_wave, chunk) / epoch_samples)
    return np.array(z)


def _replica_wave(replica: Replica, epoch_samples: int) -> np.ndarray:
    wave = np.repeat(np.asarray(replica.chips, dtype=np.float64),
                     replica.samples_per_chip)
    if epoch_samples % len(wave):
        raise ValueError(
            "coherent_time must be an integer number of code periods")
    return np.tile(wave, epoch_samples // len(wave))


def estimate_cn0(buf: BasebandBuffer, replica: Replica,
                 coherent_time: float, n_epochs: int) -> float:
    """Narrowband/wideband power-ratio C/N0 estimate in dB-Hz.

    Code phase and carrier are assumed known (prompt correlation only).
    ``coherent_time`` must span an integer number of replica code periods;
    estimates below the 20 dB-Hz floor return the -inf sentinel.
    """
    epoch_samples = round(coherent_time * buf.sample_rate)
    rep = _replica_wave(replica, epoch_samples)
    if n_epochs * epoch_samples > len(buf.samples):
        raise ValueError(
            f"buffer too short for {n_epochs} epochs of {coherent_time}s")
    view = buf.samples[:n_epochs * epoch_samples].reshape(n_epochs,
                                                          epoch_samples)
    z = view @ rep / epoch_samples
    return _nwpr_cn0(z, coherent_time)


# --------------------------------------------------------------------------
# ramp protocol
# --------------------------------------------------------------------------

_SSC_CACHE: dict = {}


def simulation_ssc(cfg: ScenarioConfig, n_proto_epochs: int = 64,
                   proto_seed: int = 7_777) -> float:
    """Spectral separation coefficient over the sampled band, dB/Hz,
    computed from numeric PSDs of the scenario's own waveforms (victim
    replica spectrum x frequency-shifted interferer spectrum).  This is the
    prediction-side twin of what the correlator physically integrates.

    Seed-independent, so results are memoized per scenario geometry."""
    if cfg.interferer is None:
        raise ValueError("scenario has no interferer")
    key = (cfg.victim.id, cfg.victim.modulation, cfg.victim_prn,
           cfg.interferer.id, cfg.interferer.modulation, cfg.sample_rate,
           cfg.freq_offset, n_proto_epochs, proto_seed)
    if key in _SSC_CACHE:
        return _SSC_CACHE[key]
    epoch_samples = cfg.victim_prn.length * cfg.victim_spc
    vic_wave = np.tile(_victim_epoch_wave(cfg), n_proto_epochs)
    vic_buf = BasebandBuffer(samples=vic_wave.astype(np.complex128),
                             sample_rate=cfg.sample_rate)
    vic_psd = numeric_psd(vic_buf, epoch_samples)

    rng = np.random.default_rng(proto_seed)
    spc_i = cfg.interferer_spc
    n_chips = n_proto_epochs * epoch_samples // spc_i
    pm = np.array([-1, 1], dtype=np.int8)
    ibuf = efqpsk_modulate(rng.choice(pm, n_chips), rng.choice(pm, n_chips),
                           spc_i)
    n = np.arange(len(ibuf.samples))
    shifted = ibuf.samples * np.exp(
        1j * 2.0 * np.pi * cfg.freq_offset / cfg.sample_rate * n)
    int_buf = BasebandBuffer(samples=shifted, sample_rate=cfg.sample_rate)
    int_psd = numeric_psd(int_buf, epoch_samples)
    value = compute_ssc(vic_psd, int_psd, 0.0,
                        victim_id=cfg.victim.id,
                        interferer_id=cfg.interferer.id).value
    _SSC_CACHE[key] = value
    return value


def predicted_cn0(cfg: ScenarioConfig, interferer_power_dbw: float,
                  ssc_db_hz: float | None) -> float:
    """Effective C/N0 with the interferer folded in as white noise of
    density P_int + SSC over the correlator band."""
    n_lin = to_linear(cfg.noise_density)
    if interferer_power_dbw != float("-inf") and ssc_db_hz is not None:
        n_lin += to_linear(interferer_power_dbw + ssc_db_hz)
    return cfg.victim_power - to_db(n_lin)


def run_ramp_profile(cfg: ScenarioConfig, profile: RampProfile,
                     coherent_time: float | None = None) -> list[StageResult]:
    """Execute the power ramp: per stage, stream the scenario, measure C/N0
    with the correlator, and report it next to the analytic prediction.

    Stage dwells replace ``cfg.duration``; the interferer's FOC power is its
    aggregate level (max single-satellite RIP + aggregation gain), offset
    per stage.  Baseline-after minus baseline-before is the hysteresis
    check, expected ~0 for this ideal receiver.
    """
    epoch_samples = cfg.victim_prn.length * cfg.victim_spc
    if coherent_time is None:
        coherent_time = epoch_samples / cfg.sample_rate
    if round(coherent_time * cfg.sample_rate) != epoch_samples:
        raise ValueError(
            "coherent_time must equal one victim code period in this runner")
    replica = Replica(chips=gen_prn(cfg.victim_prn, cfg.victim_prn.length),
                      samples_per_chip=cfg.victim_spc)
    rep_wave = _replica_wave(replica, epoch_samples)

    foc_power = None
    ssc = None
    if cfg.interferer is not None:
        foc_power = (cfg.interferer.max_single_sat_rip
                     + cfg.interferer.aggregation_gain)
        if any(s.interferer_offset_db != float("-inf")
               for s in profile.stages):
            ssc = simulation_ssc(cfg)

    results = []
    t_start = 0.0
    for idx, stage in enumerate(profile.stages):
        if stage.interferer_offset_db == float("-inf") or foc_power is None:
            p_int = float("-inf")
        else:
            p_int = foc_power + stage.interferer_offset_db
        n_epochs = int(stage.dwell * cfg.sample_rate) // epoch_samples
        if n_epochs < _NWPR_BLOCK:
            raise ValueError(
                f"stage {stage.label!r}: dwell {stage.dwell}s gives "
                f"{n_epochs} epochs, need >= {_NWPR_BLOCK}")
        chunks = _epoch_stream(cfg, p_int, n_epochs, epoch_samples,
                               stage_index=idx)
        z = _correlate_epochs(chunks, rep_wave, epoch_samples)
        measured = _nwpr_cn0(z, coherent_time)
        predicted = predicted_cn0(cfg, p_int, ssc)
        results.append(StageResult(label=stage.label, t_start=t_start,
                                   measured_cn0=measured,
                                   predicted_cn0=predicted,
                                   interferer_power=p_int))
        t_start += stage.dwell
    return results


def hysteresis_db(results) -> float:
    """Measured baseline-after minus baseline-before."""
    baselines = [r for r in results
                 if r.interferer_power == float("-inf")]
    if len(baselines) < 2:
        raise ValueError("profile has no bracketing baselines")
    return baselines[-1].measured_cn0 - baselines[0].measured_cn0


def write_ramp_csv(results, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["stage", "t_start_s", "measured_cn0_dbhz",
                    "predicted_cn0_dbhz"])
        for r in results:
            w.writerow([r.label, repr(r.t_start),
                        repr(round(r.measured_cn0, 6))
                        if math.isfinite(r.measured_cn0) else "-inf",
                        repr(round(r.predicted_cn0, 6))
                        if math.isfinite(r.predicted_cn0) else "-inf"])
