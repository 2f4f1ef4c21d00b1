"""Signal, noise-environment, and constellation data model plus JSON
catalog ingestion.

Catalogs are JSON with explicit units in the field names (documented in the
repo README).  The reserved catalog name ``paper-2025`` resolves to the
built-in data set shipped with the package; everything else is treated as a
file path.  Catalog objects are frozen dataclasses, immutable after load.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, asdict
from importlib import resources
from pathlib import Path

import numpy as np

__all__ = [
    "CatalogError",
    "BpskR", "Qpsk", "BocSin", "BocCos", "Cboc", "AltBoc", "Efqpsk",
    "ModulationKind",
    "SignalSpec", "NoiseEnvironment", "ConstellationSpec", "AntennaPattern",
    "Catalog",
    "load_catalog", "load_noise_environment", "validate_spec",
    "serialize_catalog",
    "BUILTIN_CATALOG_NAME",
]

BUILTIN_CATALOG_NAME = "paper-2025"


class CatalogError(ValueError):
    """Malformed catalog file or invariant violation; the message names the
    offending field."""


# --------------------------------------------------------------------------
# modulation kinds
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class BpskR:
    chip_rate: float  # chips/s


@dataclass(frozen=True)
class Qpsk:
    chip_rate: float


@dataclass(frozen=True)
class BocSin:
    subcarrier_rate: float  # Hz
    chip_rate: float


@dataclass(frozen=True)
class BocCos:
    subcarrier_rate: float
    chip_rate: float


@dataclass(frozen=True)
class Cboc:
    high_rate: float      # Hz, high-rate subcarrier component
    low_rate: float       # Hz, low-rate subcarrier (= chip rate)
    power_split: float    # fraction of power on the high-rate component


@dataclass(frozen=True)
class AltBoc:
    subcarrier_rate: float
    chip_rate: float


@dataclass(frozen=True)
class Efqpsk:
    chip_rate: float


ModulationKind = BpskR | Qpsk | BocSin | BocCos | Cboc | AltBoc | Efqpsk

_MOD_KINDS = {
    "BPSK_R": BpskR, "QPSK": Qpsk, "BOC_SIN": BocSin, "BOC_COS": BocCos,
    "CBOC": Cboc, "ALTBOC": AltBoc, "EFQPSK": Efqpsk,
}
_MOD_FIELDS = {
    BpskR: {"chip_rate_cps": "chip_rate"},
    Qpsk: {"chip_rate_cps": "chip_rate"},
    BocSin: {"subcarrier_rate_hz": "subcarrier_rate", "chip_rate_cps": "chip_rate"},
    BocCos: {"subcarrier_rate_hz": "subcarrier_rate", "chip_rate_cps": "chip_rate"},
    Cboc: {"high_rate_hz": "high_rate", "low_rate_hz": "low_rate",
           "power_split": "power_split"},
    AltBoc: {"subcarrier_rate_hz": "subcarrier_rate", "chip_rate_cps": "chip_rate"},
    Efqpsk: {"chip_rate_cps": "chip_rate"},
}


def validate_modulation(mod: ModulationKind) -> list[str]:
    bad = []
    for name, value in vars(mod).items():
        if name == "power_split":
            if not 0.0 < value < 1.0:
                bad.append(f"power_split must be in (0,1), got {value}")
        elif not (isinstance(value, (int, float)) and value > 0):
            bad.append(f"{name} must be strictly positive, got {value}")
    return bad


# --------------------------------------------------------------------------
# core types
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SignalSpec:
    """One RNSS signal's RF, modulation, and power parameters.

    ``max_single_sat_rip`` may be -inf for signals that contribute no
    interference (victim-only entries).
    """

    id: str
    system: str
    center_frequency: float           # Hz
    modulation: ModulationKind
    max_single_sat_rip: float         # dBW
    aggregation_gain: float           # dB
    doppler_range: float              # Hz
    occupied_bandwidth_99_5: float    # Hz
    receiver_ref_bandwidth: float     # Hz
    carrier_power: float | None = None  # dBW


@dataclass(frozen=True)
class NoiseEnvironment:
    """Victim-side noise ledger, densities in dB(W/Hz), None = absent
    (zero linear power)."""

    n0: float | None
    i_ext: float | None
    i_ref: float | None
    i_rem: float | None
    l_proc: float = 0.0  # dB


@dataclass(frozen=True)
class AntennaPattern:
    """Gain vs angle table, linear-in-dB interpolation, clamped at the
    endpoints.  ``angles`` meaning depends on use: off-boresight for
    transmit patterns, elevation for receive patterns."""

    angles_deg: tuple[float, ...]
    gains_dbi: tuple[float, ...]

    def __post_init__(self):
        a = np.asarray(self.angles_deg, dtype=float)
        if a.size < 1 or (np.diff(a) <= 0).any():
            raise CatalogError("antenna pattern angles must be strictly increasing")
        if len(self.angles_deg) != len(self.gains_dbi):
            raise CatalogError("antenna pattern angles/gains length mismatch")

    def gain(self, angle_deg):
        return np.interp(angle_deg, self.angles_deg, self.gains_dbi)


ISOTROPIC = AntennaPattern(angles_deg=(0.0, 90.0), gains_dbi=(0.0, 0.0))


@dataclass(frozen=True)
class ConstellationSpec:
    planes: int
    sats_per_plane: int
    inclination: float        # degrees
    altitude: float           # meters
    phasing_offset: float     # degrees of in-plane anomaly per plane index
    tx_eirp: float            # dBW
    tx_pattern: AntennaPattern = ISOTROPIC

    def __post_init__(self):
        if self.planes < 1:
            raise CatalogError(f"planes must be >= 1, got {self.planes}")
        if self.sats_per_plane < 1:
            raise CatalogError(
                f"sats_per_plane must be >= 1, got {self.sats_per_plane}")
        if self.altitude <= 0:
            raise CatalogError(f"altitude must be > 0, got {self.altitude}")


@dataclass(frozen=True)
class Catalog:
    name: str
    signals: tuple[SignalSpec, ...]
    noise_environments: dict
    reference_ssc_db_hz: dict
    reference_victims: dict
    constellations: dict

    def signal(self, signal_id: str) -> SignalSpec:
        key = _canon(signal_id)
        for s in self.signals:
            if _canon(s.id) == key:
                return s
        raise CatalogError(f"unknown signal id {signal_id!r}")


def _canon(name: str) -> str:
    return "".join(ch for ch in name.lower() if ch.isalnum())


# --------------------------------------------------------------------------
# validation
# --------------------------------------------------------------------------

def validate_spec(spec: SignalSpec) -> list[str]:
    """Empty list iff all SignalSpec invariants hold; violations name the
    offending field."""
    bad = []
    if not spec.center_frequency > 0:
        bad.append(f"center_frequency must be > 0, got {spec.center_frequency}")
    if not spec.receiver_ref_bandwidth > 0:
        bad.append(
            f"receiver_ref_bandwidth must be > 0, got {spec.receiver_ref_bandwidth}")
    bad.extend(validate_modulation(spec.modulation))
    for name in ("aggregation_gain", "doppler_range", "occupied_bandwidth_99_5"):
        v = getattr(spec, name)
        if not math.isfinite(v):
            bad.append(f"{name} must be finite, got {v}")
    if spec.carrier_power is not None and not math.isfinite(spec.carrier_power):
        bad.append(f"carrier_power must be finite or null, got {spec.carrier_power}")
    return bad


# --------------------------------------------------------------------------
# JSON (de)serialization
# --------------------------------------------------------------------------

_SIGNAL_FIELDS = {
    "id": str, "system": str, "center_frequency_hz": float,
    "modulation": dict, "max_single_sat_rip_dbw": (float, type(None)),
    "aggregation_gain_db": float, "doppler_range_hz": float,
    "occupied_bandwidth_99_5_hz": float, "receiver_ref_bandwidth_hz": float,
    "carrier_power_dbw": (float, type(None)),
}


def _parse_modulation(obj, where):
    if not isinstance(obj, dict) or "kind" not in obj:
        raise CatalogError(f"{where}.modulation: expected object with 'kind'")
    kind = obj["kind"]
    if kind not in _MOD_KINDS:
        raise CatalogError(f"{where}.modulation.kind: unknown kind {kind!r}")
    cls = _MOD_KINDS[kind]
    fields_map = _MOD_FIELDS[cls]
    extra = set(obj) - set(fields_map) - {"kind"}
    if extra:
        raise CatalogError(
            f"{where}.modulation: unknown fields {sorted(extra)}")
    kwargs = {}
    for json_name, attr in fields_map.items():
        if json_name not in obj:
            raise CatalogError(f"{where}.modulation.{json_name}: missing")
        kwargs[attr] = obj[json_name]
    mod = cls(**kwargs)
    bad = validate_modulation(mod)
    if bad:
        raise CatalogError(f"{where}.modulation: " + "; ".join(bad))
    return mod


def _parse_signal(obj, idx):
    where = f"signals[{idx}]"
    if not isinstance(obj, dict):
        raise CatalogError(f"{where}: expected object")
    extra = set(obj) - set(_SIGNAL_FIELDS)
    if extra:
        raise CatalogError(f"{where}: unknown fields {sorted(extra)}")
    missing = set(_SIGNAL_FIELDS) - set(obj) - {"carrier_power_dbw",
                                                "max_single_sat_rip_dbw"}
    if missing:
        raise CatalogError(f"{where}: missing fields {sorted(missing)}")
    rip = obj.get("max_single_sat_rip_dbw")
    spec = SignalSpec(
        id=obj["id"], system=obj["system"],
        center_frequency=float(obj["center_frequency_hz"]),
        modulation=_parse_modulation(obj["modulation"], where),
        max_single_sat_rip=float("-inf") if rip is None else float(rip),
        aggregation_gain=float(obj["aggregation_gain_db"]),
        doppler_range=float(obj["doppler_range_hz"]),
        occupied_bandwidth_99_5=float(obj["occupied_bandwidth_99_5_hz"]),
        receiver_ref_bandwidth=float(obj["receiver_ref_bandwidth_hz"]),
        carrier_power=(None if obj.get("carrier_power_dbw") is None
                       else float(obj["carrier_power_dbw"])),
    )
    bad = validate_spec(spec)
    if bad:
        raise CatalogError(f"{where} ({spec.id}): " + "; ".join(bad))
    return spec


_ENV_FIELDS = ("n0_dbw_hz", "i_ext_dbw_hz", "i_ref_dbw_hz", "i_rem_dbw_hz",
               "l_proc_db")


def _parse_env(obj, name):
    extra = set(obj) - set(_ENV_FIELDS)
    if extra:
        raise CatalogError(
            f"noise_environments[{name}]: unknown fields {sorted(extra)}")
    def get(k):
        v = obj.get(k)
        return None if v is None else float(v)
    return NoiseEnvironment(n0=get("n0_dbw_hz"), i_ext=get("i_ext_dbw_hz"),
                            i_ref=get("i_ref_dbw_hz"), i_rem=get("i_rem_dbw_hz"),
                            l_proc=float(obj.get("l_proc_db", 0.0)))


def _parse_pattern(obj, name):
    try:
        samples = [(float(a), float(g)) for a, g in obj]
    except (TypeError, ValueError) as exc:
        raise CatalogError(
            f"antenna_patterns[{name}]: expected [[angle_deg, gain_dbi], ...]"
        ) from exc
    return AntennaPattern(angles_deg=tuple(a for a, _ in samples),
                          gains_dbi=tuple(g for _, g in samples))


def _parse_constellation(obj, name, patterns):
    fields = {"planes", "sats_per_plane", "inclination_deg", "altitude_m",
              "phasing_offset_deg", "tx_eirp_dbw", "tx_pattern"}
    extra = set(obj) - fields
    if extra:
        raise CatalogError(f"constellations[{name}]: unknown fields {sorted(extra)}")
    pat = obj.get("tx_pattern", "isotropic_0dbi")
    if isinstance(pat, str):
        if pat == "isotropic_0dbi":
            pattern = ISOTROPIC
        elif pat in patterns:
            pattern = patterns[pat]
        else:
            raise CatalogError(
                f"constellations[{name}].tx_pattern: unknown pattern {pat!r}")
    else:
        pattern = _parse_pattern(pat, f"{name}.tx_pattern")
    return ConstellationSpec(
        planes=int(obj["planes"]), sats_per_plane=int(obj["sats_per_plane"]),
        inclination=float(obj["inclination_deg"]),
        altitude=float(obj["altitude_m"]),
        phasing_offset=float(obj["phasing_offset_deg"]),
        tx_eirp=float(obj["tx_eirp_dbw"]), tx_pattern=pattern)


def _parse_catalog(doc, name) -> Catalog:
    if not isinstance(doc, dict):
        raise CatalogError("catalog root must be a JSON object")
    known = {"catalog_name", "signals", "noise_environments",
             "reference_ssc_db_hz", "reference_victims", "constellations",
             "antenna_patterns"}
    extra = set(doc) - known
    if extra:
        raise CatalogError(f"catalog: unknown fields {sorted(extra)}")
    signals = tuple(_parse_signal(s, i) for i, s in enumerate(doc.get("signals", [])))
    ids = [_canon(s.id) for s in signals]
    if len(set(ids)) != len(ids):
        raise CatalogError("signals: duplicate ids")
    envs = {k: _parse_env(v, k) for k, v in doc.get("noise_environments", {}).items()}
    patterns = {k: _parse_pattern(v, k)
                for k, v in doc.get("antenna_patterns", {}).items()}
    consts = {k: _parse_constellation(v, k, patterns)
              for k, v in doc.get("constellations", {}).items()}
    return Catalog(
        name=doc.get("catalog_name", name),
        signals=signals,
        noise_environments=envs,
        reference_ssc_db_hz=doc.get("reference_ssc_db_hz", {}),
        reference_victims=doc.get("reference_victims", {}),
        constellations=consts,
    )


def _load_doc(path):
    if str(path) == BUILTIN_CATALOG_NAME:
        text = resources.files("pulsarcompat").joinpath(
            "_data/paper_2025.json").read_text()
    else:
        p = Path(path)
        if not p.exists():
            raise CatalogError(f"catalog file not found: {p}")
        text = p.read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise CatalogError(f"catalog parse error: {exc}") from exc


def load_full_catalog(path) -> Catalog:
    """Load a catalog file (or the reserved built-in name)."""
    return _parse_catalog(_load_doc(path), str(path))


def load_catalog(path) -> tuple[SignalSpec, ...]:
    """Validated signal specs from a catalog file or the reserved built-in
    name ``paper-2025``."""
    return load_full_catalog(path).signals


def load_noise_environment(path, victim_id: str) -> NoiseEnvironment:
    """Noise ledger for one victim from a catalog file or the built-ins."""
    cat = load_full_catalog(path)
    key = _canon(victim_id)
    for name, env in cat.noise_environments.items():
        if _canon(name) == key:
            return env
    raise CatalogError(
        f"unknown victim_id {victim_id!r}: no noise environment in {cat.name}")


def serialize_catalog(cat: Catalog) -> str:
    """Inverse of load: JSON text that parses back to an equal catalog."""
    def mod_obj(mod):
        kind = next(k for k, cls in _MOD_KINDS.items() if isinstance(mod, cls))
        out = {"kind": kind}
        for json_name, attr in _MOD_FIELDS[type(mod)].items():
            out[json_name] = getattr(mod, attr)
        return out

    def sig_obj(s):
        return {
            "id": s.id, "system": s.system,
            "center_frequency_hz": s.center_frequency,
            "modulation": mod_obj(s.modulation),
            "max_single_sat_rip_dbw": (None if math.isinf(s.max_single_sat_rip)
                                       else s.max_single_sat_rip),
            "aggregation_gain_db": s.aggregation_gain,
            "doppler_range_hz": s.doppler_range,
            "occupied_bandwidth_99_5_hz": s.occupied_bandwidth_99_5,
            "receiver_ref_bandwidth_hz": s.receiver_ref_bandwidth,
            "carrier_power_dbw": s.carrier_power,
        }

    def env_obj(e):
        return {"n0_dbw_hz": e.n0, "i_ext_dbw_hz": e.i_ext,
                "i_ref_dbw_hz": e.i_ref, "i_rem_dbw_hz": e.i_rem,
                "l_proc_db": e.l_proc}

    def const_obj(c):
        return {"planes": c.planes, "sats_per_plane": c.sats_per_plane,
                "inclination_deg": c.inclination, "altitude_m": c.altitude,
                "phasing_offset_deg": c.phasing_offset,
                "tx_eirp_dbw": c.tx_eirp,
                "tx_pattern": [[a, g] for a, g in
                               zip(c.tx_pattern.angles_deg,
                                   c.tx_pattern.gains_dbi)]}

    doc = {
        "catalog_name": cat.name,
        "signals": [sig_obj(s) for s in cat.signals],
        "noise_environments": {k: env_obj(v)
                               for k, v in cat.noise_environments.items()},
        "reference_ssc_db_hz": cat.reference_ssc_db_hz,
        "reference_victims": cat.reference_victims,
        "constellations": {k: const_obj(v) for k, v in cat.constellations.items()},
    }
    return json.dumps(doc, indent=2)
