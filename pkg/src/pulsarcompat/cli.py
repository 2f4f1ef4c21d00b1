"""Command-line front end.

Subcommands: psd, ssc, degrade, aggregate, simulate, catalog validate.
Every command writes a run manifest next to its outputs; re-running the same
command line reproduces the output files byte-identically on one platform.

Exit status: 0 success, 2 configuration / usage error, 3 computation error.
All dB-valued flags carry _db/_dbw names and frequency flags are hertz, to
keep units out of the failure-mode budget.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .basebandsim import (RampProfile, RampStage, ScenarioConfig,
                          default_ramp_profile, run_ramp_profile,
                          write_ramp_csv)
from .catalog import (Catalog, CatalogError, Efqpsk, load_catalog,
                      load_full_catalog, BUILTIN_CATALOG_NAME)
from .efqpsk import efqpsk_modulate
from .interference import (build_report, compute_ssc, interferer_numeric_psd,
                           victim_analytic_psd, write_report_csv,
                           write_report_json)
from .aggregation import UserPoint, aggregation_gain, orbital_period
from .prn import PrnConfig
from .spectrum import (SpectrumError, analytic_psd, numeric_psd,
                       occupied_bandwidth, write_psd_csv)
from .waveform import BasebandBuffer

CATALOG_ENV_VAR = "PULSARCOMPAT_CATALOG"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_COMPUTE = 3


class ConfigError(Exception):
    pass


def _atomic_write(path: Path, writer) -> None:
    """Write via temp-then-rename so partial outputs never land."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
    os.close(fd)
    try:
        writer(tmp)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_manifest(out_path: Path, command: str, args: dict,
                    config_paths, seed: int | None) -> None:
    manifest = {
        "command": command,
        "config_paths": [str(p) for p in config_paths],
        "resolved_parameters": {k: (v if _jsonable(v) else str(v))
                                for k, v in sorted(args.items())},
        "tool_version": __version__,
        "seed": seed,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    mpath = Path(str(out_path) + ".manifest.json")
    _atomic_write(mpath, lambda tmp: Path(tmp).write_text(
        json.dumps(manifest, indent=2) + "\n"))


def _jsonable(v):
    try:
        json.dumps(v)
        return True
    except (TypeError, ValueError):
        return False


def _load_cat(args) -> Catalog:
    path = args.catalog or os.environ.get(CATALOG_ENV_VAR, BUILTIN_CATALOG_NAME)
    return load_full_catalog(path)


def _catalog_path(args) -> str:
    return args.catalog or os.environ.get(CATALOG_ENV_VAR, BUILTIN_CATALOG_NAME)


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------

def cmd_psd(args) -> int:
    cat = _load_cat(args)
    sig = cat.signal(args.signal)
    span = args.span_hz
    if isinstance(sig.modulation, Efqpsk):
        rc = sig.modulation.chip_rate
        spc = args.spc or (64 if rc < 5e6 else 12)
        rng = np.random.default_rng(args.seed)
        pm = np.array([-1, 1], dtype=np.int8)
        buf = efqpsk_modulate(rng.choice(pm, args.chips),
                              rng.choice(pm, args.chips), spc)
        buf = BasebandBuffer(samples=buf.samples, sample_rate=rc * spc)
        seg = max(64, int(round(buf.sample_rate / args.grid_hz)))
        psd = numeric_psd(buf, seg)
    else:
        n = int(round(span / args.grid_hz))
        grid = np.arange(-n, n + 1, dtype=np.float64) * args.grid_hz
        psd = analytic_psd(sig.modulation, grid)
    out = Path(args.output)
    _atomic_write(out, lambda tmp: write_psd_csv(psd, tmp))
    _write_manifest(out, "psd", vars(args), [_catalog_path(args)], args.seed)
    print(f"wrote {out} ({len(psd.grid)} bins)")
    return EXIT_OK


def cmd_ssc(args) -> int:
    cat = _load_cat(args)
    victim = cat.signal(args.victim)
    interferer = cat.signal(args.interferer)
    offset = (args.offset_hz if args.offset_hz is not None
              else interferer.center_frequency - victim.center_frequency)
    half_span = max(30e6, abs(offset) + 30e6)
    vic_psd = victim_analytic_psd(victim, half_span)
    if args.ssc_source == "numeric":
        int_psd = interferer_numeric_psd(interferer, n_chips=args.chips,
                                         seed=args.seed)
    else:
        grid = vic_psd.grid
        int_psd = analytic_psd(interferer.modulation, grid)
    result = compute_ssc(vic_psd, int_psd, offset, victim_id=victim.id,
                         interferer_id=interferer.id)
    doc = {
        "victim": result.victim_id, "interferer": result.interferer_id,
        "ssc_db_hz": result.value, "frequency_offset_hz": result.frequency_offset,
        "integration_band_hz": result.integration_band,
        "grid_spacing_hz": result.grid_spacing,
    }
    print(f"SSC {interferer.id} -> {victim.id}: {result.value:.2f} dB/Hz")
    if args.output:
        out = Path(args.output)
        _atomic_write(out, lambda tmp: Path(tmp).write_text(
            json.dumps(doc, indent=2) + "\n"))
        _write_manifest(out, "ssc", vars(args), [_catalog_path(args)], args.seed)
    return EXIT_OK


def cmd_degrade(args) -> int:
    cat = _load_cat(args)
    interferer = cat.signal(args.interferer)
    if args.victims == "paper":
        ids = cat.reference_victims.get(interferer.id)
        if not ids:
            raise ConfigError(f"no built-in victim list for {interferer.id}")
    else:
        ids = [v.strip() for v in args.victims.split(",") if v.strip()]
    victims = [cat.signal(v) for v in ids]
    envs = {}
    for v in victims:
        for name, env in cat.noise_environments.items():
            if name.lower() == v.id.lower():
                envs[v.id] = env
    table = cat.reference_ssc_db_hz.get(interferer.id, {})
    rip_override = args.rip_dbw
    report = build_report(victims, interferer, envs,
                          ssc_source=args.ssc_source, ssc_table=table,
                          seed=args.seed, n_chips=args.chips,
                          rip_override=rip_override)

    rows = []
    for r in report.rows:
        delta = "" if r.delta_cn0 is None else f"{-r.delta_cn0:.2f}"
        rows.append((r.victim_id, f"{r.ssc:.2f}",
                     f"{r.i_alt:.2f}" if math.isfinite(r.i_alt) else "-inf",
                     delta))
    width = max(len(r[0]) for r in rows)
    print(f"{'victim':{width}s}  {'ssc':>8s}  {'i_alt':>8s}  {'delta':>6s}")
    for r in rows:
        print(f"{r[0]:{width}s}  {r[1]:>8s}  {r[2]:>8s}  {r[3]:>6s}")

    out_csv = Path(args.out_csv) if args.out_csv else None
    if out_csv:
        _atomic_write(out_csv, lambda tmp: write_report_csv(report, tmp))
        _write_manifest(out_csv, "degrade", vars(args), [_catalog_path(args)],
                        args.seed)
    if args.out_json:
        out_json = Path(args.out_json)
        _atomic_write(out_json, lambda tmp: write_report_json(report, tmp))
        _write_manifest(out_json, "degrade", vars(args), [_catalog_path(args)],
                        args.seed)
    return EXIT_OK


def cmd_aggregate(args) -> int:
    cat = _load_cat(args)
    if args.constellation not in cat.constellations:
        raise ConfigError(f"unknown constellation {args.constellation!r} "
                          f"(have {sorted(cat.constellations)})")
    spec = cat.constellations[args.constellation]
    lats = np.arange(args.lat_min, args.lat_max + 1e-9, args.lat_step)
    lons = np.arange(0.0, 360.0, args.lon_step)
    users = [UserPoint(float(la), float(lo), mask_angle=args.mask_deg)
             for la in lats for lo in lons]
    period = orbital_period(spec.altitude)
    times = np.linspace(0.0, period / spec.planes, args.n_times)
    g_agg, worst = aggregation_gain(spec, users, list(times), args.freq_hz)
    doc = {
        "g_agg_db": g_agg,
        "worst_user": {"latitude_deg": worst["user"].latitude,
                       "longitude_deg": worst["user"].longitude},
        "worst_time_s": worst["time"],
        "visible_count": worst["visible_count"],
        "aggregate_power_dbw": worst["aggregate_power_dbw"],
        "max_single_rip_dbw": worst["max_single_rip_dbw"],
    }
    print(f"g_agg = {g_agg:.2f} dB (visible {worst['visible_count']}, "
          f"worst user lat {worst['user'].latitude:.1f})")
    if args.output:
        out = Path(args.output)
        _atomic_write(out, lambda tmp: Path(tmp).write_text(
            json.dumps(doc, indent=2) + "\n"))
        _write_manifest(out, "aggregate", vars(args), [_catalog_path(args)], None)
    return EXIT_OK


def cmd_simulate(args) -> int:
    cat = _load_cat(args)
    victim = cat.signal(args.victim)
    interferer = cat.signal(args.interferer) if args.interferer else None
    rc = victim.modulation.chip_rate
    code_len = args.code_length or (1023 if rc < 5e6 else 10230)
    if args.prn_seed is not None:
        rng = np.random.default_rng(args.prn_seed)
        chips = tuple(int(c) for c in rng.choice([-1, 1], code_len))
        prn = PrnConfig(length=code_len, chips=chips)
    elif code_len == 1023:
        prn = PrnConfig(length=1023, taps=(10, 3), taps_b=(10, 9, 8, 6, 3, 2),
                        phase_b=17)
    else:
        rng = np.random.default_rng(2_025)
        prn = PrnConfig(length=code_len,
                        chips=tuple(int(c) for c in rng.choice([-1, 1], code_len)))
    victim_power = (args.victim_power_dbw if args.victim_power_dbw is not None
                    else victim.carrier_power)
    if victim_power is None:
        raise ConfigError(
            f"victim {victim.id} has no carrier power; pass --victim-power-dbw")
    cfg = ScenarioConfig(victim=victim, victim_prn=prn,
                         victim_power=victim_power,
                         sample_rate=args.sample_rate_hz,
                         duration=max(args.dwell_s, 0.1),
                         interferer=interferer,
                         noise_density=args.noise_density_dbw_hz,
                         seed=args.seed)
    if args.profile == "default":
        profile = default_ramp_profile(dwell=args.dwell_s)
    else:
        profile = _load_profile(args.profile)
    results = run_ramp_profile(cfg, profile)
    for r in results:
        meas = f"{r.measured_cn0:7.2f}" if math.isfinite(r.measured_cn0) else "  <20  "
        print(f"{r.label:15s} t={r.t_start:7.2f}s measured {meas} "
              f"predicted {r.predicted_cn0:7.2f} dB-Hz")
    out = Path(args.output)
    _atomic_write(out, lambda tmp: write_ramp_csv(results, tmp))
    _write_manifest(out, "simulate", vars(args), [_catalog_path(args)], args.seed)
    return EXIT_OK


def _load_profile(path) -> RampProfile:
    doc = json.loads(Path(path).read_text())
    stages = []
    for s in doc["stages"]:
        off = s["interferer_offset_db"]
        off = float("-inf") if off in (None, "-inf") else float(off)
        stages.append(RampStage(label=s["label"], interferer_offset_db=off,
                                dwell=float(s["dwell_s"])))
    return RampProfile(stages=tuple(stages))


def cmd_catalog_validate(args) -> int:
    path = _catalog_path(args)
    signals = load_catalog(path)
    cat = load_full_catalog(path)
    print(f"catalog {cat.name!r}: {len(signals)} signals, "
          f"{len(cat.noise_environments)} noise environments, "
          f"{len(cat.constellations)} constellations: OK")
    return EXIT_OK


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="pulsarcompat",
        description="RNSS inter-system compatibility analysis")
    p.add_argument("--catalog", default=None,
                   help=f"catalog path or reserved name (default: "
                        f"${CATALOG_ENV_VAR} or {BUILTIN_CATALOG_NAME!r})")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("psd", help="export a signal PSD as CSV")
    sp.add_argument("--signal", required=True)
    sp.add_argument("--span-hz", type=float, default=30e6,
                    help="one-sided analytic span")
    sp.add_argument("--grid-hz", type=float, default=1e3)
    sp.add_argument("--chips", type=int, default=200_000,
                    help="random chips for the numeric path")
    sp.add_argument("--spc", type=int, default=None,
                    help="samples per chip for the numeric path")
    sp.add_argument("--seed", type=int, default=20_250)
    sp.add_argument("-o", "--output", required=True)
    sp.set_defaults(func=cmd_psd)

    sp = sub.add_parser("ssc", help="spectral separation coefficient")
    sp.add_argument("--victim", required=True)
    sp.add_argument("--interferer", required=True)
    sp.add_argument("--ssc-source", choices=("numeric", "analytic"),
                    default="numeric")
    sp.add_argument("--offset-hz", type=float, default=None,
                    help="override the center-frequency difference")
    sp.add_argument("--chips", type=int, default=200_000)
    sp.add_argument("--seed", type=int, default=20_250)
    sp.add_argument("-o", "--output", default=None, help="JSON output path")
    sp.set_defaults(func=cmd_ssc)

    sp = sub.add_parser("degrade", help="per-victim degradation report")
    sp.add_argument("--interferer", required=True)
    sp.add_argument("--victims", default="paper",
                    help="'paper' or comma-separated signal ids")
    sp.add_argument("--ssc-source", choices=("fixed", "analytic", "numeric"),
                    default="fixed")
    sp.add_argument("--rip-dbw", type=float, default=None,
                    help="override the interferer RIP (use -inf for off)")
    sp.add_argument("--chips", type=int, default=200_000)
    sp.add_argument("--seed", type=int, default=20_250)
    sp.add_argument("--out-csv", default=None)
    sp.add_argument("--out-json", default=None)
    sp.set_defaults(func=cmd_degrade)

    sp = sub.add_parser("aggregate", help="constellation aggregation gain")
    sp.add_argument("--constellation", default="pulsar-placeholder")
    sp.add_argument("--freq-hz", type=float, default=1593.3225e6)
    sp.add_argument("--mask-deg", type=float, default=5.0)
    sp.add_argument("--lat-min", type=float, default=-76.0)
    sp.add_argument("--lat-max", type=float, default=76.0)
    sp.add_argument("--lat-step", type=float, default=4.0)
    sp.add_argument("--lon-step", type=float, default=6.0)
    sp.add_argument("--n-times", type=int, default=24)
    sp.add_argument("-o", "--output", default=None)
    sp.set_defaults(func=cmd_aggregate)

    sp = sub.add_parser("simulate", help="run the conductive-bench power ramp")
    sp.add_argument("--victim", required=True)
    sp.add_argument("--interferer", default=None)
    sp.add_argument("--profile", default="default",
                    help="'default' or a JSON profile path")
    sp.add_argument("--dwell-s", type=float, default=2.0)
    sp.add_argument("--sample-rate-hz", type=float, default=81.84e6)
    sp.add_argument("--noise-density-dbw-hz", type=float, default=-200.3)
    sp.add_argument("--victim-power-dbw", type=float, default=None)
    sp.add_argument("--code-length", type=int, default=None)
    sp.add_argument("--prn-seed", type=int, default=None)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("-o", "--output", required=True)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("catalog", help="catalog utilities")
    csub = sp.add_subparsers(dest="catalog_command", required=True)
    cv = csub.add_parser("validate", help="parse and validate a catalog")
    cv.set_defaults(func=cmd_catalog_validate)

    return p


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except (CatalogError, ConfigError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SpectrumError, ValueError, ArithmeticError) as exc:
        print(f"computation error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
