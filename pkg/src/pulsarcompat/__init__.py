"""RNSS inter-system compatibility toolkit.

Models navigation signal spectra (closed-form GNSS families plus a
cross-correlated constant-envelope quadrature modulation), computes
spectral separation coefficients and C/N0 degradation with the standard
coordination-methodology arithmetic, estimates constellation aggregation
gain from orbit geometry, and cross-validates the analytic chain with a
baseband correlator simulation of the conductive bench protocol.
"""

__version__ = "0.1.0"

from .catalog import (AltBoc, AntennaPattern, BocCos, BocSin, BpskR, Catalog,
                      CatalogError, Cboc, ConstellationSpec, Efqpsk,
                      ModulationKind, NoiseEnvironment, Qpsk, SignalSpec,
                      load_catalog, load_full_catalog, load_noise_environment,
                      serialize_catalog, validate_spec)
from .prn import PrnConfig, PrnError, gen_prn, gold_code, lfsr_sequence
from .waveform import (BasebandBuffer, bpsk_modulate, compose_data_pilot,
                       envelope_stats, read_iq, write_iq)
from .efqpsk import efqpsk_modulate
from .spectrum import (SampledPsd, SpectrumError, analytic_psd, numeric_psd,
                       occupied_bandwidth, read_psd_csv, write_psd_csv)
from .interference import (DegradationReport, DegradationRow, SscResult,
                           build_report, cn0_degradation, compute_ssc,
                           effective_cn0, i_alt, to_db, to_linear,
                           total_noise_density)
from .aggregation import (SatState, UserPoint, aggregation_gain,
                          free_space_path_loss, orbital_period,
                          propagate_constellation, received_power)
from .basebandsim import (RampProfile, RampStage, Replica, ScenarioConfig,
                          StageResult, default_ramp_profile, estimate_cn0,
                          run_ramp_profile, synthesize_scenario)
