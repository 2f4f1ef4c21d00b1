import numpy as np
import pytest

from pulsarcompat.prn import PrnConfig, gen_prn
from pulsarcompat.waveform import (BasebandBuffer, bpsk_modulate,
                                   compose_data_pilot, envelope_stats,
                                   read_iq, write_iq)


def test_bpsk_sample_pattern():
    buf = bpsk_modulate([1, -1], 4)
    assert buf.samples.real.tolist() == [1, 1, 1, 1, -1, -1, -1, -1]
    assert np.all(buf.samples.imag == 0)


def test_bpsk_constant_envelope():
    rng = np.random.default_rng(0)
    buf = bpsk_modulate(rng.choice([-1, 1], 500), 3)
    ripple, power = envelope_stats(buf)
    assert ripple == 0.0
    assert power == pytest.approx(1.0)


def test_bpsk_buffer_duration_1ms():
    chips = gen_prn(PrnConfig(length=1023, taps=(10, 3)), 1023)
    buf = bpsk_modulate(chips, 4, chip_rate=1.023e6)
    assert buf.duration == pytest.approx(1e-3)


def test_compose_identity_case():
    data_prn = PrnConfig(length=31, taps=(5, 3))
    pilot_prn = PrnConfig(length=31, taps=(5, 4, 3, 2))
    ones = np.ones(4, dtype=int)
    i_chips, q_chips = compose_data_pilot(ones, data_prn, pilot_prn,
                                          overlay=np.ones(10, dtype=int))
    assert np.array_equal(i_chips, gen_prn(data_prn, 4 * 31))
    assert np.array_equal(q_chips, gen_prn(pilot_prn, 4 * 31))


def test_compose_bit_flip_touches_only_that_interval():
    data_prn = PrnConfig(length=31, taps=(5, 3))
    pilot_prn = PrnConfig(length=31, taps=(5, 4, 3, 2))
    bits = np.ones(5, dtype=int)
    flipped = bits.copy()
    flipped[2] = -1
    i0, q0 = compose_data_pilot(bits, data_prn, pilot_prn, np.ones(2, int))
    i1, q1 = compose_data_pilot(flipped, data_prn, pilot_prn, np.ones(2, int))
    assert np.array_equal(q0, q1)
    changed = i0 != i1
    assert changed[2 * 31: 3 * 31].all()
    assert not changed[: 2 * 31].any() and not changed[3 * 31:].any()


def test_compose_data_is_involution():
    data_prn = PrnConfig(length=63, taps=(6, 5))
    pilot_prn = PrnConfig(length=63, taps=(6, 1))
    rng = np.random.default_rng(3)
    bits = rng.choice([-1, 1], 8)
    i_chips, _ = compose_data_pilot(bits, data_prn, pilot_prn, np.ones(3, int))
    # multiplying the data back in recovers the bare PRN (d^2 = 1)
    recovered = i_chips * np.repeat(bits, 63)
    assert np.array_equal(recovered, gen_prn(data_prn, 8 * 63))


def test_overlay_extends_pilot_period():
    # fundamental period of the overlay itself is its full length
    overlay = np.array([1, 1, 1, -1, 1, -1, -1, 1, -1, -1])
    assert all(not np.array_equal(overlay, np.roll(overlay, s))
               for s in range(1, 10))
    pilot_prn = PrnConfig(length=31, taps=(5, 3))
    data_prn = PrnConfig(length=31, taps=(5, 4, 3, 2))
    n_bits = 30  # 30 code epochs = 3 overlay periods
    _, q = compose_data_pilot(np.ones(n_bits, int), data_prn, pilot_prn, overlay)
    period = 10 * 31
    # brute-force period search by autocorrelation: no smaller shift matches
    assert np.array_equal(q[:period], q[period: 2 * period])
    for shift in range(31, period, 31):
        if np.array_equal(np.roll(q, shift), q):
            assert shift == period
            break


def test_compose_non_commensurate_rates_error():
    data_prn = PrnConfig(length=31, taps=(5, 3))
    pilot_prn = PrnConfig(length=31, taps=(5, 4, 3, 2))
    with pytest.raises(ValueError):
        compose_data_pilot(np.ones(3, int), data_prn, pilot_prn,
                           np.ones(2, int), chips_per_bit=40)


def test_envelope_scaling():
    rng = np.random.default_rng(1)
    buf = bpsk_modulate(rng.choice([-1, 1], 200), 2)
    r0, p0 = envelope_stats(buf)
    scaled = BasebandBuffer(samples=2.0 * buf.samples,
                            sample_rate=buf.sample_rate)
    r1, p1 = envelope_stats(scaled)
    assert p1 == pytest.approx(4.0 * p0)
    assert r1 == pytest.approx(r0)


def test_envelope_zero_sample_sentinel():
    buf = BasebandBuffer(samples=np.array([1.0, 0.0, 1.0], dtype=complex),
                         sample_rate=1.0)
    ripple, _ = envelope_stats(buf)
    assert ripple == float("inf")


def test_iq_export_round_trip(tmp_path):
    rng = np.random.default_rng(5)
    buf = BasebandBuffer(samples=rng.normal(size=64) + 1j * rng.normal(size=64),
                         sample_rate=2.5e6, epoch=1.25)
    path = tmp_path / "wave.iq"
    write_iq(buf, path)
    back = read_iq(path)
    assert back.sample_rate == buf.sample_rate
    assert back.epoch == buf.epoch
    assert np.allclose(back.samples, buf.samples, atol=1e-6)


def test_buffer_invariants():
    with pytest.raises(ValueError):
        BasebandBuffer(samples=np.array([], dtype=complex), sample_rate=1.0)
    with pytest.raises(ValueError):
        BasebandBuffer(samples=np.ones(4, dtype=complex), sample_rate=0.0)
