import numpy as np
import pytest

from pulsarcompat.prn import (PrnConfig, PrnError, gen_prn, gold_code,
                              lfsr_sequence)


def test_maximal_lfsr_period_1023():
    seq = lfsr_sequence([10, 3], 10)
    assert seq.size == 1023
    # maximal sequence: no repeat before the full period
    doubled = gen_prn(PrnConfig(length=1023, taps=(10, 3)), 2046)
    assert np.array_equal(doubled[:1023], doubled[1023:])
    for shift in (1, 2, 511):
        assert not np.array_equal(seq, np.roll(seq, shift))


def test_msequence_balance():
    seq = lfsr_sequence([10, 3], 10)
    counts = sorted(((seq == 1).sum(), (seq == -1).sum()))
    assert counts == [511, 512]


def test_gold_pair_cross_correlation_levels():
    # brute-force correlation over all lags is the oracle
    a = lfsr_sequence([10, 3], 10)
    b = lfsr_sequence([10, 9, 8, 6, 3, 2], 10)
    values = {int(np.dot(a, np.roll(b, lag))) for lag in range(1023)}
    assert values == {-65, -1, 63}


def test_gen_prn_repeats_with_configured_period(rng):
    cfg = PrnConfig(length=1023, taps=(10, 3), taps_b=(10, 9, 8, 6, 3, 2),
                    phase_b=int(rng.integers(0, 1023)))
    out = gen_prn(cfg, 5 * 1023 + 17)
    assert np.array_equal(out[:1023], out[1023:2046])
    assert np.array_equal(out[: 2 * 1023], out[2046: 2046 + 2 * 1023])


def test_gen_prn_deterministic():
    cfg = PrnConfig(length=127, taps=(7, 6))
    assert np.array_equal(gen_prn(cfg, 300), gen_prn(cfg, 300))


def test_explicit_chip_table():
    chips = (1, -1, -1, 1, 1)
    out = gen_prn(PrnConfig(length=5, chips=chips), 12)
    assert out.tolist() == [1, -1, -1, 1, 1, 1, -1, -1, 1, 1, 1, -1]


def test_invalid_tap_specification():
    with pytest.raises(PrnError):
        lfsr_sequence([], 10)
    with pytest.raises(PrnError):
        lfsr_sequence([3, 4], 10)  # must include the last stage
    with pytest.raises(PrnError):
        lfsr_sequence([10, 11], 10)
    with pytest.raises(PrnError):
        PrnConfig(length=0, taps=(10, 3))
    with pytest.raises(PrnError):
        PrnConfig(length=8, chips=(1, -1, 2, 1, 1, -1, -1, 1))


def test_gold_code_has_declared_period():
    code = gold_code([10, 3], [10, 9, 8, 6, 3, 2], 10, phase_b=101,
                     n_chips=3069)
    assert np.array_equal(code[:1023], code[1023:2046])


def test_chip_table_length_mismatch():
    with pytest.raises(PrnError):
        PrnConfig(length=6, chips=(1, -1, 1))
