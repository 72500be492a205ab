import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from vlcmodem.channel import ChannelConfig, TxConfig, propagate, received_levels, synthesize_waveform
from vlcmodem.exceptions import ConfigurationError, InvalidInputError
from vlcmodem.ppm import ALL_SCHEMES, PPM2, PPM4, encode_bits
from vlcmodem.receiver import AdcConfig, comparator, measure_window, quantize, slot_decide

finite = st.floats(-1e3, 1e3, allow_nan=False)


@pytest.mark.parametrize("v, theta, out", [(3.0, 2.5, 1), (2.5, 2.5, 0), (0.0, 0.1, 0)])
def test_comparator(v, theta, out):
    assert comparator([v], theta).tolist() == [out]


@pytest.mark.parametrize(
    "samples, spp, slots",
    [([1, 1, 0], 3, [1]), ([1, 0], 2, [0]), ([0, 0, 0, 1, 1, 1], 3, [0, 1])],
)
def test_slot_decide(samples, spp, slots):
    assert slot_decide(samples, spp).tolist() == slots


def test_slot_decide_rejects_ragged():
    with pytest.raises(InvalidInputError):
        slot_decide([1, 0, 1, 1], 3)


def test_measure_window_2ppm_midpoint():
    tx = TxConfig(v_high=5.0, v_low=0.0, samples_per_slot=5)
    w = synthesize_waveform(encode_bits(np.tile([0, 1], 32), PPM2), tx)
    est = measure_window(w.samples)
    assert est.v_average == pytest.approx(2.5, rel=1e-12)
    assert est.v_low_est == 0.0
    assert est.window_samples == w.samples.size


def test_measure_window_4ppm_weighted_mean():
    # oracle: time-weighted mean of a synthesized 4-PPM waveform with V_A=4, V_B=0
    tx = TxConfig(v_high=4.0, v_low=0.0, samples_per_slot=3)
    w = synthesize_waveform(encode_bits(np.array([0, 0, 0, 1, 1, 0, 1, 1]), PPM4), tx)
    brute = sum(float(v) for v in w.samples) / len(w.samples)
    assert brute == pytest.approx(1.0, rel=1e-12)
    assert measure_window(w.samples).v_average == pytest.approx(brute, rel=1e-12)


def test_measure_window_constant():
    est = measure_window(np.full(17, 0.7))
    assert est.v_average == pytest.approx(0.7)
    assert est.v_low_est == pytest.approx(0.7)
    assert est.v_low_est <= est.v_average


def test_measure_window_empty():
    with pytest.raises(InvalidInputError):
        measure_window([])


@settings(max_examples=300, deadline=None)
@given(st.lists(finite, min_size=1, max_size=200))
def test_mean_matches_brute_force(values):
    est = measure_window(values)
    brute = math.fsum(values) / len(values)
    assert est.v_average == pytest.approx(brute, rel=1e-12, abs=1e-9)
    assert est.v_low_est <= est.v_average


def test_quantize_examples():
    assert quantize([0.5], AdcConfig(bits=1, v_ref=1.0)).tolist() == [1.0]
    assert quantize([-0.2], AdcConfig(bits=8, v_ref=1.0)).tolist() == [0.0]
    assert quantize([7.0], AdcConfig(bits=8, v_ref=1.0)).tolist() == [1.0]
    x = np.array([0.123, -4.0])
    assert np.array_equal(quantize(x, None), x)


@settings(max_examples=300, deadline=None)
@given(st.lists(finite, min_size=1, max_size=50), st.integers(1, 16), st.floats(0.1, 100))
def test_quantize_idempotent(values, bits, v_ref):
    adc = AdcConfig(bits, v_ref)
    once = quantize(values, adc)
    assert np.array_equal(quantize(once, adc), once)
    assert once.min() >= 0 and once.max() <= v_ref * (1 + 1e-12)


def test_adc_config_validation():
    with pytest.raises(ConfigurationError):
        AdcConfig(bits=0)
    with pytest.raises(ConfigurationError):
        AdcConfig(bits=17)
    with pytest.raises(ConfigurationError):
        AdcConfig(bits=8, v_ref=0.0)


@settings(max_examples=300, deadline=None)
@given(
    st.data(),
    st.floats(1e-3, 1e3),
    st.floats(-1e3, 1e3),
)
def test_noiseless_end_to_end(data, v_high, ambient):
    scheme = data.draw(st.sampled_from(ALL_SCHEMES))
    spp = data.draw(st.integers(1, 7))
    n = data.draw(st.integers(1, 30)) * scheme.bits_per_symbol
    bits = np.array(data.draw(st.lists(st.integers(0, 1), min_size=n, max_size=n)), dtype=np.uint8)
    distance = data.draw(st.floats(0.1, 100))
    frac = data.draw(st.floats(0.01, 0.99))
    tx = TxConfig(v_high=v_high, v_low=0.0, samples_per_slot=spp)
    cfg = ChannelConfig(distance=distance, ambient=ambient)
    low, high = received_levels(tx, cfg)
    theta = low + frac * (high - low)
    assume(low < theta < high)
    slots = encode_bits(bits, scheme)
    rx = propagate(synthesize_waveform(slots, tx), cfg)
    assert np.array_equal(slot_decide(comparator(rx.samples, theta), spp), slots.slots)
