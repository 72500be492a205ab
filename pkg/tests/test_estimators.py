import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import make_pipeline

from vlcmodem.estimators import LEDTransmitter, OpticalChannel, PPMModulator, ThresholdReceiver
from vlcmodem.prbs import prbs_generate


@pytest.fixture
def bits():
    return prbs_generate(9, None, 4096)


def test_params_round_trip():
    rx = ThresholdReceiver(scheme="4ippm", method="slot-count", step=0.02)
    params = rx.get_params()
    assert params["scheme"] == "4ippm" and params["step"] == 0.02
    twin = clone(rx)
    assert twin.get_params() == params
    rx.set_params(window_symbols=16)
    assert rx.window_symbols == 16


def test_modulator_round_trip(bits):
    mod = PPMModulator("4ppm").fit()
    slots = mod.transform(bits)
    assert slots.size == bits.size * 2
    assert np.array_equal(mod.inverse_transform(slots), bits)
    assert mod.anomalies_.total == 0


def test_unfitted_transform_raises(bits):
    with pytest.raises(NotFittedError):
        PPMModulator().transform(bits)


@pytest.mark.parametrize("scheme", ["2ppm", "4ppm", "4ippm"])
@pytest.mark.parametrize("method", ["level_average", "slot_count"])
def test_pipeline_link(bits, scheme, method):
    link = make_pipeline(
        PPMModulator(scheme),
        LEDTransmitter(v_high=1.0, samples_per_slot=5),
        OpticalChannel(distance=20.0, reference_distance=10.0, noise_sigma0=0.005, random_state=4),
    )
    received = link.fit_transform(bits)
    rx = ThresholdReceiver(scheme, method, theta_min=0.0, theta_max=0.5, margin=0.01)
    # slot counting starts at the bound midpoint, exactly the 20 cm high level; train first
    decoded = rx.fit(received).predict(received)
    assert np.array_equal(decoded, bits)
    assert 0.0 < rx.theta_ < 0.25
    assert rx.score(received, bits) == 1.0


def test_fit_primes_level_average(bits):
    samples = make_pipeline(PPMModulator(), LEDTransmitter(v_high=2.0)).fit_transform(bits)
    rx = ThresholdReceiver(method="level_average", theta_max=5.0, margin=0.0).fit(samples)
    assert rx.theta_ == pytest.approx(1.0)


def test_partial_fit_moves_slot_count_threshold(bits):
    samples = make_pipeline(PPMModulator(), LEDTransmitter(v_high=1.0)).fit_transform(bits)
    rx = ThresholdReceiver(method="slot_count", theta_min=0.0, theta_max=5.0, step=0.1)
    rx.partial_fit(samples)
    assert 0.0 < rx.theta_ < 1.0
    before = rx.theta_
    rx.partial_fit(samples)
    assert rx.theta_ == before


def test_fixed_receiver_keeps_threshold(bits):
    samples = make_pipeline(PPMModulator(), LEDTransmitter(v_high=1.0)).fit_transform(bits)
    rx = ThresholdReceiver(method="fixed", fixed_threshold=0.3)
    rx.predict(samples)
    assert np.all(rx.theta_trace_ == 0.3)
