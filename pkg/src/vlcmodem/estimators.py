"""scikit-learn compatible wrappers around the modem chain.

These expose the functional core through ``fit``/``transform``/``predict``
and ``get_params``/``set_params`` so the pieces drop into
:class:`sklearn.pipeline.Pipeline` and can be cloned or grid-searched::

    >>> from sklearn.pipeline import make_pipeline
    >>> tx = make_pipeline(PPMModulator("4ppm"), LEDTransmitter(v_high=1.0))
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_bits, check_samples
from .channel import ChannelConfig, TxConfig, apply_channel, attenuation_gain, synthesize_waveform
from .ppm import ModulationScheme, decode_slots, encode_bits
from .receiver import measure_window
from .threshold import (
    FIXED,
    LEVEL_AVERAGE,
    SLOT_COUNT,
    init_threshold,
    normalize_method,
    run_controller,
    update_level,
)


def _scheme(value):
    return value if isinstance(value, ModulationScheme) else ModulationScheme.parse(value)


class PPMModulator(TransformerMixin, BaseEstimator):
    """Bits to PPM/IPPM slots (``transform``) and back (``inverse_transform``)."""

    def __init__(self, scheme="2ppm"):
        self.scheme = scheme

    def fit(self, X=None, y=None):
        self.scheme_ = _scheme(self.scheme)
        return self

    def transform(self, X):
        check_is_fitted(self, "scheme_")
        return encode_bits(check_bits(X), self.scheme_).slots

    def inverse_transform(self, X):
        check_is_fitted(self, "scheme_")
        bits, self.anomalies_ = decode_slots(check_bits(X), self.scheme_)
        return bits


class LEDTransmitter(TransformerMixin, BaseEstimator):
    """Slots to a rectangular voltage waveform."""

    def __init__(self, v_high=5.0, v_low=0.0, slot_rate=8000.0, samples_per_slot=5):
        self.v_high = v_high
        self.v_low = v_low
        self.slot_rate = slot_rate
        self.samples_per_slot = samples_per_slot

    def fit(self, X=None, y=None):
        self.tx_ = TxConfig(self.v_high, self.v_low, self.slot_rate, self.samples_per_slot)
        return self

    def transform(self, X):
        check_is_fitted(self, "tx_")
        return synthesize_waveform(check_bits(X), self.tx_).samples


class OpticalChannel(TransformerMixin, BaseEstimator):
    """Distance attenuation, low-pass, noise and ambient offset on raw samples."""

    def __init__(
        self,
        distance=10.0,
        reference_distance=1.0,
        attenuation_exponent=2.0,
        ambient=0.0,
        noise_sigma0=0.0,
        noise_sigma1=0.0,
        lpf_cutoff=None,
        sample_rate=40000.0,
        random_state=0,
    ):
        self.distance = distance
        self.reference_distance = reference_distance
        self.attenuation_exponent = attenuation_exponent
        self.ambient = ambient
        self.noise_sigma0 = noise_sigma0
        self.noise_sigma1 = noise_sigma1
        self.lpf_cutoff = lpf_cutoff
        self.sample_rate = sample_rate
        self.random_state = random_state

    def fit(self, X=None, y=None):
        self.config_ = ChannelConfig(
            distance=self.distance,
            reference_distance=self.reference_distance,
            attenuation_exponent=self.attenuation_exponent,
            ambient=self.ambient,
            noise_sigma0=self.noise_sigma0,
            noise_sigma1=self.noise_sigma1,
            lpf_cutoff=self.lpf_cutoff,
            rng_seed=self.random_state,
        )
        self.gain_ = attenuation_gain(self.config_)
        return self

    def transform(self, X):
        check_is_fitted(self, "config_")
        x = check_samples(X)
        rng = np.random.default_rng(self.config_.rng_seed)
        return apply_channel(x, self.gain_, self.config_, self.sample_rate, rng)


class ThresholdReceiver(BaseEstimator):
    """Comparator receiver with a fixed or self-adjusting threshold.

    ``predict`` demodulates a received sample stream to bits, adapting the
    threshold window by window and leaving the final controller state in
    ``state_`` so consecutive calls continue where the last one stopped.
    ``fit`` primes the threshold from a training stream: level averaging
    takes one estimate over the whole stream, slot counting runs its feedback
    loop across it.
    """

    def __init__(
        self,
        scheme="2ppm",
        method="level_average",
        samples_per_slot=5,
        window_symbols=64,
        theta_min=0.0,
        theta_max=5.0,
        step=None,
        margin=0.1,
        fixed_threshold=None,
    ):
        self.scheme = scheme
        self.method = method
        self.samples_per_slot = samples_per_slot
        self.window_symbols = window_symbols
        self.theta_min = theta_min
        self.theta_max = theta_max
        self.step = step
        self.margin = margin
        self.fixed_threshold = fixed_threshold

    def _initial_state(self):
        method = normalize_method(self.method)
        theta_cal = self.fixed_threshold
        if method == FIXED and theta_cal is None:
            theta_cal = 0.5 * (self.theta_min + self.theta_max)
        return init_threshold(
            method,
            _scheme(self.scheme),
            theta_min=self.theta_min,
            theta_max=self.theta_max,
            step=self.step,
            window_symbols=self.window_symbols,
            margin=self.margin,
            theta_cal=theta_cal,
        )

    def fit(self, X, y=None):
        x = check_samples(X)
        state = self._initial_state()
        if state.method == LEVEL_AVERAGE:
            state = update_level(state, measure_window(x))
        elif state.method == SLOT_COUNT:
            _, _, state = run_controller(x, state, self.samples_per_slot)
        self.state_ = state
        self.theta_ = state.theta
        return self

    def partial_fit(self, X, y=None):
        if not hasattr(self, "state_"):
            self.state_ = self._initial_state()
        _, _, self.state_ = run_controller(check_samples(X), self.state_, self.samples_per_slot)
        self.theta_ = self.state_.theta
        return self

    def predict(self, X):
        if not hasattr(self, "state_"):
            self.state_ = self._initial_state()
        slots, thetas, state = run_controller(check_samples(X), self.state_, self.samples_per_slot)
        bits, self.anomalies_ = decode_slots(slots, self.state_.scheme)
        self.state_ = state
        self.theta_ = state.theta
        self.theta_trace_ = thetas
        return bits

    def score(self, X, y):
        """Fraction of bits recovered correctly."""
        bits = self.predict(X)
        y = check_bits(y)
        return float(np.mean(bits[:y.size] == y))
