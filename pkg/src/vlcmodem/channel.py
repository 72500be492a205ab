"""Rectangular LED waveform synthesis and the distance-dependent optical channel."""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter

from ._validation import check_bits, check_samples
from .exceptions import ConfigurationError, InvalidInputError
from .ppm import SlotSequence


@dataclass(frozen=True)
class TxConfig:
    """Transmitter levels, referred to the receiver at the reference distance.

    ``slot_rate`` is in slots per second. The experiment harness derives it
    from the bit rate and modulation and overrides whatever is stored here.
    """

    v_high: float = 5.0
    v_low: float = 0.0
    slot_rate: float = 8000.0
    samples_per_slot: int = 5

    def __post_init__(self):
        if not self.v_high > self.v_low:
            raise ConfigurationError("v_high must exceed v_low")
        if not self.slot_rate > 0:
            raise ConfigurationError("slot_rate must be positive")
        if int(self.samples_per_slot) != self.samples_per_slot or self.samples_per_slot < 1:
            raise ConfigurationError("samples_per_slot must be a positive integer")

    @property
    def sample_rate(self):
        return self.slot_rate * self.samples_per_slot


@dataclass(frozen=True)
class ChannelConfig:
    """Optical link between LED and photodiode.

    Distances are in centimetres. Noise on each sample is Gaussian with
    standard deviation ``noise_sigma0 + noise_sigma1 * received_signal``.
    """

    distance: float = 10.0
    reference_distance: float = 1.0
    attenuation_exponent: float = 2.0
    ambient: float = 0.0
    noise_sigma0: float = 0.0
    noise_sigma1: float = 0.0
    lpf_cutoff: float | None = None
    rng_seed: int = 0

    def __post_init__(self):
        if not self.reference_distance > 0:
            raise ConfigurationError("reference_distance must be positive")
        if self.noise_sigma0 < 0 or self.noise_sigma1 < 0:
            raise ConfigurationError("noise coefficients must be non-negative")
        if self.lpf_cutoff is not None and not self.lpf_cutoff > 0:
            raise ConfigurationError("lpf_cutoff must be positive or None")


@dataclass(frozen=True)
class AnalogWaveform:
    samples: np.ndarray = field(repr=False)
    sample_rate: float
    slot_duration: float

    def __post_init__(self):
        object.__setattr__(self, "samples", check_samples(self.samples))

    def __len__(self):
        return self.samples.size

    @property
    def samples_per_slot(self):
        return int(round(self.sample_rate * self.slot_duration))

    @property
    def duration(self):
        return self.samples.size / self.sample_rate


def synthesize_waveform(slots, tx):
    """Expand each slot into ``tx.samples_per_slot`` samples at the LED level.

    ``slots`` is a :class:`SlotSequence` or a bare 0/1 array.
    """
    raw = slots.slots if isinstance(slots, SlotSequence) else check_bits(slots)
    if raw.size == 0:
        raise InvalidInputError("cannot synthesize an empty slot sequence")
    levels = np.where(raw == 1, tx.v_high, tx.v_low).astype(float)
    return AnalogWaveform(
        np.repeat(levels, tx.samples_per_slot),
        sample_rate=tx.sample_rate,
        slot_duration=1.0 / tx.slot_rate,
    )


def attenuation_gain(cfg, distance=None):
    """Power-law path gain ``(reference_distance / distance) ** exponent``."""
    d = cfg.distance if distance is None else distance
    d = np.asarray(d, dtype=float)
    if not (d > 0).all():
        raise InvalidInputError(f"distance must be positive, got {d!r}")
    gain = (cfg.reference_distance / d) ** cfg.attenuation_exponent
    return float(gain) if gain.ndim == 0 else gain


def lowpass(samples, cutoff, sample_rate):
    """Single-pole recursive low-pass with unit DC gain, starting from rest."""
    alpha = 1.0 - math.exp(-2.0 * math.pi * cutoff / sample_rate)
    return lfilter([alpha], [1.0, alpha - 1.0], samples)


def apply_channel(samples, gain, cfg, sample_rate, rng):
    """Scale, filter, offset and add noise to raw transmit samples.

    ``gain`` may be a scalar or a per-sample array, which lets time-varying
    distance schedules share one code path with static links.
    """
    received = np.asarray(gain, dtype=float) * samples
    if cfg.lpf_cutoff is not None:
        received = lowpass(received, cfg.lpf_cutoff, sample_rate)
    if cfg.noise_sigma0 > 0 or cfg.noise_sigma1 > 0:
        sigma = cfg.noise_sigma0 + cfg.noise_sigma1 * np.abs(received)
        received = received + sigma * rng.standard_normal(received.shape)
    return received + cfg.ambient


def propagate(w, cfg):
    """Send a waveform through the channel described by ``cfg``.

    The output is a deterministic function of ``(w, cfg)``: the noise stream
    is seeded from ``cfg.rng_seed``.
    """
    gain = attenuation_gain(cfg)
    rng = np.random.default_rng(cfg.rng_seed)
    out = apply_channel(w.samples, gain, cfg, w.sample_rate, rng)
    return AnalogWaveform(out, w.sample_rate, w.slot_duration)


def received_levels(tx, cfg, distance=None):
    """Noise-free received (low, high) voltages at a distance."""
    g = attenuation_gain(cfg, distance)
    return g * tx.v_low + cfg.ambient, g * tx.v_high + cfg.ambient
