"""Comparator front end: slot decisions and window level statistics."""

from dataclasses import dataclass

import numpy as np

from ._validation import check_multiple, check_samples
from .exceptions import ConfigurationError

LOW_PERCENTILE = 10.0


@dataclass(frozen=True)
class LevelEstimate:
    v_average: float
    v_low_est: float
    window_samples: int


@dataclass(frozen=True)
class AdcConfig:
    """Uniform converter with ``2**bits`` levels spanning ``[0, v_ref]``."""

    bits: int = 12
    v_ref: float = 5.0

    def __post_init__(self):
        if int(self.bits) != self.bits or not 1 <= self.bits <= 16:
            raise ConfigurationError(f"ADC resolution must be 1..16 bits, got {self.bits!r}")
        if not self.v_ref > 0:
            raise ConfigurationError("v_ref must be positive")

    @property
    def lsb(self):
        return self.v_ref / (2 ** self.bits - 1)


def comparator(samples, threshold):
    """High (1) where a sample strictly exceeds ``threshold``, else low (0)."""
    return (np.asarray(samples, dtype=float) > threshold).astype(np.uint8)


def slot_decide(binary_samples, samples_per_slot):
    """Majority vote over each slot's samples; ties go low."""
    b = np.asarray(binary_samples, dtype=np.int64)
    check_multiple(b.size, samples_per_slot, "sample sequence")
    votes = b.reshape(-1, samples_per_slot).sum(axis=1)
    return (2 * votes > samples_per_slot).astype(np.uint8)


def measure_window(samples):
    """Mean level and a low-level proxy (10th percentile) over one window."""
    x = check_samples(samples)
    mean = float(x.mean())
    low = float(np.percentile(x, LOW_PERCENTILE))
    # percentile interpolation can land a rounding hair above the mean on constant input
    return LevelEstimate(mean, min(low, mean), int(x.size))


def quantize(samples, adc=None):
    """Clamp to ``[0, v_ref]`` and round half-up to the nearest ADC code."""
    x = np.asarray(samples, dtype=float)
    if adc is None:
        return x
    codes = np.floor(np.clip(x, 0.0, adc.v_ref) / adc.lsb + 0.5)
    codes = np.minimum(codes, 2 ** adc.bits - 1)
    return codes * adc.lsb
