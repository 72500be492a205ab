"""Monte-Carlo link experiments: distance sweeps and distance-step transients.

Every point runs the full chain

    PRBS -> PPM encode -> LED waveform -> optical channel -> [ADC]
         -> comparator with adaptive threshold -> slot vote -> PPM decode

and is a pure function of its :class:`ExperimentConfig` and seed.
"""

import csv
import io
import math
import os
import tempfile
from bisect import bisect_right
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .channel import (
    ChannelConfig,
    TxConfig,
    apply_channel,
    attenuation_gain,
    propagate,
    received_levels,
    synthesize_waveform,
)
from .exceptions import ConfigurationError
from .metrics import bit_errors, measure_throughput, windowed_errors
from .ppm import PPM2, ModulationScheme, decode_slots, encode_bits
from .prbs import PRBS_TAPS, prbs_generate
from .receiver import AdcConfig, quantize
from .threshold import FIXED, ThresholdState, init_threshold, normalize_method, run_controller

SWEEP_COLUMNS = (
    "distance_cm",
    "method",
    "scheme",
    "ber",
    "throughput_bps",
    "zero_high",
    "multi_high",
    "theta_final",
)
TRANSIENT_COLUMNS = ("time_s", "distance_cm", "window_ber", "theta_v")


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment: link, receiver policy, traffic volume and seeds.

    ``tx.slot_rate`` is ignored; the slot rate follows from ``bit_rate`` and
    the scheme. The threshold template is re-bound to ``scheme``.
    """

    scheme: ModulationScheme = PPM2
    threshold: ThresholdState = None
    bit_count: int = 100_000
    bit_rate: float = 4000.0
    distances: tuple = (10.0,)
    channel: ChannelConfig = field(default_factory=ChannelConfig)
    tx: TxConfig = field(default_factory=TxConfig)
    prbs_order: int = 9
    base_seed: int = 0
    adc: AdcConfig | None = None

    def __post_init__(self):
        if int(self.bit_count) != self.bit_count or self.bit_count < 1:
            raise ConfigurationError("bit_count must be a positive integer")
        if not self.bit_rate > 0:
            raise ConfigurationError("bit_rate must be positive")
        distances = tuple(sorted(float(d) for d in self.distances))
        if not distances or distances[0] <= 0:
            raise ConfigurationError("distances must be a non-empty list of positive values")
        if self.prbs_order not in PRBS_TAPS:
            raise ConfigurationError(f"prbs_order must be one of {sorted(PRBS_TAPS)}")
        if self.threshold is None:
            raise ConfigurationError("a threshold template is required")
        object.__setattr__(self, "distances", distances)
        if self.threshold.scheme != self.scheme:
            object.__setattr__(self, "threshold", replace(self.threshold, scheme=self.scheme))
        object.__setattr__(self, "tx", replace(self.tx, slot_rate=self.slot_rate))

    @property
    def method(self):
        return self.threshold.method

    @property
    def symbol_rate(self):
        return self.bit_rate / self.scheme.bits_per_symbol

    @property
    def slot_rate(self):
        return self.symbol_rate * self.scheme.order

    @property
    def air_time(self):
        return self.bit_count / self.bit_rate

    @property
    def window_duration(self):
        return self.threshold.window_symbols / self.symbol_rate


@dataclass(frozen=True)
class PointResult:
    distance: float
    method: str
    scheme: str
    ber: float
    throughput: float
    zero_high: int
    multi_high: int
    theta_trace: np.ndarray = field(repr=False)
    window_ber: np.ndarray = field(repr=False)
    errors: int = 0
    bit_count: int = 0

    @property
    def theta_final(self):
        return float(self.theta_trace[-1])

    @property
    def correct_bits(self):
        return self.bit_count - self.errors


@dataclass(frozen=True)
class DistanceSchedule:
    """Piecewise-constant distance: ``(time_s, distance_cm)`` breakpoints."""

    breakpoints: tuple

    def __post_init__(self):
        points = tuple((float(t), float(d)) for t, d in self.breakpoints)
        if not points:
            raise ConfigurationError("schedule needs at least one breakpoint")
        if points[0][0] != 0.0:
            raise ConfigurationError("schedule must start at time 0")
        times = [t for t, _ in points]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ConfigurationError("schedule times must be strictly increasing")
        if any(d <= 0 for _, d in points):
            raise ConfigurationError("schedule distances must be positive")
        object.__setattr__(self, "breakpoints", points)

    @classmethod
    def parse(cls, text):
        """Parse ``"0:10,1.024:40"`` into breakpoints."""
        try:
            pairs = [item.split(":") for item in text.split(",") if item.strip()]
            return cls(tuple((float(t), float(d)) for t, d in pairs))
        except ValueError as exc:
            raise ConfigurationError(f"bad schedule {text!r}: {exc}") from None

    def distance_at(self, t):
        times = [bt for bt, _ in self.breakpoints]
        return self.breakpoints[max(bisect_right(times, t) - 1, 0)][1]

    def distances_at(self, times):
        starts = np.array([bt for bt, _ in self.breakpoints])
        dists = np.array([d for _, d in self.breakpoints])
        idx = np.searchsorted(starts, times, side="right") - 1
        return dists[np.clip(idx, 0, None)]


@dataclass(frozen=True)
class TransientRow:
    time_s: float
    distance_cm: float
    window_ber: float
    theta_v: float


@dataclass(frozen=True)
class TransientResult:
    rows: list
    ber: float
    throughput: float
    errors: int
    bit_count: int

    @property
    def correct_bits(self):
        return self.bit_count - self.errors

    @property
    def window_ber(self):
        return np.array([r.window_ber for r in self.rows])

    @property
    def theta_trace(self):
        return np.array([r.theta_v for r in self.rows])


def midpoint_threshold(tx, channel, distance):
    """Threshold halfway between the noise-free received levels at ``distance``."""
    low, high = received_levels(tx, channel, distance)
    return 0.5 * (low + high)


def build_config(
    scheme="2ppm",
    method="level_average",
    *,
    bit_count=100_000,
    bit_rate=4000.0,
    distances=(10.0,),
    tx=None,
    channel=None,
    fixed_threshold=None,
    calibrate_at=None,
    theta_bounds=None,
    step=None,
    window_symbols=64,
    margin=0.1,
    prbs_order=9,
    base_seed=0,
    adc_bits=None,
    adc_vref=None,
):
    """Assemble an :class:`ExperimentConfig` with sensible derived defaults.

    Threshold bounds default to ``[0, highest received level on the grid]``.
    A fixed threshold, when not given, is calibrated to the level midpoint at
    ``calibrate_at`` (default: nearest grid distance). The ADC full scale
    defaults to 1.25 times the upper threshold bound.
    """
    if not isinstance(scheme, ModulationScheme):
        scheme = ModulationScheme.parse(scheme)
    method = normalize_method(method)
    tx = tx or TxConfig()
    channel = channel or ChannelConfig()
    distances = tuple(sorted(float(d) for d in distances))
    if not distances or distances[0] <= 0:
        raise ConfigurationError("distances must be a non-empty list of positive values")
    if theta_bounds is None:
        _, top = received_levels(tx, channel, distances[0])
        theta_bounds = (0.0, top)
    theta_min, theta_max = theta_bounds
    theta_cal = None
    if method == FIXED:
        if fixed_threshold is None:
            where = distances[0] if calibrate_at is None else calibrate_at
            fixed_threshold = midpoint_threshold(tx, channel, where)
        theta_cal = float(fixed_threshold)
        theta_min = min(theta_min, theta_cal)
        theta_max = max(theta_max, theta_cal)
    threshold = init_threshold(
        method,
        scheme,
        theta_min=theta_min,
        theta_max=theta_max,
        step=step,
        window_symbols=window_symbols,
        margin=margin,
        theta_cal=theta_cal,
    )
    adc = None
    if adc_bits is not None:
        adc = AdcConfig(int(adc_bits), adc_vref if adc_vref is not None else 1.25 * theta_max)
    return ExperimentConfig(
        scheme=scheme,
        threshold=threshold,
        bit_count=int(bit_count),
        bit_rate=float(bit_rate),
        distances=distances,
        channel=channel,
        tx=tx,
        prbs_order=prbs_order,
        base_seed=int(base_seed),
        adc=adc,
    )


def _source_bits(cfg):
    """PRBS payload padded up to a whole number of symbols."""
    k = cfg.scheme.bits_per_symbol
    n = math.ceil(cfg.bit_count / k) * k
    return prbs_generate(cfg.prbs_order, None, n)


def _receive(cfg, bits, rx_samples):
    samples = quantize(rx_samples, cfg.adc)
    slots, thetas, _ = run_controller(samples, cfg.threshold, cfg.tx.samples_per_slot)
    rx_bits, anomalies = decode_slots(slots, cfg.scheme)
    tx_bits = bits[:cfg.bit_count]
    rx_bits = rx_bits[:cfg.bit_count]
    errors = bit_errors(tx_bits, rx_bits)
    window_bits = cfg.threshold.window_symbols * cfg.scheme.bits_per_symbol
    werr, wsize = windowed_errors(tx_bits, rx_bits, window_bits)
    # payload padding can leave a final window with no counted bits
    thetas = thetas[:werr.size]
    return errors, werr / wsize, thetas, anomalies


def run_point(cfg, distance, seed=None):
    """Simulate ``cfg.bit_count`` bits at one distance.

    The channel noise seed defaults to ``cfg.base_seed``; sweeps pass
    ``base_seed + point_index``.
    """
    seed = cfg.base_seed if seed is None else seed
    bits = _source_bits(cfg)
    wave = synthesize_waveform(encode_bits(bits, cfg.scheme), cfg.tx)
    chan = replace(cfg.channel, distance=float(distance), rng_seed=int(seed))
    rx = propagate(wave, chan)
    errors, window_ber, thetas, anomalies = _receive(cfg, bits, rx.samples)
    return PointResult(
        distance=float(distance),
        method=cfg.method,
        scheme=cfg.scheme.name,
        ber=errors / cfg.bit_count,
        throughput=measure_throughput(cfg.bit_count - errors, cfg.air_time),
        zero_high=anomalies.zero_high_count,
        multi_high=anomalies.multi_high_count,
        theta_trace=thetas,
        window_ber=window_ber,
        errors=errors,
        bit_count=cfg.bit_count,
    )


def run_sweep(cfg, n_jobs=1):
    """Run every grid distance; point ``i`` uses seed ``base_seed + i``."""
    jobs = [(d, cfg.base_seed + i) for i, d in enumerate(cfg.distances)]
    if n_jobs == 1:
        return [run_point(cfg, d, s) for d, s in jobs]
    with ThreadPoolExecutor(max_workers=n_jobs) as pool:
        return list(pool.map(lambda job: run_point(cfg, *job), jobs))


def run_transient(cfg, schedule):
    """Stream ``cfg.bit_count`` bits while the distance follows ``schedule``.

    Emits one row per adaptation window, stamped with the window start time
    and the distance in force at that instant.
    """
    bits = _source_bits(cfg)
    wave = synthesize_waveform(encode_bits(bits, cfg.scheme), cfg.tx)
    t = np.arange(wave.samples.size) / wave.sample_rate
    gain = attenuation_gain(cfg.channel, schedule.distances_at(t))
    rng = np.random.default_rng(cfg.base_seed)
    rx = apply_channel(wave.samples, gain, cfg.channel, wave.sample_rate, rng)
    errors, window_ber, thetas, _ = _receive(cfg, bits, rx)
    rows = []
    for i, (wb, th) in enumerate(zip(window_ber, thetas)):
        start = i * cfg.window_duration
        rows.append(TransientRow(start, schedule.distance_at(start), float(wb), float(th)))
    return TransientResult(
        rows=rows,
        ber=errors / cfg.bit_count,
        throughput=measure_throughput(cfg.bit_count - errors, cfg.air_time),
        errors=errors,
        bit_count=cfg.bit_count,
    )


def _fmt(x):
    return repr(float(x))


def format_sweep_csv(results):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    for r in results:
        writer.writerow([
            _fmt(r.distance), r.method, r.scheme, _fmt(r.ber), _fmt(r.throughput),
            r.zero_high, r.multi_high, _fmt(r.theta_final),
        ])
    return buf.getvalue()


def format_transient_csv(result):
    rows = result.rows if isinstance(result, TransientResult) else result
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TRANSIENT_COLUMNS)
    for r in rows:
        writer.writerow([_fmt(r.time_s), _fmt(r.distance_cm), _fmt(r.window_ber), _fmt(r.theta_v)])
    return buf.getvalue()


def write_text_atomic(path, text):
    """Write via a temp file in the target directory, then rename over ``path``."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", suffix=".csv", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
