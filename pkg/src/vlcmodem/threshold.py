"""Comparator threshold policies.

Three policies keep the comparator reference voltage in step with a changing
received level:

``fixed``
    A calibrated constant, as set by hand with a trimmer.
``slot_count``
    Feedback from the number of high slots seen in the last window. PPM puts
    a known number of high slots in every symbol, so too many high decisions
    means the threshold sits too low and too few means it sits too high. The
    threshold moves one ``step`` per window and takes effect on the next one.
``level_average``
    Feed-forward from the window's mean level. The mean is a known mixture of
    the high and low levels weighted by the scheme's slot ratio, which can be
    inverted to estimate the high level and place the threshold midway.

All state transitions are pure: every update returns a new
:class:`ThresholdState`.
"""

from dataclasses import dataclass, replace

import numpy as np

from .exceptions import ConfigurationError, InvalidInputError, MethodMismatchError
from .ppm import PPM2, ModulationScheme, expected_high_ratio
from .receiver import comparator, measure_window, slot_decide

FIXED = "fixed"
SLOT_COUNT = "slot_count"
LEVEL_AVERAGE = "level_average"
METHODS = (FIXED, SLOT_COUNT, LEVEL_AVERAGE)

_ALIASES = {
    "fixed": FIXED,
    "slot_count": SLOT_COUNT,
    "slotcount": SLOT_COUNT,
    "slot-count": SLOT_COUNT,
    "method1": SLOT_COUNT,
    "level_average": LEVEL_AVERAGE,
    "level-average": LEVEL_AVERAGE,
    "level-avg": LEVEL_AVERAGE,
    "level_avg": LEVEL_AVERAGE,
    "method2": LEVEL_AVERAGE,
}

DEFAULT_WINDOW_SYMBOLS = 64
DEFAULT_MARGIN = 0.1
DEFAULT_STEP_FRACTION = 0.01


def normalize_method(name):
    try:
        return _ALIASES[str(name).strip().lower()]
    except KeyError:
        raise ConfigurationError(f"unknown threshold method {name!r}") from None


@dataclass(frozen=True)
class ThresholdState:
    method: str
    theta: float
    step: float
    window_symbols: int
    theta_min: float
    theta_max: float
    margin: float
    scheme: ModulationScheme = PPM2

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigurationError(f"unknown threshold method {self.method!r}")
        if not self.theta_min <= self.theta_max:
            raise ConfigurationError(
                f"theta_min {self.theta_min} exceeds theta_max {self.theta_max}"
            )
        if not self.theta_min <= self.theta <= self.theta_max:
            raise ConfigurationError(
                f"theta {self.theta} outside [{self.theta_min}, {self.theta_max}]"
            )
        if self.method == SLOT_COUNT and not self.step > 0:
            raise ConfigurationError("slot_count control needs a positive step")
        if int(self.window_symbols) != self.window_symbols or self.window_symbols < 1:
            raise ConfigurationError("window_symbols must be a positive integer")
        if self.margin < 0:
            raise ConfigurationError("margin must be non-negative")


def init_threshold(
    method,
    scheme=PPM2,
    theta_min=0.0,
    theta_max=5.0,
    step=None,
    window_symbols=DEFAULT_WINDOW_SYMBOLS,
    margin=DEFAULT_MARGIN,
    theta_cal=None,
):
    """Create a controller state.

    Fixed mode starts (and stays) at ``theta_cal``. Adaptive modes start at
    the midpoint of ``[theta_min, theta_max]``. ``step`` defaults to 1% of
    the bound span.
    """
    method = normalize_method(method)
    theta_min = float(theta_min)
    theta_max = float(theta_max)
    if not theta_min <= theta_max:
        raise ConfigurationError(f"theta_min {theta_min} exceeds theta_max {theta_max}")
    if step is None:
        step = DEFAULT_STEP_FRACTION * (theta_max - theta_min)
    if method == FIXED:
        if theta_cal is None:
            raise ConfigurationError("fixed threshold needs a calibration value")
        theta = float(theta_cal)
    else:
        theta = 0.5 * (theta_min + theta_max)
    return ThresholdState(
        method=method,
        theta=theta,
        step=float(step),
        window_symbols=int(window_symbols),
        theta_min=theta_min,
        theta_max=theta_max,
        margin=float(margin),
        scheme=scheme,
    )


def _require(state, method):
    if state.method != method:
        raise MethodMismatchError(
            f"{method} update applied to a {state.method} controller"
        )


def expected_high_slots(scheme, window_symbols):
    """High slots a clean window of ``window_symbols`` symbols contains."""
    return window_symbols * scheme.order * expected_high_ratio(scheme)


def update_slot_count(state, observed_high_slots, window_symbols):
    _require(state, SLOT_COUNT)
    if window_symbols < 1:
        raise InvalidInputError("window_symbols must be at least 1")
    expected = expected_high_slots(state.scheme, window_symbols)
    if observed_high_slots > expected:
        theta = min(state.theta + state.step, state.theta_max)
    elif observed_high_slots < expected:
        theta = max(state.theta - state.step, state.theta_min)
    else:
        return state
    return replace(state, theta=theta)


def estimate_high_level(v_average, v_low_est, scheme):
    """Invert the slot-ratio mixture ``mean = r*V_A + (1-r)*V_B`` for ``V_A``."""
    r = float(expected_high_ratio(scheme))
    return (v_average - (1.0 - r) * v_low_est) / r


def update_level(state, est):
    _require(state, LEVEL_AVERAGE)
    v_high = estimate_high_level(est.v_average, est.v_low_est, state.scheme)
    target = 0.5 * (v_high + est.v_low_est)
    floor = min(max(state.theta_min, est.v_low_est + state.margin), state.theta_max)
    theta = min(max(target, floor), state.theta_max)
    return replace(state, theta=float(theta))


def current_threshold(state):
    return state.theta


def run_controller(samples, state, samples_per_slot):
    """Slice a received stream into adaptation windows and decide every slot.

    Fixed and slot-count controllers decide a window with the threshold they
    held when it arrived; slot-count then updates for the next window. The
    level-average controller updates from the window first and decides it
    with the fresh threshold. A trailing partial window (fewer symbols) is
    handled the same way.

    Returns ``(slots, thetas, final_state)`` where ``thetas[i]`` is the
    threshold applied to window ``i``.
    """
    x = np.asarray(samples, dtype=float)
    symbol_len = state.scheme.order * samples_per_slot
    if x.size % symbol_len:
        raise InvalidInputError(
            f"{x.size} samples do not hold whole symbols of {symbol_len} samples"
        )
    window_len = state.window_symbols * symbol_len
    slots = np.empty(x.size // samples_per_slot, dtype=np.uint8)
    thetas = []
    slot_pos = 0
    for start in range(0, x.size, window_len):
        window = x[start:start + window_len]
        n_symbols = window.size // symbol_len
        if state.method == LEVEL_AVERAGE:
            state = update_level(state, measure_window(window))
        decided = slot_decide(comparator(window, state.theta), samples_per_slot)
        thetas.append(state.theta)
        slots[slot_pos:slot_pos + decided.size] = decided
        slot_pos += decided.size
        if state.method == SLOT_COUNT:
            state = update_slot_count(state, int(decided.sum()), n_symbols)
    return slots, np.asarray(thetas), state
