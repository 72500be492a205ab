"""Visible-light PPM link simulator with self-adjusting comparator thresholds."""

from .channel import (
    AnalogWaveform,
    ChannelConfig,
    TxConfig,
    attenuation_gain,
    propagate,
    synthesize_waveform,
)
from .exceptions import ConfigurationError, InvalidInputError, MethodMismatchError
from .harness import (
    DistanceSchedule,
    ExperimentConfig,
    PointResult,
    build_config,
    run_point,
    run_sweep,
    run_transient,
)
from .metrics import measure_ber, measure_throughput
from .ppm import (
    IPPM4,
    PPM2,
    PPM4,
    ModulationScheme,
    SlotSequence,
    SymbolAnomalies,
    decode_slots,
    encode_bits,
    expected_high_ratio,
)
from .prbs import prbs_generate
from .receiver import AdcConfig, LevelEstimate, comparator, measure_window, quantize, slot_decide
from .threshold import (
    ThresholdState,
    current_threshold,
    init_threshold,
    update_level,
    update_slot_count,
)

__version__ = "0.1.0"
