"""Fast randomized invariant checks, runnable without pytest."""

import numpy as np

from .channel import ChannelConfig, TxConfig, attenuation_gain, propagate, synthesize_waveform
from .harness import build_config, run_point
from .ppm import ALL_SCHEMES, IPPM4, PPM4, decode_slots, encode_bits, expected_high_ratio
from .receiver import LevelEstimate, comparator, slot_decide
from .threshold import init_threshold, update_level, update_slot_count


def _random_bits(rng, scheme, max_symbols=64):
    n = int(rng.integers(1, max_symbols)) * scheme.bits_per_symbol
    return rng.integers(0, 2, n).astype(np.uint8)


def check_round_trip(rng, trials):
    for _ in range(trials):
        for scheme in ALL_SCHEMES:
            bits = _random_bits(rng, scheme)
            out, anomalies = decode_slots(encode_bits(bits, scheme))
            if not np.array_equal(out, bits) or anomalies.total:
                return False
    return True


def check_complement_duality(rng, trials):
    for _ in range(trials):
        bits = _random_bits(rng, PPM4)
        if not np.array_equal(encode_bits(bits, IPPM4).slots, 1 - encode_bits(bits, PPM4).slots):
            return False
    return True


def check_ratio_exactness(rng, trials):
    for _ in range(trials):
        for scheme in ALL_SCHEMES:
            slots = encode_bits(_random_bits(rng, scheme), scheme).slots
            if slots.sum() * expected_high_ratio(scheme).denominator != (
                slots.size * expected_high_ratio(scheme).numerator
            ):
                return False
    return True


def check_comparator_affine(rng, trials):
    for _ in range(trials):
        v = rng.normal(0.0, 1.0, 32)
        theta = float(rng.normal())
        alpha = float(rng.uniform(0.1, 10.0))
        beta = float(rng.normal(0.0, 3.0))
        # exact affine images keep the order relation; drop near-ties lost to rounding
        keep = np.abs(v - theta) > 1e-9
        lhs = comparator(alpha * v + beta, alpha * theta + beta)
        if not np.array_equal(lhs[keep], comparator(v, theta)[keep]):
            return False
    return True


def check_threshold_bounds(rng, trials):
    for _ in range(trials):
        lo = float(rng.uniform(-1, 1))
        hi = lo + float(rng.uniform(0, 5))
        sc = init_threshold("slot_count", PPM4, lo, hi, step=float(rng.uniform(0.01, 1)))
        la = init_threshold("level_average", PPM4, lo, hi, margin=float(rng.uniform(0, 1)))
        for _ in range(10):
            sc = update_slot_count(sc, int(rng.integers(0, 100)), 16)
            mean = float(rng.uniform(-5, 5))
            la = update_level(la, LevelEstimate(mean, mean - float(rng.uniform(0, 2)), 10))
            if not (lo <= sc.theta <= hi and lo <= la.theta <= hi):
                return False
    return True


def check_noiseless_link(rng, trials):
    for _ in range(trials):
        scheme = ALL_SCHEMES[int(rng.integers(0, 3))]
        tx = TxConfig(v_high=float(rng.uniform(0.5, 5)), samples_per_slot=int(rng.integers(1, 6)))
        cfg = ChannelConfig(distance=float(rng.uniform(1, 50)), ambient=float(rng.uniform(0, 1)))
        slots = encode_bits(_random_bits(rng, scheme), scheme)
        rx = propagate(synthesize_waveform(slots, tx), cfg)
        g = attenuation_gain(cfg)
        theta = cfg.ambient + g * float(rng.uniform(0.05, 0.95)) * tx.v_high
        decided = slot_decide(comparator(rx.samples, theta), tx.samples_per_slot)
        if not np.array_equal(decided, slots.slots):
            return False
    return True


def check_determinism(rng, trials):
    cfg = build_config(
        "4ppm", "level_average", bit_count=2000, distances=(20.0,),
        channel=ChannelConfig(noise_sigma0=0.01),
    )
    seed = int(rng.integers(0, 2**31))
    a = run_point(cfg, 20.0, seed)
    b = run_point(cfg, 20.0, seed)
    return a.ber == b.ber and np.array_equal(a.theta_trace, b.theta_trace)


CHECKS = {
    "ppm round trip": check_round_trip,
    "ppm/ippm complement duality": check_complement_duality,
    "high-slot ratio exactness": check_ratio_exactness,
    "comparator affine invariance": check_comparator_affine,
    "threshold bounds": check_threshold_bounds,
    "noiseless slot recovery": check_noiseless_link,
    "harness determinism": check_determinism,
}


def run_selftest(seed=0, trials=200):
    """Run every check; returns a list of ``(name, passed)`` pairs."""
    rng = np.random.default_rng(seed)
    return [(name, bool(check(rng, trials))) for name, check in CHECKS.items()]
