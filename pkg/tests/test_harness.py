import csv
import io
from dataclasses import replace

import numpy as np
import pytest

from vlcmodem.channel import ChannelConfig, TxConfig
from vlcmodem.exceptions import ConfigurationError
from vlcmodem.harness import (
    SWEEP_COLUMNS,
    TRANSIENT_COLUMNS,
    DistanceSchedule,
    build_config,
    format_sweep_csv,
    format_transient_csv,
    midpoint_threshold,
    run_point,
    run_sweep,
    run_transient,
    write_text_atomic,
)
from vlcmodem.ppm import PPM4
from vlcmodem.prbs import prbs_generate

NOISY = ChannelConfig(reference_distance=10.0, noise_sigma0=0.01)


def test_slot_timing_from_bit_rate():
    cfg = build_config("2ppm", "fixed", bit_rate=4000, fixed_threshold=0.5)
    assert cfg.slot_rate == 8000
    assert cfg.tx.slot_rate == 8000
    assert 1 / cfg.slot_rate == pytest.approx(125e-6)
    assert cfg.air_time == pytest.approx(25.0)
    cfg4 = build_config("4ppm", "fixed", bit_rate=4000, fixed_threshold=0.5)
    assert cfg4.symbol_rate == 2000 and cfg4.slot_rate == 8000


def test_build_config_calibrates_fixed_threshold():
    tx = TxConfig(v_high=4.0, v_low=0.4)
    ch = ChannelConfig(reference_distance=10.0)
    cfg = build_config("2ppm", "fixed", distances=(10, 90), tx=tx, channel=ch, calibrate_at=90)
    assert cfg.threshold.theta == pytest.approx(midpoint_threshold(tx, ch, 90))
    assert cfg.threshold.theta == pytest.approx(2.2 / 81)
    near = build_config("2ppm", "fixed", distances=(10, 90), tx=tx, channel=ch)
    assert near.threshold.theta == pytest.approx(2.2)


def test_config_rebinds_threshold_scheme():
    cfg = build_config("2ppm", "slot_count")
    cfg4 = replace(cfg, scheme=PPM4)
    assert cfg4.threshold.scheme == PPM4


@pytest.mark.parametrize(
    "kwargs",
    [dict(bit_count=0), dict(bit_rate=0.0), dict(distances=()), dict(distances=(-1.0,))],
)
def test_config_validation(kwargs):
    with pytest.raises(ConfigurationError):
        build_config("2ppm", "level_average", **kwargs)


@pytest.mark.parametrize("scheme", ["2ppm", "4ppm", "4ippm"])
def test_noiseless_adaptive_is_perfect(scheme):
    ch = ChannelConfig(reference_distance=1.0)
    cfg = build_config(scheme, "level_average", bit_count=4000, distances=(1, 7, 33), channel=ch, margin=0.0)
    for r in run_sweep(cfg):
        assert r.ber == 0.0
        assert r.zero_high == r.multi_high == 0
        assert r.throughput == pytest.approx(4000.0)


def test_far_point_with_near_fixed_threshold_decodes_as_fallback():
    # analytic: every 2-PPM symbol arrives all-low and decodes as 0 against a balanced PRBS
    ch = ChannelConfig(reference_distance=1.0, noise_sigma0=1e-4)
    cfg = build_config("2ppm", "fixed", bit_count=100_000, distances=(1, 10), channel=ch)
    r = run_point(cfg, 10.0)
    assert r.zero_high == r.bit_count
    ones = prbs_generate(9, None, 100_000).mean()
    assert r.ber == pytest.approx(ones, abs=1e-12)
    assert abs(r.ber - 0.5) <= 0.01


def test_sweep_single_distance_matches_point():
    cfg = build_config("4ppm", "slot_count", bit_count=3000, distances=(25.0,), channel=NOISY)
    [row] = run_sweep(cfg)
    point = run_point(cfg, 25.0)
    assert (row.ber, row.zero_high, row.multi_high) == (point.ber, point.zero_high, point.multi_high)
    assert np.array_equal(row.theta_trace, point.theta_trace)
    assert format_sweep_csv([row]) == format_sweep_csv([point])


def test_sweep_uses_derived_seeds_and_sorted_distances():
    cfg = build_config("2ppm", "level_average", bit_count=2000, distances=(30, 10, 20), channel=NOISY, base_seed=40)
    rows = run_sweep(cfg)
    assert [r.distance for r in rows] == [10.0, 20.0, 30.0]
    again = run_point(cfg, 20.0, seed=41)
    assert np.array_equal(rows[1].theta_trace, again.theta_trace)


def test_sweep_parallel_matches_serial():
    cfg = build_config("4ippm", "level_average", bit_count=2000, distances=(10, 40, 70), channel=NOISY)
    serial = format_sweep_csv(run_sweep(cfg))
    assert format_sweep_csv(run_sweep(cfg, n_jobs=3)) == serial


def test_sweep_csv_is_deterministic():
    cfg = build_config("2ppm", "slot_count", bit_count=2000, distances=(10, 50), channel=NOISY)
    text = format_sweep_csv(run_sweep(cfg))
    assert text == format_sweep_csv(run_sweep(cfg))
    rows = list(csv.reader(io.StringIO(text)))
    assert tuple(rows[0]) == SWEEP_COLUMNS
    assert len(rows) == 3
    assert rows[1][1] == "slot_count" and rows[1][2] == "2ppm"


def test_fixed_threshold_ber_monotone_beyond_margin():
    # fixed threshold, sigma0 > 0: past the point where the high level sinks below theta + 3 sigma
    sigma = 0.005
    ch = ChannelConfig(reference_distance=10.0, noise_sigma0=sigma)
    tx = TxConfig(v_high=1.0)
    grid = tuple(range(10, 31, 2))
    cfg = build_config("2ppm", "fixed", bit_count=20_000, distances=grid, channel=ch, tx=tx, calibrate_at=12)
    theta = cfg.threshold.theta
    rows = run_sweep(cfg)
    start = next(i for i, d in enumerate(grid) if (10 / d) ** 2 * 1.0 < theta + 3 * sigma)
    bers = [r.ber for r in rows[start:]]
    assert all(b2 >= b1 for b1, b2 in zip(bers, bers[1:]))


def test_schedule_validation_and_lookup():
    s = DistanceSchedule.parse("0:10,1.5:40,2:20")
    assert s.distance_at(0.0) == 10 and s.distance_at(1.5) == 40 and s.distance_at(9) == 20
    assert s.distances_at(np.array([0.1, 1.6, 2.0])).tolist() == [10, 40, 20]
    for bad in ("1:10", "0:10,0:20", "0:-5", "0-10"):
        with pytest.raises(ConfigurationError):
            DistanceSchedule.parse(bad)


def test_static_transient_equals_point_windows():
    cfg = build_config("2ppm", "slot_count", bit_count=6400, distances=(30,), channel=NOISY, base_seed=3)
    tr = run_transient(cfg, DistanceSchedule(((0, 30),)))
    point = run_point(cfg, 30.0)
    assert np.array_equal(tr.window_ber, point.window_ber)
    assert np.array_equal(tr.theta_trace, point.theta_trace)
    assert tr.ber == point.ber
    assert [r.time_s for r in tr.rows[:3]] == pytest.approx([0.0, 0.016, 0.032])


def test_transient_csv(tmp_path):
    cfg = build_config("2ppm", "level_average", bit_count=1280, distances=(10, 40), channel=NOISY)
    tr = run_transient(cfg, DistanceSchedule(((0, 10), (0.16, 40))))
    text = format_transient_csv(tr)
    rows = list(csv.reader(io.StringIO(text)))
    assert tuple(rows[0]) == TRANSIENT_COLUMNS
    assert len(rows) == 1 + 20
    assert float(rows[-1][1]) == 40.0
    path = tmp_path / "t.csv"
    write_text_atomic(str(path), text)
    assert path.read_text(encoding="utf-8") == text
    assert [p.name for p in tmp_path.iterdir()] == ["t.csv"]


def test_adc_in_the_loop():
    ch = ChannelConfig(reference_distance=10.0, noise_sigma0=0.002)
    cfg = build_config("4ppm", "level_average", bit_count=4000, distances=(10, 30), channel=ch,
                       tx=TxConfig(v_high=1.0), adc_bits=10, margin=0.005)
    assert cfg.adc.bits == 10 and cfg.adc.v_ref == pytest.approx(1.25)
    assert all(r.ber == 0 for r in run_sweep(cfg))
