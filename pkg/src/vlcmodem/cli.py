"""Command line entry point: ``vlcmodem {sweep,transient,selftest}``.

Exit status is 0 on success, 1 on a usage error and 2 on a runtime failure.
"""

import argparse
import os
import sys
from dataclasses import dataclass, field

from .channel import ChannelConfig, TxConfig
from .exceptions import ConfigurationError
from .harness import (
    DistanceSchedule,
    build_config,
    format_sweep_csv,
    format_transient_csv,
    run_sweep,
    run_transient,
    write_text_atomic,
)
from .ppm import ModulationScheme
from .selftest import run_selftest

SEED_ENV = "VLC_MODEM_SEED"
SUBCOMMANDS = ("sweep", "transient", "selftest")
METHOD_CHOICES = {"fixed": "fixed", "slot-count": "slot_count", "level-avg": "level_average"}
DEFAULT_OUT = {"sweep": "sweep.csv", "transient": "transient.csv", "selftest": None}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}\n{self.format_usage()}")


@dataclass
class CliInvocation:
    subcommand: str
    config_path: str | None
    overrides: dict
    output_path: str | None
    options: argparse.Namespace = field(repr=False)


def _modulation(text):
    try:
        return ModulationScheme.parse(text)
    except ConfigurationError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _distances(text):
    """``a:b:step`` (inclusive, cm) or a single distance."""
    try:
        parts = [float(p) for p in text.split(":")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad distance range {text!r}") from None
    if len(parts) == 1:
        values = parts
    elif len(parts) == 3:
        start, end, step = parts
        if step <= 0 or end < start:
            raise argparse.ArgumentTypeError(f"bad distance range {text!r}")
        n = int((end - start) / step + 1e-9) + 1
        values = [round(start + i * step, 10) for i in range(n)]
    else:
        raise argparse.ArgumentTypeError(f"distance range must be a:b:step, got {text!r}")
    if min(values) <= 0:
        raise argparse.ArgumentTypeError("distances must be positive")
    return tuple(values)


def _optional(convert, off="off"):
    def parse(text):
        if str(text).lower() in (off, "none"):
            return None
        try:
            return convert(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid value {text!r}") from None
    parse.__name__ = convert.__name__
    return parse


def _nonneg(convert):
    def parse(text):
        try:
            value = convert(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid value {text!r}") from None
        if value < 0:
            raise argparse.ArgumentTypeError(f"value must be non-negative, got {text!r}")
        return value
    parse.__name__ = convert.__name__
    return parse


def _positive(convert):
    def parse(text):
        value = _nonneg(convert)(text)
        if value == 0:
            raise argparse.ArgumentTypeError(f"value must be positive, got {text!r}")
        return value
    parse.__name__ = convert.__name__
    return parse


def _adc_bits(text):
    bits = _optional(int)(text)
    if bits is not None and not 4 <= bits <= 16:
        raise argparse.ArgumentTypeError("ADC resolution must be 4..16 bits")
    return bits


def _schedule(text):
    try:
        return DistanceSchedule.parse(text)
    except ConfigurationError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _common_flags():
    p = _Parser(add_help=False)
    g = p.add_argument_group("link and receiver options")
    g.add_argument("--modulation", type=_modulation, default="2ppm",
                   help="2ppm, 4ppm or 4ippm (default: %(default)s)")
    g.add_argument("--method", choices=sorted(METHOD_CHOICES), default="level-avg",
                   help="threshold policy (default: %(default)s)")
    g.add_argument("--fixed-threshold", type=_optional(float, "auto"), default="auto",
                   help="fixed threshold in V; auto = level midpoint at the nearest "
                        "distance (default: %(default)s)")
    g.add_argument("--dist", type=_distances, default="10:90:10",
                   help="distance grid a:b:step in cm, inclusive (default: %(default)s)")
    g.add_argument("--bits", type=_positive(int), default=100_000,
                   help="payload bits per point (default: %(default)s)")
    g.add_argument("--rate", type=_positive(float), default=4000.0,
                   help="bit rate in bit/s (default: %(default)s)")
    g.add_argument("--spp", type=_positive(int), default=5,
                   help="samples per slot (default: %(default)s)")
    g.add_argument("--sigma0", type=_nonneg(float), default=0.001,
                   help="signal-independent noise std in V (default: %(default)s)")
    g.add_argument("--sigma1", type=_nonneg(float), default=0.1,
                   help="signal-proportional noise coefficient (default: %(default)s)")
    g.add_argument("--ambient", type=float, default=0.0,
                   help="ambient light DC offset in V (default: %(default)s)")
    g.add_argument("--tx-amplitude", type=_positive(float), default=4.0,
                   help="LED-on level in V at the reference distance (default: %(default)s)")
    g.add_argument("--tx-low", type=_nonneg(float), default=0.4,
                   help="LED-off level in V at the reference distance (default: %(default)s)")
    g.add_argument("--ref-dist", type=_positive(float), default=10.0,
                   help="reference distance in cm for the amplitudes (default: %(default)s)")
    g.add_argument("--atten-exp", type=_positive(float), default=2.0,
                   help="path-loss exponent (default: %(default)s)")
    g.add_argument("--lpf", type=_optional(_positive(float)), default="off",
                   help="receiver low-pass cutoff in Hz, or off (default: %(default)s)")
    g.add_argument("--adc-bits", type=_adc_bits, default="off",
                   help="ADC resolution 4..16, or off for ideal sampling (default: %(default)s)")
    g.add_argument("--step", type=_optional(_positive(float), "auto"), default="auto",
                   help="slot-count threshold step in V; auto = 1%% of the threshold "
                        "range (default: %(default)s)")
    g.add_argument("--window", type=_positive(int), default=64,
                   help="adaptation window in symbols (default: %(default)s)")
    g.add_argument("--margin", type=_nonneg(float), default=0.005,
                   help="level-average floor above the low level in V (default: %(default)s)")
    g.add_argument("--seed", type=int, default=0,
                   help=f"base RNG seed; ${SEED_ENV} overrides it when set (default: %(default)s)")
    g.add_argument("--config", default=None,
                   help="key=value file of flag defaults; flags win (default: none)")
    g.add_argument("--out", default=None,
                   help="CSV output path (default: sweep.csv or transient.csv)")
    return p


def build_parser():
    common = _common_flags()
    parser = _Parser(prog="vlcmodem", description="PPM visible-light link simulator.")
    sub = parser.add_subparsers(dest="subcommand", metavar="{sweep,transient,selftest}")
    sub.required = True
    sub.add_parser("sweep", parents=[common], help="BER/throughput against distance")
    tr = sub.add_parser("transient", parents=[common], help="distance step during one stream")
    tr.add_argument("--schedule", type=_schedule, default="0:10,1.024:40",
                    help="time_s:distance_cm breakpoints (default: %(default)s)")
    sub.add_parser("selftest", parents=[common], help="run the invariant self-checks")
    return parser


def _read_config(path):
    values = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path!r}: {exc}") from None
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"{path}:{n}: expected key=value")
        values[key.strip().lstrip("-").replace("-", "_")] = value.strip()
    return values


def _find_flag(argv, flag):
    for i, arg in enumerate(argv):
        if arg == flag and i + 1 < len(argv):
            return argv[i + 1]
        if arg.startswith(flag + "="):
            return arg.split("=", 1)[1]
    return None


def parse_args(argv):
    """Turn argv into a :class:`CliInvocation`; raises :class:`UsageError`."""
    argv = list(argv)
    parser = build_parser()
    config_path = _find_flag(argv, "--config")
    if config_path is not None and argv and argv[0] in SUBCOMMANDS:
        file_values = _read_config(config_path)
        sub = parser._subparsers._group_actions[0].choices[argv[0]]
        known = {a.dest for a in sub._actions}
        unknown = sorted(set(file_values) - known - {"config", "help"})
        if unknown:
            raise UsageError(f"{config_path}: unknown keys {', '.join(unknown)}")
        # string defaults pass through each flag's type converter
        sub.set_defaults(**file_values)
    opts = parser.parse_args(argv)
    defaults = vars(parser.parse_args([opts.subcommand]))
    overrides = {k: v for k, v in vars(opts).items() if v != defaults.get(k)}
    env_seed = os.environ.get(SEED_ENV)
    if env_seed is not None:
        try:
            opts.seed = int(env_seed)
        except ValueError:
            raise UsageError(f"${SEED_ENV} must be an integer, got {env_seed!r}") from None
    out = opts.out if opts.out is not None else DEFAULT_OUT[opts.subcommand]
    return CliInvocation(opts.subcommand, config_path, overrides, out, opts)


def _experiment(opts):
    tx = TxConfig(v_high=opts.tx_amplitude, v_low=opts.tx_low, samples_per_slot=opts.spp)
    channel = ChannelConfig(
        reference_distance=opts.ref_dist,
        attenuation_exponent=opts.atten_exp,
        ambient=opts.ambient,
        noise_sigma0=opts.sigma0,
        noise_sigma1=opts.sigma1,
        lpf_cutoff=opts.lpf,
    )
    distances = opts.dist
    if opts.subcommand == "transient":
        distances = tuple(d for _, d in opts.schedule.breakpoints)
    return build_config(
        opts.modulation,
        METHOD_CHOICES[opts.method],
        bit_count=opts.bits,
        bit_rate=opts.rate,
        distances=distances,
        tx=tx,
        channel=channel,
        fixed_threshold=opts.fixed_threshold,
        step=opts.step,
        window_symbols=opts.window,
        margin=opts.margin,
        base_seed=opts.seed,
        adc_bits=opts.adc_bits,
    )


def execute(inv):
    opts = inv.options
    if inv.subcommand == "selftest":
        results = run_selftest(seed=opts.seed)
        for name, ok in results:
            print(f"{'PASS' if ok else 'FAIL'}  {name}")
        return 0 if all(ok for _, ok in results) else 2
    try:
        cfg = _experiment(opts)
    except ConfigurationError as exc:
        print(f"vlcmodem: error: {exc}", file=sys.stderr)
        return 1
    try:
        if inv.subcommand == "sweep":
            results = run_sweep(cfg)
            for r in results:
                print(f"{r.distance:8.2f} cm  {r.method:<13} {r.scheme:<5} "
                      f"ber={r.ber:.3e}  throughput={r.throughput:.1f} bps  "
                      f"theta={r.theta_final:.4g} V")
            text = format_sweep_csv(results)
        else:
            result = run_transient(cfg, opts.schedule)
            print(f"{len(result.rows)} windows  ber={result.ber:.3e}  "
                  f"throughput={result.throughput:.1f} bps")
            text = format_transient_csv(result)
        write_text_atomic(inv.output_path, text)
    except Exception as exc:  # any failure past validation is a runtime failure
        print(f"vlcmodem: runtime failure: {exc}", file=sys.stderr)
        return 2
    return 0


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    try:
        inv = parse_args(argv)
    except UsageError as exc:
        print(str(exc).rstrip(), file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    return execute(inv)


if __name__ == "__main__":
    sys.exit(main())
