"""Link quality figures: bit error rate and correct-bit throughput."""

import numpy as np

from ._validation import check_bits
from .exceptions import InvalidInputError


def bit_errors(tx_bits, rx_bits):
    tx = check_bits(tx_bits)
    rx = check_bits(rx_bits)
    if tx.size != rx.size:
        raise InvalidInputError(f"length mismatch: {tx.size} vs {rx.size} bits")
    return int(np.count_nonzero(tx != rx))


def measure_ber(tx_bits, rx_bits):
    """Hamming distance divided by stream length."""
    n = np.asarray(tx_bits).size
    errors = bit_errors(tx_bits, rx_bits)
    if n == 0:
        raise InvalidInputError("cannot measure BER of an empty stream")
    return errors / n


def measure_throughput(correct_bits, elapsed):
    """Correct bits per second of air time."""
    if not elapsed > 0:
        raise InvalidInputError(f"elapsed time must be positive, got {elapsed!r}")
    return correct_bits / elapsed


def windowed_errors(tx_bits, rx_bits, window_bits):
    """Error count per consecutive window of ``window_bits`` bits.

    The last window may be shorter. Returns ``(errors, sizes)``.
    """
    diff = check_bits(tx_bits) != check_bits(rx_bits)
    edges = np.arange(0, diff.size, window_bits)
    errors = np.add.reduceat(diff.astype(np.int64), edges) if diff.size else np.zeros(0, int)
    sizes = np.diff(np.append(edges, diff.size))
    return errors, sizes
