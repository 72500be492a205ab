"""Maximal-length PRBS test patterns from a Fibonacci LFSR."""

import numpy as np

from .exceptions import InvalidInputError

# degree -> (a, b) for the feedback polynomial x^a + x^b + 1
PRBS_TAPS = {
    7: (7, 6),
    9: (9, 5),
    15: (15, 14),
}


def prbs_period(order):
    return (1 << order) - 1


def prbs_generate(order, seed=None, nbits=None):
    """Return ``nbits`` PRBS bits as a ``uint8`` array.

    The register holds the most recent outputs, newest in bit 0; each step
    emits ``reg[a-1] XOR reg[b-1]`` and shifts it in. ``seed`` defaults to
    all ones and must be non-zero after masking to ``order`` bits.
    """
    try:
        a, b = PRBS_TAPS[order]
    except KeyError:
        raise InvalidInputError(
            f"PRBS order must be one of {sorted(PRBS_TAPS)}, got {order!r}"
        ) from None
    mask = (1 << order) - 1
    state = mask if seed is None else int(seed) & mask
    if state == 0:
        raise InvalidInputError("PRBS seed must be non-zero")
    if nbits is None:
        nbits = prbs_period(order)
    if nbits < 0:
        raise InvalidInputError("nbits must be non-negative")
    n = min(nbits, prbs_period(order))
    out = np.empty(n, dtype=np.uint8)
    for i in range(n):
        bit = ((state >> (a - 1)) ^ (state >> (b - 1))) & 1
        state = ((state << 1) | bit) & mask
        out[i] = bit
    # the register returns to its seed after one period, so longer runs repeat
    return np.resize(out, nbits) if nbits > n else out
