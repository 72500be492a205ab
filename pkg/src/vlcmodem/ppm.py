"""Pulse position modulation (PPM) and inversed PPM (IPPM) slot coding.

A symbol of ``log2(order)`` bits is read most-significant bit first as an
unsigned integer; that integer is the index of the single high slot in the
symbol. IPPM emits the slot-wise complement, so each symbol carries one dark
slot instead of one lit slot.
"""

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ._validation import check_bits, check_multiple
from .exceptions import ConfigurationError, InvalidInputError

SUPPORTED_ORDERS = (2, 4)

HIGH = 1
LOW = 0


@dataclass(frozen=True)
class ModulationScheme:
    """Slots per symbol plus the inversion flag.

    2-IPPM is identical to 2-PPM, so ``ModulationScheme(2, inverted=True)``
    is normalized to the non-inverted form.
    """

    order: int = 2
    inverted: bool = False

    def __post_init__(self):
        if self.order not in SUPPORTED_ORDERS:
            raise ConfigurationError(
                f"PPM order must be one of {SUPPORTED_ORDERS}, got {self.order!r}"
            )
        if self.order == 2 and self.inverted:
            object.__setattr__(self, "inverted", False)

    @property
    def bits_per_symbol(self):
        return int(self.order).bit_length() - 1

    @property
    def name(self):
        return f"{self.order}{'ippm' if self.inverted else 'ppm'}"

    @classmethod
    def parse(cls, text):
        """Build a scheme from names like ``"2ppm"``, ``"4-PPM"`` or ``"4ippm"``."""
        key = str(text).strip().lower().replace("-", "").replace("_", "")
        table = {
            "2ppm": cls(2),
            "2ippm": cls(2),
            "4ppm": cls(4),
            "4ippm": cls(4, inverted=True),
        }
        try:
            return table[key]
        except KeyError:
            raise ConfigurationError(f"unknown modulation {text!r}") from None

    def __str__(self):
        return self.name


PPM2 = ModulationScheme(2)
PPM4 = ModulationScheme(4)
IPPM4 = ModulationScheme(4, inverted=True)
ALL_SCHEMES = (PPM2, PPM4, IPPM4)


@dataclass(frozen=True)
class SlotSequence:
    slots: np.ndarray = field(repr=False)
    scheme: ModulationScheme

    def __post_init__(self):
        slots = check_bits(self.slots)
        check_multiple(slots.size, self.scheme.order, "slot sequence")
        object.__setattr__(self, "slots", slots)

    def __len__(self):
        return self.slots.size

    @property
    def n_symbols(self):
        return self.slots.size // self.scheme.order


@dataclass(frozen=True)
class SymbolAnomalies:
    zero_high_count: int = 0
    multi_high_count: int = 0
    total_symbols: int = 0

    @property
    def total(self):
        return self.zero_high_count + self.multi_high_count

    def __add__(self, other):
        return SymbolAnomalies(
            self.zero_high_count + other.zero_high_count,
            self.multi_high_count + other.multi_high_count,
            self.total_symbols + other.total_symbols,
        )


def _bit_weights(k):
    return 1 << np.arange(k - 1, -1, -1)


def encode_bits(bits, scheme):
    """Map a bit stream onto PPM/IPPM slots.

    Raises :class:`InvalidInputError` when the bit count is not a whole number
    of symbols.
    """
    bits = check_bits(bits)
    k = scheme.bits_per_symbol
    if bits.size % k:
        raise InvalidInputError(
            f"{bits.size} bits do not fill whole {scheme.name} symbols of {k} bits"
        )
    values = bits.reshape(-1, k) @ _bit_weights(k)
    slots = np.zeros((values.size, scheme.order), dtype=np.uint8)
    slots[np.arange(values.size), values] = HIGH
    if scheme.inverted:
        slots ^= 1
    return SlotSequence(slots.ravel(), scheme)


def decode_slots(slots, scheme=None):
    """Recover bits from slot decisions.

    Accepts a :class:`SlotSequence`, or a raw 0/1 array together with
    ``scheme``. Symbols with no high slot decode as symbol 0; symbols with
    several high slots decode as the lowest high index. Both cases are counted
    in the returned :class:`SymbolAnomalies`.
    """
    if isinstance(slots, SlotSequence):
        scheme = slots.scheme
        raw = slots.slots
    else:
        if scheme is None:
            raise InvalidInputError("a scheme is required to decode raw slots")
        raw = check_bits(slots)
        check_multiple(raw.size, scheme.order, "slot sequence")
    groups = raw.reshape(-1, scheme.order)
    if scheme.inverted:
        groups = groups ^ 1
    counts = groups.sum(axis=1)
    # argmax returns the first maximum: index 0 for empty groups, lowest high otherwise
    values = groups.argmax(axis=1)
    k = scheme.bits_per_symbol
    bits = ((values[:, None] >> np.arange(k - 1, -1, -1)) & 1).astype(np.uint8)
    anomalies = SymbolAnomalies(
        zero_high_count=int(np.count_nonzero(counts == 0)),
        multi_high_count=int(np.count_nonzero(counts > 1)),
        total_symbols=int(groups.shape[0]),
    )
    return bits.ravel(), anomalies


def expected_high_ratio(scheme):
    """Exact fraction of high slots any PPM/IPPM stream carries."""
    if scheme.inverted:
        return Fraction(scheme.order - 1, scheme.order)
    return Fraction(1, scheme.order)
