"""Cartesian bit interleaving of complex values into 128-bit integers.

The IEEE-754 bit patterns of the real and imaginary parts are merged bit by
bit.  The default layout puts real bit ``i`` at output bit ``2i + 1`` and
imaginary bit ``i`` at ``2i``; this reproduces the published zero-order
reference values (see :func:`table1_search`).  Other layouts are available
for comparison.
"""

from __future__ import annotations

import cmath
import struct
from dataclasses import dataclass
from itertools import product
from typing import Iterable

import numpy as np

_MASK64 = (1 << 64) - 1
_SPREAD_MASKS = (
    (32, 0x00000000FFFFFFFF00000000FFFFFFFF),
    (16, 0x0000FFFF0000FFFF0000FFFF0000FFFF),
    (8, 0x00FF00FF00FF00FF00FF00FF00FF00FF),
    (4, 0x0F0F0F0F0F0F0F0F0F0F0F0F0F0F0F0F),
    (2, 0x33333333333333333333333333333333),
    (1, 0x55555555555555555555555555555555),
)


class EncodingError(ValueError):
    pass


@dataclass(frozen=True)
class Layout:
    """One of the eight natural interleaving variants.

    real_odd      real lane on odd output bits (imaginary on even)
    lane_reversed bit order inside each 64-bit lane reversed before merging
    output_reversed  the merged 128-bit word bit-reversed
    """

    real_odd: bool = True
    lane_reversed: bool = False
    output_reversed: bool = False

    @property
    def name(self) -> str:
        return (
            f"real-{'odd' if self.real_odd else 'even'}"
            f"/lane-{'lsb' if self.lane_reversed else 'msb'}"
            f"/out-{'rev' if self.output_reversed else 'fwd'}"
        )


DEFAULT_LAYOUT = Layout()
ALL_LAYOUTS = tuple(Layout(*flags) for flags in product((True, False), repeat=3))


def float_bits(x: float) -> int:
    return struct.unpack("<Q", struct.pack("<d", x))[0]


def bits_float(b: int) -> float:
    return struct.unpack("<d", struct.pack("<Q", b & _MASK64))[0]


def _spread(x: int) -> int:
    for shift, mask in _SPREAD_MASKS:
        x = (x | (x << shift)) & mask
    return x


def _compact(x: int) -> int:
    x &= _SPREAD_MASKS[-1][1]
    x = (x | (x >> 1)) & 0x33333333333333333333333333333333
    x = (x | (x >> 2)) & 0x0F0F0F0F0F0F0F0F0F0F0F0F0F0F0F0F
    x = (x | (x >> 4)) & 0x00FF00FF00FF00FF00FF00FF00FF00FF
    x = (x | (x >> 8)) & 0x0000FFFF0000FFFF0000FFFF0000FFFF
    x = (x | (x >> 16)) & 0x00000000FFFFFFFF00000000FFFFFFFF
    x = (x | (x >> 32)) & _MASK64
    return x


def _reverse(x: int, width: int) -> int:
    return int(format(x, f"0{width}b")[::-1], 2)


def interleave(c: complex, layout: Layout = DEFAULT_LAYOUT) -> int:
    """Encode a finite complex value as a 128-bit unsigned integer."""
    c = complex(c)
    if not cmath.isfinite(c):
        raise EncodingError(f"cannot encode non-finite value {c!r}")
    return interleave_raw(float_bits(c.real), float_bits(c.imag), layout)


def deinterleave(word: int, layout: Layout = DEFAULT_LAYOUT) -> complex:
    """Exact inverse of :func:`interleave`; non-finite lanes come back as-is."""
    if not 0 <= word < (1 << 128):
        raise EncodingError("encoded value must be a 128-bit unsigned integer")
    if layout.output_reversed:
        word = _reverse(word, 128)
    odd, even = _compact(word >> 1), _compact(word)
    re, im = (odd, even) if layout.real_odd else (even, odd)
    if layout.lane_reversed:
        re, im = _reverse(re, 64), _reverse(im, 64)
    return complex(bits_float(re), bits_float(im))


def is_finite_encoding(word: int, layout: Layout = DEFAULT_LAYOUT) -> bool:
    return cmath.isfinite(deinterleave(word, layout))


def imaginary_lane_mask(layout: Layout = DEFAULT_LAYOUT) -> int:
    """Bits of the 128-bit word that carry the imaginary part."""
    return interleave_raw(0, _MASK64, layout)


def interleave_raw(re_bits: int, im_bits: int, layout: Layout = DEFAULT_LAYOUT) -> int:
    """Interleave two raw 64-bit patterns (no float validation)."""
    if layout.lane_reversed:
        re_bits, im_bits = _reverse(re_bits, 64), _reverse(im_bits, 64)
    if layout.real_odd:
        word = (_spread(re_bits) << 1) | _spread(im_bits)
    else:
        word = _spread(re_bits) | (_spread(im_bits) << 1)
    return _reverse(word, 128) if layout.output_reversed else word


def to_decimal(word: int) -> str:
    return str(word)


def from_decimal(text: str) -> int:
    if not text.isdigit():
        raise EncodingError(f"not an unsigned decimal integer: {text!r}")
    word = int(text)
    if word >= 1 << 128:
        raise EncodingError("value exceeds 128 bits")
    return word


def encode_feature_vector(fv, layout: Layout = DEFAULT_LAYOUT) -> list[str]:
    """Decimal strings of the interleaved features; real values go in as ``(x, 0)``."""
    return [to_decimal(interleave(complex(v), layout)) for v in np.asarray(fv.values).tolist()]


def decode_strings(strings: Iterable[str], layout: Layout = DEFAULT_LAYOUT) -> list[complex]:
    return [deinterleave(from_decimal(s), layout) for s in strings]


# Zero-order reference values: (family, printed input, printed encoding).
# The inputs are printed to limited precision.
TABLE1 = (
    ("geometric", "306425", "42545721700200699567041133799352041472"),
    ("complex", "16130711836.218561", "42576847550484374798153183560267891362"),
    ("legendre", "0.000285380519926548", "14175173924443230618113893434503725056"),
    ("zernike", "7708.229987404831", "42538108148786362155157822007266511528"),
    ("hahn", "0.12138471769954105", "14177782865745799550609449631697511082"),
)


def _common_prefix(a: str, b: str) -> int:
    n = 0
    for x, y in zip(a, b):
        if x != y:
            break
        n += 1
    return n


def table1_search(layouts: Iterable[Layout] = ALL_LAYOUTS) -> list[dict]:
    """Try each layout against the reference rows.

    For each layout, reports per row how many leading decimal digits agree
    and whether the full string matches.
    """
    report = []
    for layout in layouts:
        rows = []
        for family, value, printed in TABLE1:
            got = to_decimal(interleave(float(value), layout))
            rows.append(
                {
                    "family": family,
                    "encoded": got,
                    "printed": printed,
                    "matching_digits": _common_prefix(got, printed),
                    "exact": got == printed,
                }
            )
        report.append({"layout": layout.name, "rows": rows, "exact_rows": sum(r["exact"] for r in rows)})
    report.sort(key=lambda r: -r["exact_rows"])
    return report


def lane_is_zero(word: int, imaginary: bool = True, layout: Layout = DEFAULT_LAYOUT) -> bool:
    mask = imaginary_lane_mask(layout)
    return (word & mask) == 0 if imaginary else (word & ~mask & ((1 << 128) - 1)) == 0


__all__ = [
    "ALL_LAYOUTS",
    "DEFAULT_LAYOUT",
    "EncodingError",
    "Layout",
    "TABLE1",
    "decode_strings",
    "deinterleave",
    "encode_feature_vector",
    "float_bits",
    "from_decimal",
    "imaginary_lane_mask",
    "interleave",
    "interleave_raw",
    "is_finite_encoding",
    "lane_is_zero",
    "table1_search",
    "to_decimal",
]
