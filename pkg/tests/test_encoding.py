import logging
import math
import struct

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from moments3d.encoding import (
    ALL_LAYOUTS,
    DEFAULT_LAYOUT,
    TABLE1,
    EncodingError,
    decode_strings,
    deinterleave,
    encode_feature_vector,
    float_bits,
    from_decimal,
    imaginary_lane_mask,
    interleave,
    interleave_raw,
    is_finite_encoding,
    lane_is_zero,
    table1_search,
)
from moments3d.moments import feature_vector, geometric_moments

log = logging.getLogger(__name__)


def _bitwise_oracle(re, im):
    """Bit-by-bit loop: real bit i -> 2i+1, imaginary bit i -> 2i."""
    rb = struct.unpack("<Q", struct.pack("<d", re))[0]
    ib = struct.unpack("<Q", struct.pack("<d", im))[0]
    word = 0
    for i in range(64):
        word |= ((rb >> i) & 1) << (2 * i + 1)
        word |= ((ib >> i) & 1) << (2 * i)
    return word


def test_zero_encodes_to_zero():
    assert interleave(0.0) == 0


def test_known_value():
    assert interleave(306425.0) == 42545721700200699567041133799352041472


def test_matches_bit_loop(rng):
    for re, im in rng.normal(scale=1e3, size=(200, 2)):
        assert interleave(complex(re, im)) == _bitwise_oracle(re, im)


def test_bulk_round_trip(rng):
    bits = rng.integers(0, 2**63, size=(100_000, 2), dtype=np.uint64) * 2 + rng.integers(0, 2, size=(100_000, 2), dtype=np.uint64)
    for layout in (DEFAULT_LAYOUT, ALL_LAYOUTS[-1]):
        for rb, ib in bits[:: 1 if layout == DEFAULT_LAYOUT else 50].tolist():
            word = interleave_raw(rb, ib, layout)
            back = deinterleave(word, layout)
            if math.isnan(back.real) or math.isnan(back.imag):
                continue  # NaN payloads checked below
            assert (float_bits(back.real), float_bits(back.imag)) == (rb, ib)


@given(st.floats(allow_nan=False, allow_infinity=False), st.floats(allow_nan=False, allow_infinity=False))
def test_round_trip_all_layouts(re, im):
    c = complex(re, im)
    for layout in ALL_LAYOUTS:
        back = deinterleave(interleave(c, layout), layout)
        assert float_bits(back.real) == float_bits(re) and float_bits(back.imag) == float_bits(im)


def test_signed_zero_survives():
    back = deinterleave(interleave(complex(-0.0, 0.0)))
    assert math.copysign(1, back.real) == -1


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_lane_purity(x):
    for layout in ALL_LAYOUTS:
        word = interleave(x, layout)
        assert lane_is_zero(word, imaginary=True, layout=layout)
        assert lane_is_zero(word, imaginary=False, layout=layout) == (float_bits(x) == 0)
        assert word & imaginary_lane_mask(layout) == 0


def test_non_finite_inputs():
    for bad in (math.nan, math.inf, complex(0, -math.inf)):
        with pytest.raises(EncodingError):
            interleave(bad)
    word = interleave_raw(float_bits(math.nan), 0)
    assert not is_finite_encoding(word)
    assert is_finite_encoding(interleave(1.5))


def test_decimal_parsing():
    assert from_decimal("12") == 12
    for bad in ("-1", "1e5", "", " 7", str(1 << 128)):
        with pytest.raises(EncodingError):
            from_decimal(bad)
    with pytest.raises(EncodingError):
        deinterleave(1 << 128)


def test_feature_vector_strings_are_full_width(rng):
    fv = feature_vector(geometric_moments(rng.random((8, 8, 8)), 8))
    strings = encode_feature_vector(fv)
    assert len(strings) == 165
    assert decode_strings(strings) == [complex(v) for v in fv.values]
    assert all(s.isdigit() for s in strings)


def test_table1_diagnostic():
    report = table1_search()
    assert len(report) == 8
    best = report[0]
    for row in best["rows"]:
        log.info("%s %s: %s (%d digits agree)", best["layout"], row["family"],
                 "match" if row["exact"] else "no match", row["matching_digits"])
    assert {r["family"] for r in best["rows"]} == {fam for fam, _, _ in TABLE1}
    assert all(len(r["encoded"]) <= 39 for rep in report for r in rep["rows"])
