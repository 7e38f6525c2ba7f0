import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from netmemo import arith


def test_quantize_clamps_to_floor():
    assert arith.quantize(0.0) == 1
    assert arith.quantize(1.0) == arith.PROB_ONE - 1
    assert arith.quantize(0.5) == arith.PROB_ONE // 2


@given(st.lists(st.tuples(st.integers(0, 1), st.floats(0.0, 1.0)), max_size=400))
def test_round_trip_any_probabilities(symbols):
    bits = np.array([b for b, _ in symbols], dtype=np.uint8)
    q0s = np.array([arith.quantize(p) for _, p in symbols], dtype=np.int64)
    payload = arith.encode_bits(bits, q0s)
    out, ok = arith.decode_bits(payload, q0s)
    assert ok
    assert np.array_equal(out, bits)


def test_length_close_to_information_content():
    rng = np.random.default_rng(5)
    p0 = rng.uniform(0.02, 0.98, size=20000)
    bits = (rng.random(20000) >= p0).astype(np.uint8)
    q0s = np.array([arith.quantize(p) for p in p0])
    info = -sum(math.log2(q / arith.PROB_ONE if b == 0 else 1 - q / arith.PROB_ONE) for b, q in zip(bits, q0s))
    n = len(arith.encode_bits(bits, q0s))
    assert info / 8 <= n <= info / 8 + 2


def test_worst_case_fits_capacity():
    bits = np.zeros(5000, dtype=np.uint8)
    q0s = np.full(5000, 1, dtype=np.int64)  # every bit at the probability floor
    payload = arith.encode_bits(bits, q0s)
    assert len(payload) <= arith.output_capacity(5000)
    assert np.array_equal(arith.decode_bits(payload, q0s)[0], bits)


@pytest.mark.parametrize("delta", [-1, 1])
def test_wrong_payload_length_detected(delta):
    rng = np.random.default_rng(1)
    bits = rng.integers(0, 2, 3000).astype(np.uint8)
    q0s = np.full(3000, arith.PROB_ONE // 2, dtype=np.int64)
    payload = arith.encode_bits(bits, q0s)
    changed = payload[:-1] if delta < 0 else payload + b"\x00"
    assert not arith.decode_bits(changed, q0s)[1]
