import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from netmemo.ctw import ContextTree, ctw_decode, ctw_encode, ctw_predict, kt_log_prob, prime
from netmemo.errors import CorruptStreamError, SyncError, UsageError
from netmemo.gainbench import generate


# --- independent oracle: CTW sequence probability by direct recursion ------


def kt_sequence(bits):
    """Exact KT probability of a bit sequence, symbol by symbol."""
    p = Fraction(1)
    a = b = 0
    for x in bits:
        p *= Fraction(2 * (b if x else a) + 1, 2 * (a + b) + 2)
        if x:
            b += 1
        else:
            a += 1
    return p


def ctw_oracle(bits, depth):
    """Weighted probability of `bits`, context = previous `depth` bits, zero padded."""
    padded = [0] * depth + list(bits)
    # context path of position t, most recent bit first
    ctx = [tuple(padded[t + depth - 1 - j] for j in range(depth)) for t in range(len(bits))]

    def pw(path):
        sub = [x for x, c in zip(bits, ctx) if c[: len(path)] == path]
        pe = kt_sequence(sub)
        if len(path) == depth:
            return pe
        return (pe + pw(path + (0,)) * pw(path + (1,))) / 2

    return pw(())


def to_bits(data):
    return [int(b) for b in np.unpackbits(np.frombuffer(data, dtype=np.uint8))]


# --- KT micro-oracles -------------------------------------------------------


def test_empty_tree_predicts_half():
    for depth in (0, 3, 16):
        assert ctw_predict(ContextTree(depth), "1" * depth) == 0.5


def test_kt_after_one_zero():
    assert abs(ContextTree(0).observe("0").predict("") - 0.75) < 1e-12


def test_kt_sequence_00():
    assert abs(math.exp(ContextTree(0).observe("00").log_prob) - 3 / 8) < 1e-12


def test_kt_log_prob_closed_form():
    for a in range(6):
        for b in range(6):
            assert math.isclose(kt_log_prob(a, b), math.log(kt_sequence([0] * a + [1] * b)), abs_tol=1e-12)


def test_predict_rejects_wrong_context_length():
    with pytest.raises(UsageError):
        ctw_predict(ContextTree(4), "010")


# --- tree contents ----------------------------------------------------------


def test_prime_empty_is_noop():
    t = prime(ContextTree(4), b"")
    assert not t.counts.any()
    assert t.nodes() == {}


def test_prime_zero_byte_counts_root():
    root = prime(ContextTree(4), b"\x00").node("")
    assert (root.count_zero, root.count_one) == (8, 0)


@given(st.binary(max_size=40), st.integers(0, 5))
def test_counts_match_occurrences(data, depth):
    bits = to_bits(data)
    padded = [0] * depth + bits
    t = ContextTree(depth).prime(data)
    expected = {}
    for i, x in enumerate(bits):
        for k in range(depth + 1):
            path = "".join(str(padded[i + depth - 1 - j]) for j in range(k))
            z, o = expected.get(path, (0, 0))
            expected[path] = (z + (x == 0), o + (x == 1))
    got = {p: (s.count_zero, s.count_one) for p, s in t.nodes().items()}
    assert got == expected


@settings(max_examples=100)
@given(st.binary(min_size=1, max_size=24))
def test_weighting_identity_every_node(data):
    t = ContextTree(4).prime(data)
    nodes = t.nodes()
    for path, s in nodes.items():
        assert s.log_pe <= 0 and s.log_pw <= 1e-15
        assert len(path) <= 4
        if len(path) == 4:
            assert s.log_pw == s.log_pe
            continue
        c0 = nodes.get(path + "0")
        c1 = nodes.get(path + "1")
        lw0 = c0.log_pw if c0 else 0.0
        lw1 = c1.log_pw if c1 else 0.0
        rhs = math.log(0.5 * math.exp(s.log_pe) + 0.5 * math.exp(lw0 + lw1))
        assert abs(s.log_pw - rhs) < 1e-9


@settings(max_examples=60)
@given(st.binary(min_size=1, max_size=5), st.integers(0, 4))
def test_sequential_coder_matches_recursive_oracle(data, depth):
    exact = ctw_oracle(to_bits(data), depth)
    bits = -math.log2(exact)
    assert math.isclose(ContextTree(depth).ideal_code_length(data), bits, rel_tol=1e-9, abs_tol=1e-9)
    # batch priming agrees with the same recursion
    assert math.isclose(ContextTree(depth).prime(data).log_prob, math.log(exact), rel_tol=1e-9, abs_tol=1e-9)


@given(st.binary(max_size=30), st.text("01", min_size=3, max_size=3))
def test_predict_normalized_and_in_range(data, ctx):
    t = ContextTree(3).prime(data)
    p0 = ctw_predict(t, ctx)
    assert 0.0 < p0 < 1.0
    assert abs(p0 + (1.0 - p0) - 1.0) < 1e-12


def test_predict_equals_ratio_of_sequence_probabilities():
    data = b"\x5a\xc3"
    t = ContextTree(3).prime(data)
    history = "".join(map(str, to_bits(data)))
    ctx = history[-3:]
    p_joint = ctw_oracle(to_bits(data) + [0], 3)
    p_prev = ctw_oracle(to_bits(data), 3)
    assert math.isclose(ctw_predict(t, ctx), float(p_joint / p_prev), rel_tol=1e-9)


def test_priming_is_deterministic():
    data = bytes(range(200))
    a, b = ContextTree(8).prime(data), ContextTree(8).prime(data)
    assert np.array_equal(a.counts, b.counts)
    assert np.array_equal(a.beta, b.beta)


# --- codec -----------------------------------------------------------------


@given(st.binary(max_size=4096), st.binary(max_size=512), st.integers(0, 12))
def test_round_trip(data, memory, depth):
    s = ctw_encode(data, memory, depth)
    assert s.original_length == len(data)
    assert ctw_decode(s.to_bytes(), memory, depth) == data


@given(st.binary(max_size=600), st.binary(max_size=200))
def test_round_trip_frozen_model(data, memory):
    s = ctw_encode(data, memory, 6, adapt=False)
    assert ctw_decode(s, memory, 6, adapt=False) == data


def test_empty_input_is_header_only():
    s = ctw_encode(b"", b"memory", 8)
    assert s.payload == b""
    assert ctw_decode(s, b"memory") == b""


def test_wrong_memory_is_sync_error():
    s = ctw_encode(b"hello world", b"memory A", 8)
    with pytest.raises(SyncError):
        ctw_decode(s, b"memory B")


def test_depth_mismatch_is_sync_error():
    s = ctw_encode(b"hello", b"", 8)
    with pytest.raises(SyncError):
        ctw_decode(s, b"", depth=9)


def test_truncated_payload_is_corrupt():
    data = bytes(range(256)) * 4
    blob = ctw_encode(data, b"", 8).to_bytes()
    with pytest.raises(CorruptStreamError):
        ctw_decode(blob[:-3])


def test_supplied_tree_is_not_mutated():
    t = ContextTree(8).prime(b"abcdef" * 10)
    before = t.counts.copy()
    s = ctw_encode(b"abcabc", b"abcdef" * 10, 8, tree=t)
    assert np.array_equal(t.counts, before)
    assert ctw_decode(s, b"abcdef" * 10, tree=t) == b"abcabc"


def test_memory_shortens_markov_target(markov_source):
    memory = generate(markov_source, 1 << 20, seed=1)
    x = generate(markov_source, 1024, seed=2)
    assert len(ctw_encode(x, memory).payload) < len(ctw_encode(x, b"").payload)


def test_rate_approaches_entropy(markov_source):
    x = generate(markov_source, 125_000, seed=3)  # 10**6 bits
    rate = 8 * len(ctw_encode(x, b"").payload) / (8 * len(x))
    assert abs(rate - markov_source.entropy_rate()) < 0.05
