import math
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from netmemo.errors import CorruptStreamError, SyncError, UsageError
from netmemo.lzdict import (
    DEFAULT_WINDOW,
    MAX_MATCH,
    MIN_MATCH,
    Literal,
    Match,
    encode_tokens,
    lz_decode,
    lz_encode,
    lz_parse,
    lz_unparse,
)
from netmemo.stream import ALGO_LZ, CodedStream, fingerprint

windows = st.sampled_from([256, 1024, 4096, 32768, 65536])


def test_default_window():
    assert DEFAULT_WINDOW == 32768
    assert lz_encode(b"abc").param * 256 == 32768


def test_greedy_parse_against_memory():
    assert lz_parse(b"abcabcabc", b"abc") == [Match(3, 9)]
    assert lz_decode(lz_encode(b"abcabcabc", b"abc"), b"abc") == b"abcabcabc"


def test_parse_without_memory_starts_with_literals():
    toks = lz_parse(b"abcabcabc")
    assert toks[:3] == [Literal(97), Literal(98), Literal(99)]
    assert toks[3] == Match(3, 6)


def test_input_equal_to_memory_uses_maximal_matches():
    rng = random.Random(0)
    memory = bytes(rng.getrandbits(8) for _ in range(30000))
    toks = lz_parse(memory, memory)
    assert all(isinstance(t, Match) for t in toks)
    assert len(toks) <= math.ceil(len(memory) / MAX_MATCH)


@given(st.binary(max_size=3000), st.binary(max_size=3000), windows)
def test_round_trip(data, memory, window):
    s = lz_encode(data, memory, window)
    assert lz_decode(s.to_bytes(), memory, window) == data


@given(st.binary(max_size=2000), st.binary(max_size=2000), windows)
def test_tokens_valid_and_replayable(data, memory, window):
    toks = lz_parse(data, memory, window)
    held = min(len(memory), window)
    for t in toks:
        if isinstance(t, Match):
            assert 1 <= t.offset <= min(window, held)
            assert MIN_MATCH <= t.length <= MAX_MATCH
            held += t.length
        else:
            held += 1
    assert lz_unparse(toks, memory, window) == data


def test_long_memory_keeps_most_recent_window():
    rng = random.Random(3)
    old = bytes(rng.getrandbits(8) for _ in range(600))
    recent = bytes(rng.getrandbits(8) for _ in range(512))
    memory = old + recent
    assert lz_parse(recent, memory, 512) == [Match(512, 258), Match(512, 254)]
    # the older part has slid out of a 512-byte window
    assert all(isinstance(t, Literal) for t in lz_parse(old[:100], memory, 512))


def test_empty_input_header_only():
    s = lz_encode(b"", b"dictionary")
    assert s.payload == b"" and s.original_length == 0
    assert lz_decode(s, b"dictionary") == b""


def test_offset_beyond_buffer_is_corrupt():
    payload = encode_tokens([Literal(1)] * 5 + [Match(10, 3)])
    s = CodedStream(ALGO_LZ, DEFAULT_WINDOW // 256, 8, 0, payload)
    with pytest.raises(CorruptStreamError):
        lz_decode(s)
    with pytest.raises(CorruptStreamError):
        lz_unparse([Literal(1)] * 5 + [Match(10, 3)])


def test_match_past_declared_length_is_corrupt():
    payload = encode_tokens([Literal(1), Match(1, 10)])
    s = CodedStream(ALGO_LZ, DEFAULT_WINDOW // 256, 5, 0, payload)
    with pytest.raises(CorruptStreamError):
        lz_decode(s)


def test_wrong_memory_is_sync_error():
    s = lz_encode(b"payload", b"A")
    with pytest.raises(SyncError):
        lz_decode(s, b"B")
    assert s.memory_fingerprint == fingerprint(b"A")


def test_window_mismatch_is_sync_error():
    s = lz_encode(b"payload", b"", 1024)
    with pytest.raises(SyncError):
        lz_decode(s, b"", 2048)


@pytest.mark.parametrize("w", [0, 255, 300, 65792])
def test_bad_window_rejected(w):
    with pytest.raises(UsageError):
        lz_encode(b"x", b"", w)


def test_truncated_payload_is_corrupt():
    data = bytes(random.Random(2).getrandbits(8) for _ in range(2000))
    blob = lz_encode(data).to_bytes()
    with pytest.raises(CorruptStreamError):
        lz_decode(blob[:-2])


def test_dictionary_benefit_on_reshuffled_memory():
    rng = random.Random(7)
    wins = 0
    for _ in range(100):
        memory = bytes(rng.getrandbits(8) for _ in range(4000))
        pieces = []
        for _ in range(rng.randint(2, 8)):
            a = rng.randrange(len(memory) - 64)
            pieces.append(memory[a : a + rng.randint(8, 64)])
        rng.shuffle(pieces)
        x = b"".join(pieces)
        wins += len(lz_encode(x, memory).payload) < len(lz_encode(x).payload)
    assert wins >= 95
