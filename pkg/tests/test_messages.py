import struct
import zlib

import pytest
from hypothesis import given
from hypothesis import strategies as st

from botsim.messages import (
    CommandState,
    CommandUpdate,
    Hello,
    HelloReply,
    NLReply,
    NLRequest,
    checksum,
    decode,
    encode,
)

u32 = st.integers(0, 2**32 - 1)
ids = st.integers(0, 2**40)


def test_checksum_is_crc32():
    assert checksum(b"payload") == zlib.crc32(b"payload")
    assert CommandState.create(3, b"abc").is_valid()


def test_corrupted_command_fails_checksum():
    cmd = CommandState.create(7, b"instruction set")
    bad = cmd.corrupted()
    assert bad.command_id == 7
    assert not bad.is_valid()
    assert not CommandState.create(1, b"").corrupted().is_valid()


def test_bcs_hello_is_byte_identical_to_plain_hello():
    # a probe is only a hello with a low claimed id; the wire cannot tell them apart
    probe = Hello(sender=4, receiver=9, sent_at=2400, claimed_command_id=0)
    plain = Hello(sender=4, receiver=9, sent_at=2400, claimed_command_id=0)
    assert encode(probe) == encode(plain)


def test_hello_layout():
    data = encode(Hello(1, 2, 3, 4))
    assert data[:4] == struct.pack("<I", len(data) - 4)
    assert data[4] == 1
    assert struct.unpack_from("<QQQQ", data, 5) == (1, 2, 3, 4)


@given(ids, ids, u32, ids)
def test_hello_round_trip(s, r, t, claim):
    msg = Hello(s, r, t, claim)
    assert decode(encode(msg)) == msg


@given(ids, ids, u32, ids, st.one_of(st.none(), st.binary(max_size=64)))
def test_hello_reply_round_trip(s, r, t, cid, payload):
    update = None if payload is None else CommandState.create(cid, payload)
    msg = HelloReply(s, r, t, cid, update)
    assert decode(encode(msg)) == msg


@given(ids, ids, u32, st.lists(ids, max_size=20))
def test_nl_messages_round_trip(s, r, t, peers):
    assert decode(encode(NLRequest(s, r, t))) == NLRequest(s, r, t)
    msg = NLReply(s, r, t, tuple(peers))
    assert decode(encode(msg)) == msg


def test_command_update_round_trip_keeps_bad_checksum():
    msg = CommandUpdate(1, 2, 3, CommandState.create(5, b"xyz").corrupted())
    back = decode(encode(msg))
    assert back == msg
    assert not back.command.is_valid()


def test_decode_rejects_garbage():
    with pytest.raises(ValueError):
        decode(encode(Hello(1, 2, 3, 4)) + b"\x00")
    bad_tag = bytearray(encode(NLRequest(1, 2, 3)))
    bad_tag[4] = 99
    with pytest.raises(ValueError):
        decode(bytes(bad_tag))
