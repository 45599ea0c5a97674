"""Wire messages exchanged between overlay nodes and their binary encoding.

A BCS probe is not a message type of its own: it is a plain ``Hello`` whose
claimed command id is deliberately low. Only the prober remembers that it
was a probe, so the encoded bytes never give it away.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass
from typing import Optional, Tuple, Union

TAG_HELLO = 1
TAG_HELLO_REPLY = 2
TAG_NL_REQUEST = 3
TAG_NL_REPLY = 4
TAG_COMMAND_UPDATE = 5

_HEADER = struct.Struct("<BQQQ")  # tag, sender, receiver, sent_at
_U64 = struct.Struct("<Q")
_U32 = struct.Struct("<I")
_U8 = struct.Struct("<B")


def checksum(payload: bytes) -> int:
    return zlib.crc32(payload) & 0xFFFFFFFF


@dataclass(frozen=True)
class CommandState:
    command_id: int
    payload: bytes
    checksum: int

    @classmethod
    def create(cls, command_id: int, payload: bytes) -> "CommandState":
        return cls(command_id, payload, checksum(payload))

    def is_valid(self) -> bool:
        return checksum(self.payload) == self.checksum

    def corrupted(self) -> "CommandState":
        """Copy with the first payload byte flipped, so the checksum fails."""
        if not self.payload:
            return CommandState(self.command_id, b"\xff", self.checksum ^ 0xFFFFFFFF)
        damaged = bytes([self.payload[0] ^ 0xFF]) + self.payload[1:]
        return CommandState(self.command_id, damaged, self.checksum)


@dataclass(slots=True)
class Hello:
    sender: int
    receiver: int
    sent_at: int
    claimed_command_id: int


@dataclass(slots=True)
class HelloReply:
    sender: int
    receiver: int
    sent_at: int
    command_id: int
    update: Optional[CommandState] = None


@dataclass(slots=True)
class NLRequest:
    sender: int
    receiver: int
    sent_at: int


@dataclass(slots=True)
class NLReply:
    sender: int
    receiver: int
    sent_at: int
    peers: Tuple[int, ...] = ()


@dataclass(slots=True)
class CommandUpdate:
    sender: int
    receiver: int
    sent_at: int
    command: CommandState


Message = Union[Hello, HelloReply, NLRequest, NLReply, CommandUpdate]


def _encode_command(cmd: CommandState) -> bytes:
    return _U64.pack(cmd.command_id) + _U32.pack(len(cmd.payload)) + cmd.payload + _U32.pack(cmd.checksum)


def _decode_command(buf: bytes, pos: int) -> Tuple[CommandState, int]:
    (command_id,) = _U64.unpack_from(buf, pos)
    pos += 8
    (length,) = _U32.unpack_from(buf, pos)
    pos += 4
    payload = bytes(buf[pos:pos + length])
    if len(payload) != length:
        raise ValueError("truncated payload")
    pos += length
    (crc,) = _U32.unpack_from(buf, pos)
    return CommandState(command_id, payload, crc), pos + 4


def encode(msg: Message) -> bytes:
    """Serialize ``msg`` with a 4-byte little-endian length prefix."""
    if isinstance(msg, Hello):
        body = _HEADER.pack(TAG_HELLO, msg.sender, msg.receiver, msg.sent_at) + _U64.pack(msg.claimed_command_id)
    elif isinstance(msg, HelloReply):
        body = _HEADER.pack(TAG_HELLO_REPLY, msg.sender, msg.receiver, msg.sent_at) + _U64.pack(msg.command_id)
        if msg.update is None:
            body += _U8.pack(0)
        else:
            body += _U8.pack(1) + _encode_command(msg.update)
    elif isinstance(msg, NLRequest):
        body = _HEADER.pack(TAG_NL_REQUEST, msg.sender, msg.receiver, msg.sent_at)
    elif isinstance(msg, NLReply):
        body = _HEADER.pack(TAG_NL_REPLY, msg.sender, msg.receiver, msg.sent_at) + _U32.pack(len(msg.peers))
        body += b"".join(_U64.pack(p) for p in msg.peers)
    elif isinstance(msg, CommandUpdate):
        body = _HEADER.pack(TAG_COMMAND_UPDATE, msg.sender, msg.receiver, msg.sent_at) + _encode_command(msg.command)
    else:
        raise TypeError(f"cannot encode {type(msg).__name__}")
    return _U32.pack(len(body)) + body


def decode(data: bytes) -> Message:
    (length,) = _U32.unpack_from(data, 0)
    if len(data) != length + 4:
        raise ValueError("length prefix does not match buffer size")
    tag, sender, receiver, sent_at = _HEADER.unpack_from(data, 4)
    pos = 4 + _HEADER.size
    if tag == TAG_HELLO:
        (claimed,) = _U64.unpack_from(data, pos)
        return Hello(sender, receiver, sent_at, claimed)
    if tag == TAG_HELLO_REPLY:
        (command_id,) = _U64.unpack_from(data, pos)
        (has_update,) = _U8.unpack_from(data, pos + 8)
        update = _decode_command(data, pos + 9)[0] if has_update else None
        return HelloReply(sender, receiver, sent_at, command_id, update)
    if tag == TAG_NL_REQUEST:
        return NLRequest(sender, receiver, sent_at)
    if tag == TAG_NL_REPLY:
        (count,) = _U32.unpack_from(data, pos)
        peers = struct.unpack_from(f"<{count}Q", data, pos + 4)
        return NLReply(sender, receiver, sent_at, tuple(peers))
    if tag == TAG_COMMAND_UPDATE:
        return CommandUpdate(sender, receiver, sent_at, _decode_command(data, pos)[0])
    raise ValueError(f"unknown message tag {tag}")


def carried_command(msg: Message) -> Optional[CommandState]:
    if isinstance(msg, HelloReply):
        return msg.update
    if isinstance(msg, CommandUpdate):
        return msg.command
    return None
