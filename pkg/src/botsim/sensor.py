"""Sensor nodes: monitor the overlay without ever forwarding a usable command."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence

from .messages import CommandState, Hello, HelloReply, NLReply, NLRequest, checksum


class SensorStrategy(str, Enum):
    ECHO_SAME_ID = "echo"
    SILENT = "silent"
    CORRUPT_PAYLOAD = "corrupt"

    @classmethod
    def parse(cls, name: str) -> "SensorStrategy":
        key = name.strip().lower().replace("-", "_")
        aliases = {
            "echo": cls.ECHO_SAME_ID, "echo_same_id": cls.ECHO_SAME_ID, "echosameid": cls.ECHO_SAME_ID,
            "silent": cls.SILENT,
            "corrupt": cls.CORRUPT_PAYLOAD, "corrupt_payload": cls.CORRUPT_PAYLOAD,
            "corruptpayload": cls.CORRUPT_PAYLOAD,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown sensor strategy {name!r}") from None


_FORGED_PAYLOAD = bytes(32)


def forged_command(command_id: int) -> CommandState:
    """A command carrying a checksum that deliberately does not match."""
    return CommandState(command_id, _FORGED_PAYLOAD, checksum(_FORGED_PAYLOAD) ^ 0x5A5A5A5A)


@dataclass
class SensorState:
    id: int
    strategy: SensorStrategy
    rng: random.Random
    # peer -> first time the peer was seen (the monitoring log)
    observed_peers: Dict[int, int] = field(default_factory=dict)
    observed_max: int = 0
    online: bool = True

    def observe(self, peer: int, now: int, command_id: Optional[int] = None) -> None:
        self.observed_peers.setdefault(peer, now)
        if command_id is not None and command_id > self.observed_max:
            self.observed_max = command_id


def sensor_handle_hello(sensor: SensorState, msg: Hello, now: int) -> Optional[HelloReply]:
    claimed = msg.claimed_command_id
    sensor.observe(msg.sender, now, claimed)
    strategy = sensor.strategy
    if strategy is SensorStrategy.ECHO_SAME_ID:
        return HelloReply(sensor.id, msg.sender, now, claimed, None)
    if strategy is SensorStrategy.SILENT:
        if claimed < sensor.observed_max:
            return None
        return HelloReply(sensor.id, msg.sender, now, sensor.observed_max, None)
    update = forged_command(sensor.observed_max) if claimed < sensor.observed_max else None
    return HelloReply(sensor.id, msg.sender, now, sensor.observed_max, update)


def sensor_handle_nl_request(sensor: SensorState, msg: NLRequest, now: int, reply_size: int = 10) -> NLReply:
    """Answer with peers the sensor has actually seen, never invented ids."""
    sensor.observe(msg.sender, now)
    candidates = [peer for peer in sensor.observed_peers if peer != msg.sender]
    if len(candidates) > reply_size:
        candidates = sensor.rng.sample(candidates, reply_size)
    return NLReply(sensor.id, msg.sender, now, tuple(candidates))


def sensor_join(sensor: SensorState, population: Sequence[int], k: int, rng: random.Random,
                now: int = 0) -> List[Hello]:
    if k <= 0 or not population:
        return []
    targets = rng.sample(list(population), min(k, len(population)))
    return [Hello(sensor.id, target, now, sensor.observed_max) for target in targets]
