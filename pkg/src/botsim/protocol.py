"""Bot state machine: membership management and BCS-based sensor disclosure.

All functions operate on a single bot's state and return the messages the
bot emits in response. The engine owns delivery, clocks and churn; nothing
here touches another node's state.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Dict, List, NamedTuple, Optional, Set, Tuple

from .messages import CommandState, CommandUpdate, Hello, HelloReply, Message, NLReply, NLRequest
from .trust import EvidenceRecord, Outcome, TrustParams, is_untrusted, record_experience


@dataclass(frozen=True)
class ProtocolParams:
    mm_cycle: int = 2400
    inactivity_timeout: int = 3 * 2400
    response_timeout: int = 60
    nl_capacity: int = 50
    nl_low_watermark: int = 35
    nl_reply_size: int = 10
    bcs_rate: float = 0.25
    # follow-up rate for neighbors with only negative evidence so far
    suspect_bcs_rate: float = 1.0
    bcs_max_per_cycle: Optional[int] = None
    delta_min: int = 5
    delta_max: int = 20
    # None disables probing and blacklisting (the unmodified protocol)
    trust: Optional[TrustParams] = None


@dataclass(slots=True)
class PendingProbe:
    sent_at: int
    claimed_id: int
    is_bcs: bool
    real_id: int


@dataclass(slots=True)
class NeighborEntry:
    peer: int
    last_seen: int
    evidence: EvidenceRecord = field(default_factory=EvidenceRecord)
    pending: Optional[PendingProbe] = None
    # replied to the most recent hello; only such neighbors get BCS probes
    # and are handed out in NL replies
    answered: bool = False
    # a BCS probe timed out; the negative is recorded once the peer proves
    # it is online by answering a later hello, and dropped if it does not
    unconfirmed: bool = False


class Blacklisted(NamedTuple):
    observer: int
    target: int
    time: int
    score: float


@dataclass
class BotState:
    id: int
    command: CommandState
    rng: random.Random
    nl: Dict[int, NeighborEntry] = field(default_factory=dict)
    blacklist: Set[int] = field(default_factory=set)
    online: bool = True
    isolated: bool = False
    # peer -> number of BCS outcomes ever recorded against it (survives eviction)
    outcome_counts: Dict[int, int] = field(default_factory=dict)

    def add_neighbor(self, peer: int, now: int, capacity: int) -> bool:
        if peer == self.id or peer in self.nl or peer in self.blacklist or len(self.nl) >= capacity:
            return False
        self.nl[peer] = NeighborEntry(peer, now)
        return True

    def go_offline(self) -> None:
        self.online = False
        for entry in self.nl.values():
            entry.pending = None
            entry.unconfirmed = False

    def go_online(self, now: int) -> None:
        """Rejoin with the NL intact; every entry gets a fresh inactivity grace."""
        self.online = True
        for entry in self.nl.values():
            entry.last_seen = now
            entry.answered = False


def make_bcs_claim(real_id: int, rng: random.Random, delta_min: int = 5, delta_max: int = 20) -> int:
    return max(0, real_id - rng.randint(delta_min, delta_max))


def mm_cycle_tick(bot: BotState, now: int, params: ProtocolParams) -> List[Message]:
    """One membership-management round: evict, refill, then hello every neighbor."""
    if not bot.online:
        return []
    out = replace_inactive_neighbors(bot, now, params)
    if not bot.nl:
        bot.isolated = True
        return out
    bot.isolated = False

    real = bot.command.command_id
    probing = params.trust is not None and real > 0
    budget = params.bcs_max_per_cycle
    rng = bot.rng
    me = bot.id
    for peer, entry in bot.nl.items():
        if entry.pending is not None:
            continue
        claim = real
        is_bcs = False
        ev = entry.evidence
        rate = params.suspect_bcs_rate if ev.negative and not ev.positive else params.bcs_rate
        if probing and entry.answered and (budget is None or budget > 0) and rng.random() < rate:
            claim = make_bcs_claim(real, rng, params.delta_min, params.delta_max)
            is_bcs = True
            if budget is not None:
                budget -= 1
        entry.pending = PendingProbe(now, claim, is_bcs, real)
        out.append(Hello(me, peer, now, claim))
    return out


def replace_inactive_neighbors(bot: BotState, now: int, params: ProtocolParams) -> List[Message]:
    if not bot.online:
        return []
    timeout = params.inactivity_timeout
    stale = [peer for peer, entry in bot.nl.items() if now - entry.last_seen >= timeout]
    for peer in stale:
        del bot.nl[peer]
    if len(bot.nl) >= params.nl_low_watermark:
        return []
    responsive = [peer for peer, entry in bot.nl.items() if entry.answered]
    if not responsive:
        return []
    return [NLRequest(bot.id, bot.rng.choice(responsive), now)]


def handle_hello(bot: BotState, msg: Hello, now: int, params: ProtocolParams) -> Optional[HelloReply]:
    sender = msg.sender
    if sender in bot.blacklist:
        return None
    entry = bot.nl.get(sender)
    if entry is not None:
        entry.last_seen = now
    else:
        bot.add_neighbor(sender, now, params.nl_capacity)
    own = bot.command
    update = own if own.command_id > msg.claimed_command_id else None
    return HelloReply(bot.id, sender, now, own.command_id, update)


def classify_bcs_response(probe: PendingProbe, reply: Optional[HelloReply],
                          real_id_at_send: Optional[int] = None) -> Outcome:
    """Positive only for a fresh command id backed by a valid, newer update."""
    real = probe.real_id if real_id_at_send is None else real_id_at_send
    if reply is None or reply.command_id < real:
        return Outcome.NEGATIVE
    update = reply.update
    if update is None or update.command_id <= probe.claimed_id or not update.is_valid():
        return Outcome.NEGATIVE
    return Outcome.POSITIVE


def apply_bcs_outcome(bot: BotState, peer: int, outcome: Outcome, now: int,
                      trust: TrustParams) -> Optional[Blacklisted]:
    entry = bot.nl[peer]
    entry.evidence = record_experience(entry.evidence, outcome)
    bot.outcome_counts[peer] = bot.outcome_counts.get(peer, 0) + 1
    verdict = is_untrusted(entry.evidence, trust)
    if not verdict.untrusted:
        return None
    del bot.nl[peer]
    bot.blacklist.add(peer)
    return Blacklisted(bot.id, peer, now, verdict.score)


def handle_hello_reply(bot: BotState, msg: HelloReply, now: int,
                       params: ProtocolParams) -> Tuple[List[Message], Optional[Blacklisted]]:
    sender = msg.sender
    if sender in bot.blacklist:
        return [], None
    update = msg.update
    if update is not None and update.command_id > bot.command.command_id and update.is_valid():
        bot.command = update
    entry = bot.nl.get(sender)
    if entry is None:
        return [], None
    entry.last_seen = now
    probe = entry.pending
    if probe is None:
        return [], None
    entry.pending = None
    entry.answered = True
    if entry.unconfirmed:
        entry.unconfirmed = False
        event = apply_bcs_outcome(bot, sender, Outcome.NEGATIVE, now, params.trust)
        if event is not None:
            return [], event
    event = None
    if probe.is_bcs:
        outcome = classify_bcs_response(probe, msg)
        event = apply_bcs_outcome(bot, sender, outcome, now, params.trust)
    # a lagging neighbor gets our command pushed, whatever kind of hello it answered
    if event is None and msg.command_id < bot.command.command_id:
        return [CommandUpdate(bot.id, sender, now, bot.command)], None
    return [], event


def resolve_timeouts(bot: BotState, now: int, params: ProtocolParams) -> int:
    """Close probes that got no reply within the response timeout.

    An unanswered BCS probe is a negative experience, but a benign neighbor
    that just went offline looks the same. The negative is therefore held
    until the neighbor answers its next hello (see handle_hello_reply); if
    that hello times out as well the neighbor is offline and the pending
    negative is discarded. Returns the number of probes closed.
    """
    closed = 0
    timeout = params.response_timeout
    for entry in bot.nl.values():
        probe = entry.pending
        if probe is None or now - probe.sent_at < timeout:
            continue
        closed += 1
        entry.pending = None
        entry.answered = False
        entry.unconfirmed = probe.is_bcs
    return closed


def handle_nl_request(bot: BotState, msg: NLRequest, now: int, params: ProtocolParams) -> Optional[NLReply]:
    """Share up to ``nl_reply_size`` responsive neighbors.

    With trust enabled only vetted neighbors are shared: at least one
    positive probe outcome and no negative ones. A sensor can never pass a
    probe, so it is not advertised while evidence against it builds up.
    """
    sender = msg.sender
    if sender in bot.blacklist:
        return None
    entry = bot.nl.get(sender)
    if entry is not None:
        entry.last_seen = now
    if params.trust is None:
        candidates = [peer for peer, e in bot.nl.items() if e.answered and peer != sender]
    else:
        candidates = [peer for peer, e in bot.nl.items()
                      if e.answered and peer != sender and e.evidence.positive and not e.evidence.negative]
    if len(candidates) > params.nl_reply_size:
        candidates = bot.rng.sample(candidates, params.nl_reply_size)
    return NLReply(bot.id, sender, now, tuple(candidates))


def handle_nl_reply(bot: BotState, msg: NLReply, now: int, params: ProtocolParams) -> int:
    if msg.sender in bot.blacklist:
        return 0
    adopted = 0
    for peer in msg.peers:
        if len(bot.nl) >= params.nl_capacity:
            break
        if bot.add_neighbor(peer, now, params.nl_capacity):
            adopted += 1
    return adopted


def handle_command_update(bot: BotState, msg: CommandUpdate) -> bool:
    if msg.sender in bot.blacklist:
        return False
    cmd = msg.command
    if cmd.command_id > bot.command.command_id and cmd.is_valid():
        bot.command = cmd
        return True
    return False
