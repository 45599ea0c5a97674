"""Deterministic discrete-event simulation of the botnet overlay.

Time is an integer number of simulated seconds. Events sit in a binary heap
keyed by ``(time, sequence)`` so ties resolve in scheduling order and a run
is a pure function of its :class:`SimConfig`.
"""

from __future__ import annotations

import hashlib
import heapq
import math
import random
import time as _wallclock
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple

from .messages import CommandState, CommandUpdate, Hello, HelloReply, Message, NLReply, NLRequest, carried_command
from .protocol import (
    BotState,
    ProtocolParams,
    handle_command_update,
    handle_hello,
    handle_hello_reply,
    handle_nl_reply,
    handle_nl_request,
    mm_cycle_tick,
    resolve_timeouts,
)
from .sensor import SensorState, SensorStrategy, sensor_handle_hello, sensor_handle_nl_request, sensor_join
from .trust import TrustParams

MINUTE = 60
HOUR = 3600
DAY = 86400

# event kinds
_DELIVER = 0
_TICK = 1
_SWEEP = 2
_CHURN = 3
_BOTMASTER = 4
_COVERAGE = 5
_SAMPLE = 6


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ChurnParams:
    mean_online: int = 6 * HOUR
    mean_offline: int = 18 * HOUR


@dataclass(frozen=True)
class NoiseParams:
    p_loss: float = 0.01
    p_corrupt: float = 0.001
    latency: int = 1


@dataclass(frozen=True)
class CommandSchedule:
    interval: int = DAY
    seed_fraction: float = 0.01
    initial_id: int = 1


@dataclass(frozen=True)
class SimConfig:
    n_bots: int = 1000
    n_sensors: int = 10
    sensor_strategy: SensorStrategy = SensorStrategy.ECHO_SAME_ID
    trust: Optional[TrustParams] = field(default_factory=TrustParams)
    duration: int = 14 * DAY
    mm_cycle: int = 40 * MINUTE
    churn: ChurnParams = field(default_factory=ChurnParams)
    noise: NoiseParams = field(default_factory=NoiseParams)
    commands: CommandSchedule = field(default_factory=CommandSchedule)
    seed: int = 0
    bcs_rate: float = 0.25
    suspect_bcs_rate: float = 1.0
    nl_capacity: int = 50
    nl_low_watermark: int = 35
    nl_reply_size: int = 10
    announcement_k: int = 25
    delta_min: int = 5
    delta_max: int = 20
    inactivity_cycles: int = 3
    response_timeout: int = MINUTE
    coverage_window: int = 12 * HOUR
    # check overlay invariants after every event (slow)
    debug: bool = False

    @property
    def inactivity_timeout(self) -> int:
        return self.inactivity_cycles * self.mm_cycle

    def baseline(self) -> "SimConfig":
        return replace(self, trust=None)

    def validate(self) -> "SimConfig":
        if self.n_bots < 2:
            raise ConfigError("n_bots must be >= 2")
        if not 0 <= self.n_sensors <= self.n_bots:
            raise ConfigError("n_sensors must satisfy 0 <= n_sensors <= n_bots")
        for name, value in (("p_loss", self.noise.p_loss), ("p_corrupt", self.noise.p_corrupt),
                            ("bcs_rate", self.bcs_rate),
                            ("suspect_bcs_rate", self.suspect_bcs_rate), ("seed_fraction", self.commands.seed_fraction)):
            if not 0.0 <= value <= 1.0:
                raise ConfigError(f"{name}={value} must lie in [0, 1]")
        if self.noise.p_loss + self.noise.p_corrupt > 1.0:
            raise ConfigError("p_loss + p_corrupt must not exceed 1")
        for name, value in (("duration", self.duration), ("mm_cycle", self.mm_cycle),
                            ("mean_online", self.churn.mean_online), ("mean_offline", self.churn.mean_offline),
                            ("interval", self.commands.interval), ("latency", self.noise.latency),
                            ("response_timeout", self.response_timeout),
                            ("coverage_window", self.coverage_window)):
            if value <= 0:
                raise ConfigError(f"{name} must be > 0")
        if self.inactivity_cycles < 1:
            raise ConfigError("inactivity_cycles must be >= 1")
        if not 1 <= self.nl_low_watermark <= self.nl_capacity:
            raise ConfigError("need 1 <= nl_low_watermark <= nl_capacity")
        if self.nl_low_watermark > self.n_bots - 1:
            raise ConfigError("nl_low_watermark cannot exceed n_bots - 1")
        if self.response_timeout >= self.mm_cycle:
            raise ConfigError("response_timeout must be shorter than mm_cycle")
        if 2 * self.noise.latency >= self.response_timeout:
            raise ConfigError("round-trip latency must be shorter than response_timeout")
        if not 0 <= self.delta_min <= self.delta_max:
            raise ConfigError("need 0 <= delta_min <= delta_max")
        if self.announcement_k < 0 or self.nl_reply_size < 0:
            raise ConfigError("announcement_k and nl_reply_size must be >= 0")
        if self.commands.initial_id < 0:
            raise ConfigError("initial command id must be >= 0")
        return self

    def protocol_params(self) -> ProtocolParams:
        return ProtocolParams(
            mm_cycle=self.mm_cycle,
            inactivity_timeout=self.inactivity_timeout,
            response_timeout=self.response_timeout,
            nl_capacity=self.nl_capacity,
            nl_low_watermark=self.nl_low_watermark,
            nl_reply_size=self.nl_reply_size,
            bcs_rate=self.bcs_rate,
            suspect_bcs_rate=self.suspect_bcs_rate,
            delta_min=self.delta_min,
            delta_max=self.delta_max,
            trust=self.trust,
        )


@dataclass(frozen=True)
class MetricsSample:
    time: int
    per_sensor_in_degree: Tuple[int, ...]
    mean_sensor_in_degree: float
    blacklist_tp: int
    blacklist_fp: int
    online_bots: int
    isolated_bots: int
    newest_command_coverage: float


@dataclass(frozen=True)
class BlacklistEvent:
    observer: int
    target: int
    time: int
    score: float
    target_is_sensor: bool


@dataclass(frozen=True)
class TransportStats:
    sent: int = 0
    delivered: int = 0
    lost: int = 0
    corrupted: int = 0
    dropped_offline: int = 0


@dataclass
class RunSummary:
    final_mean_sensor_in_degree: float
    precision: Optional[float]
    recall: Optional[float]
    total_blacklist_events: int
    runtime_wall_clock: float
    baseline_final_mean_in_degree: Optional[float] = None
    reduction_pct: Optional[float] = None

    def paired_with(self, baseline: "RunSummary") -> "RunSummary":
        base = baseline.final_mean_sensor_in_degree
        reduction = 100.0 * (1.0 - self.final_mean_sensor_in_degree / base) if base > 0 else None
        return replace(self, baseline_final_mean_in_degree=base, reduction_pct=reduction)


@dataclass
class RunResult:
    config: SimConfig
    sensor_ids: Tuple[int, ...]
    samples: List[MetricsSample]
    events: List[BlacklistEvent]
    summary: RunSummary
    transport: TransportStats
    coverage_checks: List[Tuple[int, float]]
    sensor_logs: Dict[int, Dict[int, int]]
    non_participation_violations: int
    injections: List[Tuple[int, int]]
    # (bot, sensor) -> BCS probes the bot sent to that sensor
    sensor_probe_counts: Dict[Tuple[int, int], int] = field(default_factory=dict)
    # (bot, sensor) -> BCS outcomes the bot actually recorded; probes cut off
    # by churn or the end of the run never produce one
    sensor_outcome_counts: Dict[Tuple[int, int], int] = field(default_factory=dict)


def transport(msg: Message, noise: NoiseParams, rng: random.Random) -> Tuple[str, Optional[Message]]:
    """Decide the fate of one message: ``delivered``, ``lost`` or ``corrupted``.

    A corrupted message that carries a command arrives with a damaged
    payload; one without a payload cannot be parsed and is discarded.
    """
    r = rng.random()
    if r < noise.p_loss:
        return "lost", None
    if r < noise.p_loss + noise.p_corrupt:
        return _corrupt(msg)
    return "delivered", msg


def _corrupt(msg: Message) -> Tuple[str, Optional[Message]]:
    cmd = carried_command(msg)
    if cmd is None:
        return "corrupted", None
    if isinstance(msg, HelloReply):
        return "corrupted", HelloReply(msg.sender, msg.receiver, msg.sent_at, msg.command_id, cmd.corrupted())
    return "corrupted", CommandUpdate(msg.sender, msg.receiver, msg.sent_at, cmd.corrupted())


def session_length(online: bool, churn: ChurnParams, rng: random.Random) -> int:
    """Length in seconds of the next on (or off) session, exponentially distributed."""
    mean = churn.mean_online if online else churn.mean_offline
    return max(1, int(round(rng.expovariate(1.0 / mean))))


def command_payload(command_id: int, seed: int) -> bytes:
    return hashlib.sha256(f"command:{seed}:{command_id}".encode()).digest()


def _stream(seed: int, label: str) -> random.Random:
    return random.Random(f"{seed}:{label}")


class Simulation:
    """Single run of the overlay. Build with a config, then call :meth:`run`."""

    def __init__(self, config: SimConfig):
        self.config = config.validate()
        self.params = config.protocol_params()
        self.now = 0
        self._heap: List[tuple] = []
        self._seq = 0
        seed = config.seed
        self._transport_rng = _stream(seed, "transport")
        self._churn_rng = _stream(seed, "churn")
        self._master_rng = _stream(seed, "botmaster")
        self._boot_rng = _stream(seed, "bootstrap")

        self.command = CommandState.create(config.commands.initial_id, command_payload(config.commands.initial_id, seed))
        self.bots = [BotState(i, self.command, _stream(seed, f"bot:{i}")) for i in range(config.n_bots)]
        self.sensors = [
            SensorState(config.n_bots + j, config.sensor_strategy, _stream(seed, f"sensor:{j}"))
            for j in range(config.n_sensors)
        ]
        self.sensor_ids = tuple(s.id for s in self.sensors)
        self._session = [0] * config.n_bots
        self._next_churn = [0] * config.n_bots

        self.samples: List[MetricsSample] = []
        self.events: List[BlacklistEvent] = []
        self.coverage_checks: List[Tuple[int, float]] = []
        self.injections: List[Tuple[int, int]] = []
        self._tp = 0
        self._fp = 0
        self._sent = self._delivered = self._lost = self._corrupted = self._dropped = 0
        self._violations = 0
        self._sensor_probes: Dict[Tuple[int, int], int] = {}

    # -- scheduling -------------------------------------------------------

    def _schedule(self, at: int, kind: int, arg=None) -> None:
        self._seq += 1
        heapq.heappush(self._heap, (at, self._seq, kind, arg))

    def _send(self, msgs: List[Message]) -> None:
        """Push ``msgs`` through the lossy channel; survivors arrive together."""
        if not msgs:
            return
        noise = self.config.noise
        p_loss = noise.p_loss
        p_bad = p_loss + noise.p_corrupt
        draw = self._transport_rng.random
        n_bots = self.config.n_bots
        batch = []
        lost = corrupted = 0
        # same decision rule as transport(), unrolled for the hot path
        for msg in msgs:
            if msg.sender >= n_bots:
                cmd = carried_command(msg)
                if cmd is not None and cmd.is_valid():
                    self._violations += 1
            r = draw()
            if r >= p_bad:
                batch.append(msg)
            elif r < p_loss:
                lost += 1
            else:
                corrupted += 1
                _, arrived = _corrupt(msg)
                if arrived is not None:
                    batch.append(arrived)
        self._sent += len(msgs)
        self._lost += lost
        self._corrupted += corrupted
        self._delivered += len(msgs) - lost - corrupted
        if batch:
            self._schedule(self.now + noise.latency, _DELIVER, batch)

    def _record(self, hit) -> None:
        is_sensor = hit.target >= self.config.n_bots
        if is_sensor:
            self._tp += 1
        else:
            self._fp += 1
        self.events.append(BlacklistEvent(hit.observer, hit.target, hit.time, hit.score, is_sensor))

    # -- setup ------------------------------------------------------------

    def _bootstrap(self) -> None:
        cfg = self.config
        rng = self._boot_rng
        n = cfg.n_bots
        order = list(range(n))
        rng.shuffle(order)
        # ring over a random permutation keeps the initial overlay connected
        for i in range(n):
            a, b = order[i], order[(i + 1) % n]
            self.bots[a].add_neighbor(b, 0, cfg.nl_capacity)
            self.bots[b].add_neighbor(a, 0, cfg.nl_capacity)
        for bot in self.bots:
            while len(bot.nl) < cfg.nl_low_watermark:
                bot.add_neighbor(rng.randrange(n), 0, cfg.nl_capacity)

        p_online = cfg.churn.mean_online / (cfg.churn.mean_online + cfg.churn.mean_offline)
        crng = self._churn_rng
        for bot in self.bots:
            bot.online = crng.random() < p_online
            self._next_churn[bot.id] = session_length(bot.online, cfg.churn, crng)
            self._schedule(self._next_churn[bot.id], _CHURN, bot.id)
            if bot.online:
                self._schedule(rng.randrange(cfg.mm_cycle), _TICK, (bot.id, 0))

        online = [b.id for b in self.bots if b.online]
        for sensor in self.sensors:
            self._send(sensor_join(sensor, online, cfg.announcement_k, sensor.rng, 0))

        self._schedule(0, _SAMPLE)
        self._schedule(cfg.commands.interval, _BOTMASTER)

    # -- event handlers ---------------------------------------------------

    def _deliver(self, batch: List[Message]) -> None:
        now = self.now
        params = self.params
        bots = self.bots
        n = self.config.n_bots
        out: List[Message] = []
        for msg in batch:
            rid = msg.receiver
            if rid >= n:
                self._deliver_to_sensor(self.sensors[rid - n], msg, out)
                continue
            bot = bots[rid]
            if not bot.online:
                self._dropped += 1
                continue
            kind = type(msg)
            if kind is Hello:
                reply = handle_hello(bot, msg, now, params)
                if reply is not None:
                    out.append(reply)
            elif kind is HelloReply:
                extra, hit = handle_hello_reply(bot, msg, now, params)
                if extra:
                    out.extend(extra)
                if hit is not None:
                    self._record(hit)
            elif kind is NLRequest:
                reply = handle_nl_request(bot, msg, now, params)
                if reply is not None:
                    out.append(reply)
            elif kind is NLReply:
                handle_nl_reply(bot, msg, now, params)
            else:
                handle_command_update(bot, msg)
        self._send(out)

    def _deliver_to_sensor(self, sensor: SensorState, msg: Message, out: List[Message]) -> None:
        now = self.now
        kind = type(msg)
        if kind is Hello:
            reply = sensor_handle_hello(sensor, msg, now)
            if reply is not None:
                out.append(reply)
        elif kind is NLRequest:
            out.append(sensor_handle_nl_request(sensor, msg, now, self.params.nl_reply_size))
        elif kind is HelloReply:
            sensor.observe(msg.sender, now, msg.command_id)
        elif kind is CommandUpdate:
            sensor.observe(msg.sender, now, msg.command.command_id)
        else:
            sensor.observe(msg.sender, now)

    def _tick(self, bot_id: int, session: int) -> None:
        bot = self.bots[bot_id]
        if not bot.online or self._session[bot_id] != session:
            return
        now = self.now
        msgs = mm_cycle_tick(bot, now, self.params)
        nl = bot.nl
        for sid in self.sensor_ids:
            entry = nl.get(sid)
            if entry is not None and entry.pending is not None and entry.pending.is_bcs \
                    and entry.pending.sent_at == now:
                key = (bot_id, sid)
                self._sensor_probes[key] = self._sensor_probes.get(key, 0) + 1
        if any(type(m) is Hello for m in msgs):
            self._schedule(self.now + self.params.response_timeout, _SWEEP, (bot_id, session))
        self._send(msgs)
        self._schedule(self.now + self.config.mm_cycle, _TICK, (bot_id, session))

    def _sweep(self, bot_id: int, session: int) -> None:
        bot = self.bots[bot_id]
        if not bot.online or self._session[bot_id] != session:
            return
        resolve_timeouts(bot, self.now, self.params)

    def _churn(self, bot_id: int) -> None:
        bot = self.bots[bot_id]
        self._session[bot_id] += 1
        if bot.online:
            bot.go_offline()
        else:
            bot.go_online(self.now)
            self._schedule(self.now, _TICK, (bot_id, self._session[bot_id]))
        self._next_churn[bot_id] = self.now + session_length(bot.online, self.config.churn, self._churn_rng)
        self._schedule(self._next_churn[bot_id], _CHURN, bot_id)

    def _botmaster(self) -> None:
        cfg = self.config
        new_id = self.command.command_id + 1
        self.command = CommandState.create(new_id, command_payload(new_id, cfg.seed))
        for bot_id in botmaster_targets(self.bots, cfg.commands.seed_fraction, self._master_rng):
            self.bots[bot_id].command = self.command
        self.injections.append((self.now, new_id))
        self._schedule(self.now + cfg.coverage_window, _COVERAGE, new_id)
        self._schedule(self.now + cfg.commands.interval, _BOTMASTER)

    def _coverage(self, command_id: int) -> None:
        online = [b for b in self.bots if b.online]
        covered = sum(1 for b in online if b.command.command_id >= command_id)
        self.coverage_checks.append((self.now, covered / len(online) if online else 1.0))

    def compute_metrics(self) -> MetricsSample:
        bots = self.bots
        degrees = tuple(sum(1 for b in bots if sid in b.nl) for sid in self.sensor_ids)
        mean = sum(degrees) / len(degrees) if degrees else 0.0
        online = [b for b in bots if b.online]
        newest = self.command.command_id
        covered = sum(1 for b in online if b.command.command_id == newest)
        return MetricsSample(
            time=self.now,
            per_sensor_in_degree=degrees,
            mean_sensor_in_degree=mean,
            blacklist_tp=self._tp,
            blacklist_fp=self._fp,
            online_bots=len(online),
            isolated_bots=sum(1 for b in online if not b.nl),
            newest_command_coverage=covered / len(online) if online else 1.0,
        )

    def _check_invariants(self) -> None:
        for bot in self.bots:
            overlap = bot.blacklist.intersection(bot.nl)
            if overlap:
                raise AssertionError(f"bot {bot.id}: NL and blacklist share {sorted(overlap)}")
            if len(bot.nl) > self.config.nl_capacity:
                raise AssertionError(f"bot {bot.id}: NL over capacity")

    # -- main loop ----------------------------------------------------------

    def run(self) -> RunResult:
        started = _wallclock.perf_counter()
        cfg = self.config
        self._bootstrap()
        heap = self._heap
        end = cfg.duration
        debug = cfg.debug
        pop = heapq.heappop
        while heap:
            at, _, kind, arg = heap[0]
            if at > end:
                break
            pop(heap)
            if at < self.now:
                raise AssertionError("event scheduled in the past")
            self.now = at
            if kind == _DELIVER:
                self._deliver(arg)
            elif kind == _TICK:
                self._tick(*arg)
            elif kind == _SWEEP:
                self._sweep(*arg)
            elif kind == _CHURN:
                self._churn(arg)
            elif kind == _SAMPLE:
                self.samples.append(self.compute_metrics())
                self._schedule(at + cfg.mm_cycle, _SAMPLE)
            elif kind == _BOTMASTER:
                self._botmaster()
            else:
                self._coverage(arg)
            if debug:
                self._check_invariants()
        return self._result(_wallclock.perf_counter() - started)

    def _result(self, elapsed: float) -> RunResult:
        final = self.samples[-1].mean_sensor_in_degree if self.samples else 0.0
        total = self._tp + self._fp
        precision = self._tp / total if total else None
        pairs = {(e.observer, e.target) for e in self.events if e.target_is_sensor}
        contacted = sum(
            1 for s in self.sensors for peer in s.observed_peers if peer < self.config.n_bots
        )
        recall = len(pairs) / contacted if contacted else None
        summary = RunSummary(final, precision, recall, total, elapsed)
        stats = TransportStats(self._sent, self._delivered, self._lost, self._corrupted, self._dropped)
        return RunResult(
            config=self.config,
            sensor_ids=self.sensor_ids,
            samples=self.samples,
            events=self.events,
            summary=summary,
            transport=stats,
            coverage_checks=self.coverage_checks,
            sensor_logs={s.id: dict(s.observed_peers) for s in self.sensors},
            non_participation_violations=self._violations,
            injections=self.injections,
            sensor_probe_counts=dict(self._sensor_probes),
            sensor_outcome_counts={
                (b.id, sid): b.outcome_counts[sid]
                for b in self.bots for sid in self.sensor_ids if sid in b.outcome_counts
            },
        )


def botmaster_targets(bots: List[BotState], seed_fraction: float, rng: random.Random) -> List[int]:
    """Bots that receive a new command directly from the botmaster.

    Online bots are preferred; offline ones only fill up a shortfall.
    """
    k = max(1, int(math.floor(seed_fraction * len(bots) + 0.5))) if seed_fraction > 0 else 0
    online = [b.id for b in bots if b.online]
    if len(online) >= k:
        return sorted(rng.sample(online, k))
    offline = [b.id for b in bots if not b.online]
    return sorted(online + rng.sample(offline, k - len(online)))


def run(config: SimConfig) -> RunResult:
    return Simulation(config).run()
