"""Event-driven simulation kernel.

Virtual time is an integer count of nanoseconds since market open. The
kernel jumps from one scheduled event to the next; it never steps through
idle time. All inter-agent communication passes through :meth:`Kernel.send_message`,
which applies computation delay, minimum link latency and jitter.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Any, Iterable, Iterator

from .streams import BufferedLognormal, derive_rng

NS_PER_US = 1_000
NS_PER_MS = 1_000_000
NS_PER_S = 1_000_000_000
MARKET_OPEN_NS = 0
MARKET_CLOSE_NS = 23_400 * NS_PER_S  # 9:30 to 16:00

WAKEUP = 0
MESSAGE = 1
_KIND_NAMES = {WAKEUP: "wakeup", MESSAGE: "message"}


class CausalityError(RuntimeError):
    """An event was scheduled earlier than the current virtual time."""


class ConfigurationError(ValueError):
    """The simulation was wired up inconsistently (unknown agent, bad latency...)."""


@dataclass(frozen=True, slots=True)
class Message:
    sender: int
    recipient: int
    body: Any
    time_sent: int
    time_received: int


class Agent:
    """Base class for anything the kernel can wake or deliver messages to."""

    agent_type = "agent"

    def __init__(self, agent_id: int):
        self.id = agent_id
        self.kernel: Kernel | None = None

    def kernel_starting(self, now: int) -> None:
        """Called once before the first event; schedule initial wakeups here."""

    def wakeup(self, now: int) -> None:
        pass

    def receive(self, now: int, msg: Message) -> None:
        pass

    def send(self, recipient: int, body: Any) -> int:
        return self.kernel.send_message(body, self.id, recipient)

    def set_wakeup(self, at: int) -> int:
        return self.kernel.schedule_wakeup(self.id, at)


class LatencyModel:
    """Minimum link latency plus seeded, non-negative jitter.

    Each agent has a distance (ns) to the exchange, which sits at distance 0;
    ``min_latency(a, b)`` is the sum of the two distances unless an explicit
    pair override is given. Jitter is ``min_latency * jitter_factor * X`` with
    ``X`` a unit-mean lognormal of shape ``jitter_sigma``, drawn from a stream
    owned by the directed link ``(a, b)``.
    """

    def __init__(
        self,
        seed: int = 0,
        distances: dict[int, int] | None = None,
        jitter_factor: float = 0.5,
        jitter_sigma: float = 0.5,
        pair_overrides: dict[tuple[int, int], int] | None = None,
    ):
        if jitter_factor < 0 or jitter_sigma < 0:
            raise ConfigurationError("jitter parameters must be non-negative")
        self.seed = seed
        self.distances: dict[int, int] = {}
        for agent_id, ns in (distances or {}).items():
            self.set_distance(agent_id, ns)
        self.jitter_factor = float(jitter_factor)
        self.jitter_sigma = float(jitter_sigma)
        self.pair_overrides = dict(pair_overrides or {})
        self._streams: dict[tuple[int, int], BufferedLognormal] = {}

    def set_distance(self, agent_id: int, ns: int) -> None:
        if ns < 0:
            raise ConfigurationError(f"negative latency {ns} for agent {agent_id}")
        self.distances[agent_id] = int(ns)

    def min_latency(self, sender: int, recipient: int) -> int:
        override = self.pair_overrides.get((sender, recipient))
        if override is not None:
            return override
        return self.distances.get(sender, 0) + self.distances.get(recipient, 0)

    def jitter(self, sender: int, recipient: int, min_latency: int) -> int:
        if self.jitter_factor == 0.0 or min_latency == 0:
            return 0
        stream = self._streams.get((sender, recipient))
        if stream is None:
            rng = derive_rng(self.seed, "jitter", sender, recipient)
            stream = self._streams[(sender, recipient)] = BufferedLognormal(rng, self.jitter_sigma)
        x = min_latency * self.jitter_factor * stream.draw()
        return math.ceil(x) if x > 0 else 0


@dataclass(frozen=True, slots=True)
class LogRecord:
    seq: int
    fire_time_ns: int
    kind: int
    sender: int | None
    recipient: int
    body: Any

    def fields(self) -> tuple[str, ...]:
        body = self.body
        if self.kind == WAKEUP:
            summary = "wakeup"
        else:
            summary = body.summary() if hasattr(body, "summary") else repr(body)
        sender = "" if self.sender is None else str(self.sender)
        return (str(self.seq), str(self.fire_time_ns), _KIND_NAMES[self.kind],
                sender, str(self.recipient), summary.replace(",", ";"))


class EventLog:
    """Replayable record of every processed event, in processing order."""

    header = ("seq", "fire_time_ns", "kind", "sender", "recipient", "summary")

    def __init__(self) -> None:
        self.records: list[LogRecord] = []

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[LogRecord]:
        return iter(self.records)

    def lines(self) -> Iterable[str]:
        yield ",".join(self.header)
        for rec in self.records:
            yield ",".join(rec.fields())

    def dumps(self) -> str:
        return "\n".join(self.lines()) + "\n"


class Kernel:
    """Single-threaded discrete event scheduler.

    Events are ordered by ``(fire_time, sequence)`` where sequence is a global
    insertion counter, so simultaneous events are processed FIFO.
    """

    def __init__(
        self,
        latency: LatencyModel | None = None,
        computation_delay: dict[str, int] | None = None,
        record_log: bool = True,
    ):
        self.latency = latency or LatencyModel()
        self.computation_delay = dict(computation_delay or {})
        self.agents: dict[int, Agent] = {}
        self.now = MARKET_OPEN_NS
        self.current_agent: int | None = None
        self.iterations = 0
        self.events_scheduled = 0
        self.messages_sent = 0
        self._queue: list[tuple[int, int, int, int, Any]] = []
        self._seq = 0
        self._next_order_id = 1
        self._delay_by_agent: dict[int, int] = {}
        self.log: EventLog | None = EventLog() if record_log else None

    def add_agent(self, agent: Agent) -> Agent:
        if agent.id in self.agents:
            raise ConfigurationError(f"duplicate agent id {agent.id}")
        agent.kernel = self
        self.agents[agent.id] = agent
        self._delay_by_agent[agent.id] = int(self.computation_delay.get(agent.agent_type, 0))
        return agent

    def next_order_id(self) -> int:
        oid = self._next_order_id
        self._next_order_id += 1
        return oid

    def _push(self, at: int, kind: int, target: int, payload: Any) -> int:
        seq = self._seq
        self._seq += 1
        heapq.heappush(self._queue, (at, seq, kind, target, payload))
        self.events_scheduled += 1
        return seq

    def schedule_wakeup(self, agent_id: int, at: int) -> int:
        """Enqueue a wakeup for ``agent_id`` at absolute time ``at``; returns the event sequence."""
        if at < self.now:
            raise CausalityError(f"wakeup for agent {agent_id} at {at} precedes current time {self.now}")
        if agent_id not in self.agents:
            raise ConfigurationError(f"unknown agent {agent_id}")
        return self._push(int(at), WAKEUP, agent_id, None)

    def send_message(self, body: Any, sender: int, recipient: int) -> int:
        """Schedule delivery of ``body`` and return its delivery time.

        time sent = now + computation delay of the sender;
        delivery = time sent + min latency(sender, recipient) + jitter.
        """
        if self.current_agent is not None and sender != self.current_agent:
            raise ConfigurationError(f"agent {sender} sending while agent {self.current_agent} is executing")
        if recipient not in self.agents:
            raise ConfigurationError(f"unknown recipient {recipient}")
        sent = self.now + self._delay_by_agent.get(sender, 0)
        lat = self.latency.min_latency(sender, recipient)
        received = sent + lat + self.latency.jitter(sender, recipient, lat)
        msg = Message(sender, recipient, body, sent, received)
        self._push(received, MESSAGE, recipient, msg)
        self.messages_sent += 1
        return received

    def run(self, until: int = MARKET_CLOSE_NS) -> EventLog | None:
        """Process events in ``(time, sequence)`` order until the queue is empty or time exceeds ``until``."""
        for agent in list(self.agents.values()):
            self.current_agent = agent.id
            agent.kernel_starting(self.now)
        self.current_agent = None

        queue = self._queue
        agents = self.agents
        log = self.log
        pop = heapq.heappop
        while queue:
            if queue[0][0] > until:
                break
            at, seq, kind, target, payload = pop(queue)
            self.now = at
            self.current_agent = target
            self.iterations += 1
            agent = agents[target]
            if kind == WAKEUP:
                if log is not None:
                    log.records.append(LogRecord(seq, at, kind, None, target, None))
                agent.wakeup(at)
            else:
                if log is not None:
                    log.records.append(LogRecord(seq, at, kind, payload.sender, target, payload.body))
                agent.receive(at, payload)
        self.current_agent = None
        return log

    @property
    def pending(self) -> int:
        return len(self._queue)
