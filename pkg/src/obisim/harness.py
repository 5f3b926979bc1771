"""Build and run seeded market days and the latency experiments.

Agent ids are laid out deterministically: the exchange is 0, then ZI agents,
informed agents and finally OBI agents. Every random stream is derived from
the day seed plus a label and agent id, so the background population of a
given day is identical no matter what latencies the OBI agents are given.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .agents import InformedAgent, OBIAgent, ZIAgent
from .config import ConfigError, ScenarioConfig
from .exchange import EXCHANGE_ID, ExchangeAgent
from .fundamental import FundamentalSeries
from .kernel import NS_PER_S, EventLog, Kernel, LatencyModel
from .streams import derive_rng

log = logging.getLogger(__name__)

RESULT_HEADER = ("day_seed", "agent_id", "agent_type", "latency_ns", "latency_rank", "mtm_profit_cents")


@dataclass(frozen=True)
class AgentResult:
    agent_id: int
    agent_type: str
    latency_ns: int
    latency_rank: int | None
    mtm_profit_cents: int


@dataclass
class DayResult:
    day_seed: int
    rows: list[AgentResult]
    mark_price: int
    rank_ties: bool = False
    grid_latency_ns: int | None = None
    events: int = 0
    messages: int = 0
    trades: int = 0
    wall_seconds: float = 0.0
    event_log: EventLog | None = field(default=None, repr=False)
    tape: list[str] | None = field(default=None, repr=False)
    fundamental_trace: list[str] | None = field(default=None, repr=False)

    def obi_rows(self) -> list[AgentResult]:
        return [r for r in self.rows if r.latency_rank is not None]

    def csv_lines(self, header: bool = True) -> list[str]:
        lines = [",".join(RESULT_HEADER)] if header else []
        for r in self.rows:
            rank = "" if r.latency_rank is None else str(r.latency_rank)
            lines.append(f"{self.day_seed},{r.agent_id},{r.agent_type},{r.latency_ns},{rank},{r.mtm_profit_cents}")
        return lines


def results_csv(days: Iterable[DayResult]) -> str:
    lines = [",".join(RESULT_HEADER)]
    for day in days:
        lines.extend(day.csv_lines(header=False))
    return "\n".join(lines) + "\n"


def latency_ranks(latencies: dict[int, int]) -> tuple[dict[int, int], bool]:
    """Rank 1 is the lowest latency; equal latencies are ordered by agent id and reported as a tie."""
    order = sorted(latencies, key=lambda a: (latencies[a], a))
    ranks = {agent: i + 1 for i, agent in enumerate(order)}
    ties = len(set(latencies.values())) < len(latencies)
    return ranks, ties


def _uniform_ns(seed: int, label: str, agent_id: int, bounds: tuple[int, int]) -> int:
    lo, hi = bounds
    return int(derive_rng(seed, label, agent_id).integers(lo, hi, endpoint=True))


def mark_price(exchange: ExchangeAgent, r_bar: int) -> int:
    bid, ask = exchange.book.best_bid(), exchange.book.best_ask()
    if bid is not None and ask is not None:
        return (bid + ask) // 2
    if exchange.book.last_trade is not None:
        return exchange.book.last_trade
    return r_bar


def run_day(cfg: ScenarioConfig, obi_latencies: Sequence[int] | None = None,
            obi_types: Sequence[str] | None = None, record_log: bool | None = None,
            grid_latency_ns: int | None = None) -> DayResult:
    """Simulate one market day from open to close and score every agent."""
    cfg.validate()
    seed = cfg.kernel.seed
    a = cfg.agents
    n_obi = a.obi.count
    if obi_latencies is None:
        obi_latencies = cfg.harness.obi_latencies
    if obi_latencies is not None and len(obi_latencies) != n_obi:
        raise ConfigError(f"expected {n_obi} OBI latencies, got {len(obi_latencies)}")
    if obi_types is not None and len(obi_types) != n_obi:
        raise ConfigError(f"expected {n_obi} OBI type labels, got {len(obi_types)}")
    record = cfg.harness.record_log if record_log is None else record_log
    started = time.perf_counter()

    close = cfg.kernel.market_close_ns
    params = cfg.fundamental.params(seed, close)
    fundamental = FundamentalSeries(params)
    latency = LatencyModel(seed, jitter_factor=cfg.kernel.jitter_factor, jitter_sigma=cfg.kernel.jitter_sigma)
    kernel = Kernel(latency, cfg.kernel.computation_delay, record_log=record)
    exchange = kernel.add_agent(ExchangeAgent(EXCHANGE_ID, cfg.exchange.snapshot_depth, cfg.exchange.tick_size_cents))
    tick = cfg.exchange.tick_size_cents

    next_id = 1
    background = []
    for _ in range(a.zi.count):
        z = a.zi
        agent = ZIAgent(next_id, fundamental, derive_rng(seed, "agent", next_id), z.obs_noise_var,
                        q_max=z.q_max, sigma_pv_sq=z.sigma_pv_sq, s_max=z.s_max_cents,
                        arrival_mean_ns=z.arrival_mean_s * NS_PER_S, order_size=z.order_size,
                        horizon=close, tick=tick)
        background.append(agent)
        next_id += 1
    for _ in range(a.informed.count):
        inf = a.informed
        agent = InformedAgent(next_id, fundamental, derive_rng(seed, "agent", next_id), inf.obs_noise_var,
                              alpha=inf.alpha_cents, passive_offset=inf.passive_offset_cents,
                              arrival_mean_ns=inf.arrival_mean_s * NS_PER_S, order_size=inf.order_size,
                              horizon=close, tick=tick)
        background.append(agent)
        next_id += 1
    for agent in background:
        kernel.add_agent(agent)
        latency.set_distance(agent.id, _uniform_ns(seed, "latency", agent.id, cfg.harness.background_latency_ns))

    obi_agents = []
    for k in range(n_obi):
        agent = OBIAgent(next_id, derive_rng(seed, "agent", next_id), a.obi.H, a.obi.D, a.obi.L, a.obi.trade_size,
                         rearm=a.obi.rearm, order_type=a.obi.order_type)
        kernel.add_agent(agent)
        ns = (obi_latencies[k] if obi_latencies is not None
              else _uniform_ns(seed, "obi_latency", k, cfg.harness.obi_latency_ns))
        latency.set_distance(agent.id, int(ns))
        obi_agents.append(agent)
        next_id += 1

    event_log = kernel.run(until=close)

    mark = mark_price(exchange, params.r_bar)
    ranks, ties = latency_ranks({ag.id: latency.distances[ag.id] for ag in obi_agents})
    if ties:
        log.warning("day %d: tied OBI latencies, ranks broken by agent id", seed)
    rows = []
    for ag in background:
        rows.append(AgentResult(ag.id, ag.agent_type, latency.distances[ag.id], None, ag.mark_to_market(mark)))
    for k, ag in enumerate(obi_agents):
        label = obi_types[k] if obi_types is not None else ag.agent_type
        rows.append(AgentResult(ag.id, label, latency.distances[ag.id], ranks[ag.id], ag.mark_to_market(mark)))
    return DayResult(
        day_seed=seed,
        rows=rows,
        mark_price=mark,
        rank_ties=ties,
        grid_latency_ns=grid_latency_ns,
        events=kernel.iterations,
        messages=kernel.messages_sent,
        trades=len(exchange.tape or ()),
        wall_seconds=time.perf_counter() - started,
        event_log=event_log,
        tape=exchange.tape_lines() if record else None,
        fundamental_trace=fundamental.trace_lines() if record else None,
    )


def _map(fn, jobs: list, workers: int) -> list:
    if workers <= 1 or len(jobs) <= 1:
        return [fn(*job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, *zip(*jobs)))


def day_seeds(base_seed: int, days: int) -> list[int]:
    return [base_seed + d for d in range(days)]


def experiment1_latencies(cfg: ScenarioConfig, day_seed: int, grid_latency: int) -> list[int]:
    """Control at the minimum background latency, experimental agent at the grid
    latency, the others sampled once per day over the background range."""
    n = cfg.agents.obi.count
    if n < 2:
        raise ConfigError("experiment 1 needs at least two OBI agents (control and experimental)")
    others = [_uniform_ns(day_seed, "obi_latency", k, cfg.harness.background_latency_ns) for k in range(2, n)]
    return [cfg.harness.background_latency_ns[0], int(grid_latency), *others]


def _exp1_job(cfg: ScenarioConfig, latencies: list[int], types: list[str], grid: int) -> DayResult:
    return run_day(cfg, latencies, types, grid_latency_ns=grid)


def run_experiment1(base_cfg: ScenarioConfig, latency_grid: Sequence[int] | None = None,
                    days: int | None = None, workers: int = 1) -> list[DayResult]:
    grid = list(latency_grid if latency_grid is not None else (base_cfg.harness.latency_grid or []))
    if not grid:
        raise ConfigError("experiment 1 needs a non-empty latency grid")
    days = base_cfg.harness.days if days is None else days
    n = base_cfg.agents.obi.count
    types = ["obi_control", "obi_experimental"] + ["obi"] * (n - 2)
    jobs = []
    for seed in day_seeds(base_cfg.kernel.seed, days):
        cfg = base_cfg.with_seed(seed)
        for g in grid:
            jobs.append((cfg, experiment1_latencies(cfg, seed, g), types, int(g)))
    return _map(_exp1_job, jobs, workers)


def _exp2_job(cfg: ScenarioConfig) -> DayResult:
    return run_day(cfg, obi_latencies=None)


def run_experiment2(base_cfg: ScenarioConfig, days: int | None = None, workers: int = 1) -> list[DayResult]:
    """Independent days, every OBI latency freshly drawn over the OBI range each day."""
    if base_cfg.agents.obi.count < 2:
        raise ConfigError("experiment 2 needs at least two OBI agents")
    days = base_cfg.harness.days if days is None else days
    cfg0 = base_cfg
    if cfg0.harness.obi_latencies is not None:
        raise ConfigError("experiment 2 samples OBI latencies; unset harness.obi_latencies")
    jobs = [(cfg0.with_seed(s),) for s in day_seeds(base_cfg.kernel.seed, days)]
    return _map(_exp2_job, jobs, workers)


def profits_by_rank(days: Iterable[DayResult]) -> dict[int, list[int]]:
    out: dict[int, list[int]] = {}
    for day in days:
        for r in day.obi_rows():
            out.setdefault(r.latency_rank, []).append(r.mtm_profit_cents)
    return dict(sorted(out.items()))


def obi_latency_profit(days: Iterable[DayResult]) -> tuple[np.ndarray, np.ndarray]:
    lat, prof = [], []
    for day in days:
        for r in day.obi_rows():
            lat.append(r.latency_ns)
            prof.append(r.mtm_profit_cents)
    return np.asarray(lat, dtype=float), np.asarray(prof, dtype=float)
