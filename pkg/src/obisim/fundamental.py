"""Sparse mean-reverting fundamental value series.

The series is only materialised at the times it is queried. Between two
queries the discrete mean-reverting process is advanced in closed form over
the elapsed nanoseconds, and any "megashocks" (rare, large news shocks) that
arrived in the interval are added in one lump.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .kernel import MARKET_CLOSE_NS, NS_PER_S
from .streams import derive_rng


class QueryOrderError(RuntimeError):
    """A query went backwards in time to a point that was never cached."""


def decay_factor(kappa: float, delta: int | float) -> float:
    """``(1 - kappa) ** delta`` computed without losing precision for tiny kappa."""
    if delta == 0:
        return 1.0
    if kappa >= 1.0:
        return 0.0
    return math.exp(delta * math.log1p(-kappa))


def accumulated_variance(kappa: float, delta: int | float, sigma_s_sq: float) -> float:
    """Shock variance accumulated over ``delta`` steps of reversion:
    ``sigma_s_sq * (1 - (1-kappa)^(2 delta)) / (1 - (1-kappa)^2)``."""
    if delta == 0 or sigma_s_sq == 0.0:
        return 0.0
    if kappa >= 1.0:
        return sigma_s_sq
    log_keep = math.log1p(-kappa)
    return sigma_s_sq * math.expm1(2.0 * delta * log_keep) / math.expm1(2.0 * log_keep)


def kappa_for_half_life(half_life_ns: float) -> float:
    """Per-ns reversion rate whose deviations halve after ``half_life_ns``."""
    return -math.expm1(-math.log(2.0) / half_life_ns)


@dataclass
class FundamentalParams:
    r_bar: int = 100_000
    kappa: float = kappa_for_half_life(600 * NS_PER_S)
    sigma_s_sq: float = 0.0
    megashock_rate: float = 2.0 / MARKET_CLOSE_NS  # expected arrivals per ns
    megashock_var: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 < self.kappa <= 1.0:
            raise ValueError(f"kappa must lie in (0, 1], got {self.kappa}")
        if self.sigma_s_sq < 0 or self.megashock_var < 0 or self.megashock_rate < 0:
            raise ValueError("variances and shock rate must be non-negative")
        if self.r_bar < 1:
            raise ValueError("r_bar must be a positive number of cents")

    @classmethod
    def desk_defaults(cls, r_bar: int = 100_000, seed: int = 0, **overrides) -> "FundamentalParams":
        """Defaults used by the harness: 10 minute half-life, stationary std 0.5%
        of ``r_bar``, two news shocks a day of 50x the one-second shock std."""
        kappa = overrides.pop("kappa", kappa_for_half_life(600 * NS_PER_S))
        stationary_sd = 0.005 * r_bar
        sigma_s_sq = overrides.pop("sigma_s_sq", stationary_sd ** 2 * kappa * (2.0 - kappa))
        per_second_var = accumulated_variance(kappa, NS_PER_S, sigma_s_sq)
        megashock_var = overrides.pop("megashock_var", 2500.0 * per_second_var)
        return cls(r_bar=r_bar, kappa=kappa, sigma_s_sq=sigma_s_sq,
                   megashock_var=megashock_var, seed=seed, **overrides)


class FundamentalSeries:
    """Lazily generated fundamental value, in integer cents, floored at 1."""

    def __init__(self, params: FundamentalParams, start_value: int | None = None, start_time: int = 0,
                 rng: np.random.Generator | None = None):
        self.params = params
        self.rng = rng if rng is not None else derive_rng(params.seed, "fundamental")
        v0 = params.r_bar if start_value is None else int(start_value)
        self.cache: dict[int, int] = {start_time: max(1, v0)}
        self.last_time = start_time
        self.last_value = self.cache[start_time]
        self.megashocks = 0
        self.queries = 0
        self.trace: list[tuple[int, int]] = []

    def value_at(self, t: int) -> int:
        self.queries += 1
        cached = self.cache.get(t)
        if cached is not None:
            self.trace.append((t, cached))
            return cached
        if t < self.last_time:
            raise QueryOrderError(f"query at {t} precedes latest cached time {self.last_time}")
        p = self.params
        delta = t - self.last_time
        keep = decay_factor(p.kappa, delta)
        mean = (1.0 - keep) * p.r_bar + keep * self.last_value
        var = accumulated_variance(p.kappa, delta, p.sigma_s_sq)
        value = self.rng.normal(mean, math.sqrt(var)) if var > 0 else mean
        if p.megashock_rate > 0 and p.megashock_var > 0:
            k = int(self.rng.poisson(p.megashock_rate * delta))
            if k:
                self.megashocks += k
                value += float(self.rng.normal(0.0, math.sqrt(p.megashock_var), k).sum())
        v = max(1, int(round(value)))
        self.cache[t] = v
        self.last_time = t
        self.last_value = v
        self.trace.append((t, v))
        return v

    def observe(self, t: int, obs_noise_var: float, rng: np.random.Generator) -> int:
        """Noisy reading of the value at ``t``; noise comes from the caller's own stream."""
        if obs_noise_var < 0:
            raise ValueError("observation noise variance must be non-negative")
        v = self.value_at(t)
        if obs_noise_var == 0:
            return v
        return max(1, int(round(v + rng.normal(0.0, math.sqrt(obs_noise_var)))))

    def trace_lines(self) -> list[str]:
        return ["time_ns,value_cents"] + [f"{t},{v}" for t, v in self.trace]
