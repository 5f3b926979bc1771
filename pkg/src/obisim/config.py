"""Scenario configuration: dataclasses plus a strict TOML loader.

A config file has the tables ``[kernel]``, ``[exchange]``, ``[fundamental]``,
``[agents.zi]``, ``[agents.informed]``, ``[agents.obi]`` and ``[harness]``.
Unknown keys are rejected so that typos do not silently fall back to defaults.
"""

from __future__ import annotations

import dataclasses
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from .fundamental import FundamentalParams, kappa_for_half_life
from .kernel import MARKET_CLOSE_NS


class ConfigError(ValueError):
    pass


def _default_delays() -> dict[str, int]:
    return {"zi": 10_000, "informed": 10_000, "obi": 1_000, "exchange": 0}


@dataclass
class KernelConfig:
    seed: int = 1
    jitter_factor: float = 0.5
    jitter_sigma: float = 0.5
    computation_delay: dict[str, int] = field(default_factory=_default_delays)
    market_close_ns: int = MARKET_CLOSE_NS


@dataclass
class ExchangeConfig:
    snapshot_depth: int = 10
    tick_size_cents: int = 1


@dataclass
class FundamentalConfig:
    """Unset values are derived from the trading day length.

    The default reversion is slow (half-life of five trading days) and the
    shock variance gives the fundamental a standard deviation of about 0.5% of
    ``r_bar`` over one day, so what traders learn early in the day still
    matters at the close.
    """

    r_bar_cents: int = 100_000
    kappa: float | None = None
    sigma_s_sq: float | None = None
    megashock_rate_per_day: float = 2.0
    megashock_var: float | None = None  # default: (50 x one-second shock std)^2

    def params(self, seed: int, market_close_ns: int = MARKET_CLOSE_NS) -> FundamentalParams:
        overrides: dict[str, Any] = {"megashock_rate": self.megashock_rate_per_day / market_close_ns}
        overrides["kappa"] = self.kappa if self.kappa is not None else kappa_for_half_life(5 * market_close_ns)
        if self.sigma_s_sq is not None:
            overrides["sigma_s_sq"] = self.sigma_s_sq
        else:
            overrides["sigma_s_sq"] = (0.005 * self.r_bar_cents) ** 2 / market_close_ns
        if self.megashock_var is not None:
            overrides["megashock_var"] = self.megashock_var
        return FundamentalParams.desk_defaults(r_bar=self.r_bar_cents, seed=seed, **overrides)


@dataclass
class ZIConfig:
    count: int = 50
    q_max: int = 10
    sigma_pv_sq: float = 1e5
    s_max_cents: float = 50
    obs_noise_var: float = 1e6
    arrival_mean_s: float = 60.0
    order_size: int = 100


@dataclass
class InformedConfig:
    count: int = 50
    alpha_cents: float | None = 100  # None ("spread" in TOML): the current spread
    obs_noise_var: float = 1e4
    arrival_mean_s: float = 60.0
    order_size: int = 100
    passive_offset_cents: int = 50


@dataclass
class OBIConfig:
    count: int = 5
    H: float = 0.17
    D: float = 0.085
    L: int = 10
    trade_size: int = 4000
    rearm: bool = True
    order_type: str = "limit"


@dataclass
class AgentsConfig:
    zi: ZIConfig = field(default_factory=ZIConfig)
    informed: InformedConfig = field(default_factory=InformedConfig)
    obi: OBIConfig = field(default_factory=OBIConfig)


@dataclass
class HarnessConfig:
    background_latency_ns: tuple[int, int] = (21_000, 13_000_000)
    obi_latency_ns: tuple[int, int] = (333, 13_000_000)
    obi_latencies: list[int] | None = None  # pin OBI latencies instead of sampling
    days: int = 50
    latency_grid: list[int] | None = None
    record_log: bool = False


@dataclass
class ScenarioConfig:
    kernel: KernelConfig = field(default_factory=KernelConfig)
    exchange: ExchangeConfig = field(default_factory=ExchangeConfig)
    fundamental: FundamentalConfig = field(default_factory=FundamentalConfig)
    agents: AgentsConfig = field(default_factory=AgentsConfig)
    harness: HarnessConfig = field(default_factory=HarnessConfig)

    def validate(self) -> "ScenarioConfig":
        k, a, h = self.kernel, self.agents, self.harness
        if k.market_close_ns <= 0:
            raise ConfigError("kernel.market_close_ns must be positive")
        if k.jitter_factor < 0 or k.jitter_sigma < 0:
            raise ConfigError("jitter parameters must be non-negative")
        for name, ns in k.computation_delay.items():
            if int(ns) < 0:
                raise ConfigError(f"kernel.computation_delay.{name}_ns must be non-negative")
        if self.exchange.snapshot_depth < 1 or self.exchange.tick_size_cents < 1:
            raise ConfigError("exchange.snapshot_depth and exchange.tick_size_cents must be >= 1")
        for fam in ("zi", "informed", "obi"):
            if getattr(a, fam).count < 0:
                raise ConfigError(f"agents.{fam}.count must be non-negative")
        for fam in (a.zi, a.informed):
            if fam.arrival_mean_s <= 0 or fam.order_size < 1 or fam.obs_noise_var < 0:
                raise ConfigError("background arrival mean, order size and noise must be positive")
        if a.zi.q_max < 1 or a.zi.sigma_pv_sq < 0 or a.zi.s_max_cents < 0:
            raise ConfigError("agents.zi.q_max >= 1, sigma_pv_sq >= 0, s_max_cents >= 0 required")
        if a.informed.alpha_cents is not None and a.informed.alpha_cents < 0:
            raise ConfigError("agents.informed.alpha_cents must be non-negative or \"spread\"")
        if not 0 < a.obi.H < 0.5 or a.obi.D <= 0 or a.obi.L < 1 or a.obi.trade_size < 1:
            raise ConfigError("agents.obi requires 0 < H < 0.5, D > 0, L >= 1, trade_size >= 1")
        for name in ("background_latency_ns", "obi_latency_ns"):
            lo, hi = getattr(h, name)
            if lo < 0 or hi < lo:
                raise ConfigError(f"harness.{name} must be a non-negative range [lo, hi]")
        if h.obi_latencies is not None:
            if len(h.obi_latencies) != a.obi.count:
                raise ConfigError("harness.obi_latencies must list one latency per OBI agent")
            if any(x < 0 for x in h.obi_latencies):
                raise ConfigError("OBI latencies must be non-negative")
        if h.days < 1:
            raise ConfigError("harness.days must be at least 1")
        if h.latency_grid is not None and (not h.latency_grid or any(x < 0 for x in h.latency_grid)):
            raise ConfigError("harness.latency_grid must be a non-empty list of non-negative ns")
        f = self.fundamental
        try:
            f.params(k.seed, k.market_close_ns)
        except ValueError as exc:
            raise ConfigError(f"fundamental: {exc}") from None
        return self

    def with_seed(self, seed: int) -> "ScenarioConfig":
        cfg = dataclasses.replace(self, kernel=dataclasses.replace(self.kernel, seed=seed))
        return cfg

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)


def desk_scale(**harness_overrides: Any) -> ScenarioConfig:
    """100 background agents (split evenly), 5 OBI agents, 50 days."""
    cfg = ScenarioConfig()
    for key, value in harness_overrides.items():
        setattr(cfg.harness, key, value)
    return cfg.validate()


def paper_scale() -> ScenarioConfig:
    """1,000 background agents and ten OBI agents."""
    cfg = ScenarioConfig()
    cfg.agents.zi.count = 500
    cfg.agents.informed.count = 500
    cfg.agents.obi.count = 10
    cfg.harness.days = 600
    return cfg.validate()


def _fill(obj: Any, data: dict[str, Any], path: str) -> None:
    known = {f.name: f for f in dataclasses.fields(obj)}
    for key, value in data.items():
        where = f"{path}.{key}" if path else key
        if key not in known:
            raise ConfigError(f"unknown config key '{where}'")
        current = getattr(obj, key)
        if dataclasses.is_dataclass(current):
            if not isinstance(value, dict):
                raise ConfigError(f"'{where}' must be a table")
            _fill(current, value, where)
        elif key == "computation_delay":
            if not isinstance(value, dict):
                raise ConfigError(f"'{where}' must be a table")
            delays = dict(current)
            for dk, dv in value.items():
                if not dk.endswith("_ns"):
                    raise ConfigError(f"'{where}.{dk}' must be named <agent_type>_ns")
                delays[dk[:-3]] = int(dv)
            setattr(obj, key, delays)
        elif key.endswith("_latency_ns"):
            if not (isinstance(value, list) and len(value) == 2):
                raise ConfigError(f"'{where}' must be [lo, hi]")
            setattr(obj, key, (int(value[0]), int(value[1])))
        elif key == "alpha_cents" and isinstance(value, str):
            if value != "spread":
                raise ConfigError(f"'{where}' must be a number or \"spread\"")
            setattr(obj, key, None)
        else:
            if isinstance(value, dict):
                raise ConfigError(f"'{where}' must be a scalar")
            setattr(obj, key, value)


def from_dict(data: dict[str, Any]) -> ScenarioConfig:
    cfg = ScenarioConfig()
    _fill(cfg, data, "")
    return cfg.validate()


def load_config(path: str | Path) -> ScenarioConfig:
    p = Path(path)
    try:
        with p.open("rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {p}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config {p}: {exc}") from None
    return from_dict(data)


__all__ = [
    "AgentsConfig", "ConfigError", "ExchangeConfig", "FundamentalConfig", "HarnessConfig",
    "InformedConfig", "KernelConfig", "OBIConfig", "ScenarioConfig", "ZIConfig",
    "desk_scale", "from_dict", "load_config", "paper_scale",
]
