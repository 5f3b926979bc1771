"""Agent-based market simulation for studying how latency shapes the profits
of order-book-imbalance traders."""

from .config import ConfigError, ScenarioConfig, desk_scale, load_config, paper_scale
from .exchange import ExchangeAgent, LimitOrderBook, Order
from .fundamental import FundamentalParams, FundamentalSeries
from .harness import DayResult, run_day, run_experiment1, run_experiment2
from .kernel import Agent, Kernel, LatencyModel

__version__ = "0.1.0"

__all__ = [
    "Agent", "ConfigError", "DayResult", "ExchangeAgent", "FundamentalParams", "FundamentalSeries",
    "Kernel", "LatencyModel", "LimitOrderBook", "Order", "ScenarioConfig", "desk_scale", "load_config",
    "paper_scale", "run_day", "run_experiment1", "run_experiment2",
]
