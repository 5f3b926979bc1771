"""Background population: zero-intelligence value traders and informed traders.

Both families wake on independent Poisson arrivals, take a noisy look at the
fundamental, update their Bayesian belief and keep at most one open order
(cancel-and-replace on every wake).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..fundamental import FundamentalSeries
from ..kernel import MARKET_CLOSE_NS, NS_PER_S
from ..messages import QuoteMsg, QuoteRequestMsg, Side
from .base import TradingAgent
from .belief import PrivateValues, ValueBelief, belief_advance, belief_update, final_estimate, private_value_init


@dataclass(frozen=True, slots=True)
class OrderIntent:
    side: Side
    price: int | None  # None means a market order
    quantity: int


def _floor_tick(x: float, tick: int) -> int:
    return max(tick, int(math.floor(x / tick)) * tick)


def _ceil_tick(x: float, tick: int) -> int:
    return max(tick, int(math.ceil(x / tick)) * tick)


def zi_act(r_hat: float, pv: PrivateValues, position: int, rng: np.random.Generator,
           s_max: float, quantity: int = 1, tick: int = 1) -> OrderIntent | None:
    """Random-direction limit order priced to leave a non-negative expected surplus.

    ``position`` is in order-size units. Returns None at the holding limit.
    """
    side = Side.BUY if rng.random() < 0.5 else Side.SELL
    if side is Side.BUY:
        offset = pv.for_buy(position)
    else:
        offset = pv.for_sell(position)
    if offset is None:
        return None
    valuation = r_hat + offset
    surplus = rng.uniform(0.0, s_max) if s_max > 0 else 0.0
    if side is Side.BUY:
        price = _floor_tick(valuation - surplus, tick)
    else:
        price = _ceil_tick(valuation + surplus, tick)
    return OrderIntent(side, price, quantity)


def informed_act(r_hat: float, bid: int | None, ask: int | None, alpha: float | None,
                 rng: np.random.Generator, quantity: int = 100, passive_offset: int = 50,
                 tick: int = 1) -> OrderIntent:
    """Directional order toward the estimated final fundamental.

    If the gap between ``r_hat`` and the midpoint exceeds ``alpha`` (default:
    the current spread) the order crosses the spread at the opposite best
    price; otherwise it joins the own-side best price.
    """
    if bid is None or ask is None:
        ref = bid if bid is not None else ask
        gap = 0.0 if ref is None else r_hat - ref
        side = _direction(gap, rng)
        if side is Side.BUY:
            return OrderIntent(side, _floor_tick(r_hat - passive_offset, tick), quantity)
        return OrderIntent(side, _ceil_tick(r_hat + passive_offset, tick), quantity)
    mid = 0.5 * (bid + ask)
    gap = r_hat - mid
    threshold = (ask - bid) if alpha is None else alpha
    side = _direction(gap, rng)
    if abs(gap) > threshold:
        price = ask if side is Side.BUY else bid
    else:
        price = bid if side is Side.BUY else ask
    return OrderIntent(side, price, quantity)


def _direction(gap: float, rng: np.random.Generator) -> Side:
    if gap > 0:
        return Side.BUY
    if gap < 0:
        return Side.SELL
    return Side.BUY if rng.random() < 0.5 else Side.SELL


class BackgroundAgent(TradingAgent):
    def __init__(self, agent_id: int, fundamental: FundamentalSeries, rng: np.random.Generator,
                 obs_noise_var: float, arrival_mean_ns: float = 60 * NS_PER_S,
                 order_size: int = 100, horizon: int = MARKET_CLOSE_NS, initial_belief_var: float = 1.0,
                 tick: int = 1):
        super().__init__(agent_id, rng)
        self.fundamental = fundamental
        self.params = fundamental.params
        self.obs_noise_var = obs_noise_var
        self.arrival_mean_ns = arrival_mean_ns
        self.order_size = order_size
        self.horizon = horizon
        self.tick = tick
        self.belief = ValueBelief(float(self.params.r_bar), initial_belief_var, obs_noise_var, 0)
        self.open_order: int | None = None
        self.wakes = 0

    def kernel_starting(self, now: int) -> None:
        self.belief = ValueBelief(self.belief.r_tilde, self.belief.sigma_tilde_sq, self.obs_noise_var, now)
        self._schedule_next(now)

    def _schedule_next(self, now: int) -> None:
        gap = int(math.ceil(self.rng.exponential(self.arrival_mean_ns)))
        if now + gap < self.horizon:
            self.set_wakeup(now + gap)

    def refresh_belief(self, now: int) -> float:
        b = belief_advance(self.belief, now, self.params)
        obs = self.fundamental.observe(now, self.obs_noise_var, self.rng)
        self.belief = belief_update(b, obs)
        return final_estimate(self.belief, now, self.horizon, self.params)

    def position_units(self) -> int:
        return int(self.portfolio.shares / self.order_size)

    def replace_order(self, intent: OrderIntent | None) -> None:
        if self.open_order is not None:
            self.cancel(self.open_order)
            self.open_order = None
        if intent is not None:
            self.open_order = self.place_limit(intent.side, intent.quantity, intent.price)

    def on_order_done(self, now: int, order_id: int) -> None:
        if order_id == self.open_order:
            self.open_order = None


class ZIAgent(BackgroundAgent):
    """Zero-intelligence value trader with private value offsets."""

    agent_type = "zi"

    def __init__(self, agent_id: int, fundamental: FundamentalSeries, rng: np.random.Generator,
                 obs_noise_var: float, q_max: int = 10, sigma_pv_sq: float = 5e6, s_max: float = 50,
                 **kwargs):
        super().__init__(agent_id, fundamental, rng, obs_noise_var, **kwargs)
        self.s_max = s_max
        self.pv = private_value_init(q_max, sigma_pv_sq, self.rng)

    def wakeup(self, now: int) -> None:
        self.wakes += 1
        r_hat = self.refresh_belief(now)
        intent = zi_act(r_hat, self.pv, self.position_units(), self.rng, self.s_max,
                        self.order_size, self.tick)
        self.replace_order(intent)
        self._schedule_next(now)


class InformedAgent(BackgroundAgent):
    """Directional trader that asks for the current quote before choosing a posture."""

    agent_type = "informed"

    def __init__(self, agent_id: int, fundamental: FundamentalSeries, rng: np.random.Generator,
                 obs_noise_var: float, alpha: float | None = None, passive_offset: int = 50, **kwargs):
        super().__init__(agent_id, fundamental, rng, obs_noise_var, **kwargs)
        self.alpha = alpha
        self.passive_offset = passive_offset
        self._r_hat: float | None = None

    def wakeup(self, now: int) -> None:
        self.wakes += 1
        self._r_hat = self.refresh_belief(now)
        self.send(self.exchange_id, QuoteRequestMsg())
        self._schedule_next(now)

    def on_quote(self, now: int, quote: QuoteMsg) -> None:
        if self._r_hat is None:
            return
        intent = informed_act(self._r_hat, quote.bid, quote.ask, self.alpha, self.rng,
                              self.order_size, self.passive_offset, self.tick)
        self._r_hat = None
        self.replace_order(intent)
