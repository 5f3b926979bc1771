"""Order book imbalance liquidity trader.

The indicator is the bid share of visible volume in the top ``L`` levels.
Flat, the agent goes long when the indicator exceeds ``0.5 + H`` and short
when it falls below ``0.5 - H``. In a position it trails the most favourable
indicator value seen since entry and exits once the indicator retraces by
``D``. Entries and exits are market orders; only one order is in flight at a
time.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from ..messages import BookSnapshot, ExecutionReportMsg, FillMsg, Side, SubscribeMsg
from .base import TradingAgent


class Position(enum.Enum):
    FLAT = "flat"
    LONG = "long"
    SHORT = "short"


@dataclass
class OBIState:
    H: float = 0.17
    D: float = 0.085
    L: int = 10
    trade_size: int = 100
    position: Position = Position.FLAT
    extreme: float | None = None
    rearm: bool = False
    blocked: Position | None = None

    def __post_init__(self) -> None:
        if not 0.0 < self.H < 0.5:
            raise ValueError(f"entry threshold H must lie in (0, 0.5), got {self.H}")
        if self.D <= 0:
            raise ValueError(f"trailing distance D must be positive, got {self.D}")
        if self.L < 1 or self.trade_size < 1:
            raise ValueError("depth L and trade size must be positive")

    def flatten(self) -> None:
        self.position = Position.FLAT
        self.extreme = None


def obi_indicator(snapshot: BookSnapshot, depth: int | None = None) -> float | None:
    bids = snapshot.bids if depth is None else snapshot.bids[:depth]
    asks = snapshot.asks if depth is None else snapshot.asks[:depth]
    bid_vol = sum(v for _, v in bids)
    total = bid_vol + sum(v for _, v in asks)
    if total == 0:
        return None
    return bid_vol / total


def obi_act(state: OBIState, indicator: float) -> Side | None:
    """Advance the entry / trailing-stop state machine; return the side to trade, if any."""
    if state.position is Position.FLAT:
        if state.blocked is not None and 0.5 - state.H <= indicator <= 0.5 + state.H:
            state.blocked = None
        if indicator > 0.5 + state.H and state.blocked is not Position.LONG:
            state.position = Position.LONG
            state.extreme = indicator
            return Side.BUY
        if indicator < 0.5 - state.H and state.blocked is not Position.SHORT:
            state.position = Position.SHORT
            state.extreme = indicator
            return Side.SELL
        return None
    if state.position is Position.LONG:
        state.extreme = max(state.extreme, indicator)
        if indicator <= state.extreme - state.D:
            state.flatten()
            if state.rearm:
                state.blocked = Position.LONG
            return Side.SELL
        return None
    state.extreme = min(state.extreme, indicator)
    if indicator >= state.extreme + state.D:
        state.flatten()
        if state.rearm:
            state.blocked = Position.SHORT
        return Side.BUY
    return None


class OBIAgent(TradingAgent):
    """Trades the imbalance signal toward a target position of -size, 0 or +size.

    With ``order_type="limit"`` each order is a limit at the best opposite
    price in the snapshot that triggered it, i.e. marketable as far as the
    agent knows. If the book moved while the order was in transit the
    remainder rests until the target changes, at which point it is cancelled.
    With ``order_type="market"`` unfilled remainders are cancelled by the
    exchange instead.
    """

    agent_type = "obi"

    def __init__(self, agent_id: int, rng: np.random.Generator | None = None, H: float = 0.17,
                 D: float = 0.085, L: int = 10, trade_size: int = 100, rearm: bool = False,
                 order_type: str = "limit"):
        super().__init__(agent_id, rng)
        if order_type not in ("limit", "market"):
            raise ValueError(f"order_type must be 'limit' or 'market', got {order_type!r}")
        self.state = OBIState(H, D, L, trade_size, rearm=rearm)
        self.order_type = order_type
        self.open_order: int | None = None
        self.open_side: Side | None = None
        self.open_remaining = 0
        self.in_flight = False
        self.entries = 0
        self.exits = 0

    def kernel_starting(self, now: int) -> None:
        self.send(self.exchange_id, SubscribeMsg(self.state.L))

    def target_position(self) -> int:
        pos = self.state.position
        if pos is Position.LONG:
            return self.state.trade_size
        if pos is Position.SHORT:
            return -self.state.trade_size
        return 0

    def on_snapshot(self, now: int, snap: BookSnapshot) -> None:
        indicator = obi_indicator(snap, self.state.L)
        if indicator is None:
            return
        was_flat = self.state.position is Position.FLAT
        side = obi_act(self.state, indicator)
        if side is not None:
            if was_flat:
                self.entries += 1
            else:
                self.exits += 1
        self._reconcile(snap)

    def _reconcile(self, snap: BookSnapshot) -> None:
        if self.in_flight:
            return
        need = self.target_position() - self.portfolio.shares
        if self.open_order is not None:
            if need and self.open_side == (Side.BUY if need > 0 else Side.SELL) and self.open_remaining == abs(need):
                return
            self.cancel(self.open_order)
            self.in_flight = True
            return
        if need == 0:
            return
        side = Side.BUY if need > 0 else Side.SELL
        qty = abs(need)
        if self.order_type == "market":
            self.open_order = self.place_market(side, qty)
        else:
            levels = snap.asks if side is Side.BUY else snap.bids
            if not levels:
                return
            self.open_order = self.place_limit(side, qty, levels[0][0])
        self.open_side = side
        self.open_remaining = qty
        self.in_flight = True

    def on_execution(self, now: int, report: ExecutionReportMsg) -> None:
        if report.order_id != self.open_order:
            return
        self.in_flight = False
        if report.resting == 0:
            self.open_order = None
            self.open_side = None
        self.open_remaining = report.resting

    def receive(self, now: int, msg) -> None:
        body = msg.body
        if type(body) is FillMsg and body.order_id == self.open_order:
            self.open_remaining = body.remaining
        super().receive(now, msg)

    def on_order_done(self, now: int, order_id: int) -> None:
        if order_id == self.open_order:
            self.open_order = None
            self.open_side = None
            self.open_remaining = 0
            self.in_flight = False
