"""Shared plumbing for trading agents: order placement and fill bookkeeping."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..exchange import EXCHANGE_ID
from ..kernel import Agent, Message
from ..messages import (
    BookSnapshot,
    CancelMsg,
    CancelReportMsg,
    ExecutionReportMsg,
    FillMsg,
    LimitOrderMsg,
    MarketOrderMsg,
    QuoteMsg,
    Side,
)


@dataclass
class PortfolioState:
    cash: int = 0
    shares: int = 0
    starting_cash: int = 0
    open_order_ids: set[int] = field(default_factory=set)
    trades: int = 0

    def apply_fill(self, side: Side, price: int, quantity: int) -> None:
        self.cash -= int(side) * price * quantity
        self.shares += int(side) * quantity
        self.trades += 1


def mark_to_market(p: PortfolioState, mark_price: int) -> int:
    if mark_price <= 0:
        raise ValueError("mark price must be positive")
    return (p.cash - p.starting_cash) + p.shares * mark_price


class TradingAgent(Agent):
    """An agent that trades through the exchange.

    The portfolio changes only when a fill or execution report arrives, never
    when an order is sent.
    """

    def __init__(self, agent_id: int, rng: np.random.Generator | None = None,
                 exchange_id: int = EXCHANGE_ID, starting_cash: int = 0):
        super().__init__(agent_id)
        self.rng = rng if rng is not None else np.random.default_rng(agent_id)
        self.exchange_id = exchange_id
        self.portfolio = PortfolioState(cash=starting_cash, starting_cash=starting_cash)

    # -- order entry -------------------------------------------------------

    def place_limit(self, side: Side, quantity: int, price: int) -> int:
        oid = self.kernel.next_order_id()
        self.portfolio.open_order_ids.add(oid)
        self.send(self.exchange_id, LimitOrderMsg(oid, side, quantity, price))
        return oid

    def place_market(self, side: Side, quantity: int) -> int:
        oid = self.kernel.next_order_id()
        self.portfolio.open_order_ids.add(oid)
        self.send(self.exchange_id, MarketOrderMsg(oid, side, quantity))
        return oid

    def cancel(self, order_id: int) -> None:
        self.send(self.exchange_id, CancelMsg(order_id))

    # -- message handling --------------------------------------------------

    def receive(self, now: int, msg: Message) -> None:
        body = msg.body
        kind = type(body)
        if kind is BookSnapshot:
            self.on_snapshot(now, body)
        elif kind is FillMsg:
            self.portfolio.apply_fill(body.side, body.price, body.quantity)
            if body.remaining == 0:
                self.portfolio.open_order_ids.discard(body.order_id)
                self.on_order_done(now, body.order_id)
        elif kind is ExecutionReportMsg:
            for price, qty in body.fills:
                self.portfolio.apply_fill(body.side, price, qty)
            if body.resting == 0:
                self.portfolio.open_order_ids.discard(body.order_id)
            self.on_execution(now, body)
        elif kind is CancelReportMsg:
            if body.rejected is None:
                self.portfolio.open_order_ids.discard(body.order_id)
                self.on_order_done(now, body.order_id)
        elif kind is QuoteMsg:
            self.on_quote(now, body)

    def on_snapshot(self, now: int, snap: BookSnapshot) -> None:
        pass

    def on_execution(self, now: int, report: ExecutionReportMsg) -> None:
        if report.resting == 0:
            self.on_order_done(now, report.order_id)

    def on_order_done(self, now: int, order_id: int) -> None:
        pass

    def on_quote(self, now: int, quote: QuoteMsg) -> None:
        pass

    def mark_to_market(self, mark_price: int) -> int:
        return mark_to_market(self.portfolio, mark_price)
