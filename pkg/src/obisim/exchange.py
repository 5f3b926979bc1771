"""Single-security limit order book and the exchange agent that owns it.

Matching is price-time priority: an incoming buy trades against the lowest
ask, oldest order first within a price level, and every trade prints at the
resting order's limit price. Limit order remainders rest; market order
remainders are cancelled.
"""

from __future__ import annotations

import bisect
from collections import deque
from dataclasses import dataclass

from .kernel import Agent, Message
from .messages import (
    BookSnapshot,
    CancelMsg,
    CancelReportMsg,
    ExecutionReportMsg,
    FillMsg,
    LimitOrderMsg,
    MarketOrderMsg,
    QuoteMsg,
    QuoteRequestMsg,
    Side,
    SubscribeMsg,
)

EXCHANGE_ID = 0


class OrderValidationError(ValueError):
    pass


class AuthorizationError(PermissionError):
    pass


@dataclass(slots=True, eq=False)
class Order:
    order_id: int
    agent_id: int
    side: Side
    quantity: int
    price: int | None = None
    remaining: int = -1
    cancelled: int = 0
    stamp: tuple[int, int] = (0, 0)

    def __post_init__(self) -> None:
        if self.remaining < 0:
            self.remaining = self.quantity

    @property
    def filled(self) -> int:
        return self.quantity - self.remaining - self.cancelled


@dataclass(frozen=True, slots=True)
class Trade:
    price: int
    quantity: int
    resting_order_id: int
    incoming_order_id: int
    time: int
    resting_agent: int = -1
    incoming_agent: int = -1
    incoming_side: Side = Side.BUY


class LimitOrderBook:
    def __init__(self, tick_size: int = 1):
        if tick_size < 1:
            raise OrderValidationError("tick size must be a positive number of cents")
        self.tick_size = tick_size
        self._queues: dict[Side, dict[int, deque[Order]]] = {Side.BUY: {}, Side.SELL: {}}
        self._volume: dict[Side, dict[int, int]] = {Side.BUY: {}, Side.SELL: {}}
        # ascending in both cases; best bid is the last element, best ask the first
        self._prices: dict[Side, list[int]] = {Side.BUY: [], Side.SELL: []}
        self._resting: dict[int, Order] = {}
        self._seq = 0
        self.last_trade: int | None = None

    # -- queries -----------------------------------------------------------

    def best_bid(self) -> int | None:
        p = self._prices[Side.BUY]
        return p[-1] if p else None

    def best_ask(self) -> int | None:
        p = self._prices[Side.SELL]
        return p[0] if p else None

    def is_crossed(self) -> bool:
        bid, ask = self.best_bid(), self.best_ask()
        return bid is not None and ask is not None and bid >= ask

    def resting_order(self, order_id: int) -> Order | None:
        return self._resting.get(order_id)

    def levels(self, side: Side) -> list[tuple[int, list[tuple[int, int, int]]]]:
        """Full state of one side, best first: ``[(price, [(order_id, agent_id, remaining), ...]), ...]``."""
        prices = self._prices[side]
        ordered = reversed(prices) if side is Side.BUY else prices
        return [(p, [(o.order_id, o.agent_id, o.remaining) for o in self._queues[side][p]]) for p in ordered]

    def snapshot(self, depth: int, now: int = 0) -> BookSnapshot:
        if depth < 1:
            raise ValueError("snapshot depth must be at least 1")
        bp = self._prices[Side.BUY]
        ap = self._prices[Side.SELL]
        bv = self._volume[Side.BUY]
        av = self._volume[Side.SELL]
        bids = tuple((p, bv[p]) for p in bp[:-depth - 1:-1])
        asks = tuple((p, av[p]) for p in ap[:depth])
        return BookSnapshot(now, bids, asks)

    # -- mutation ----------------------------------------------------------

    def _validate(self, order: Order, limit: bool) -> None:
        if not isinstance(order.quantity, int) or order.quantity <= 0:
            raise OrderValidationError(f"order {order.order_id}: quantity must be a positive integer")
        if limit:
            if order.price is None:
                raise OrderValidationError(f"order {order.order_id}: limit order needs a price")
            if not isinstance(order.price, int) or order.price <= 0:
                raise OrderValidationError(f"order {order.order_id}: price must be a positive integer")
            if order.price % self.tick_size:
                raise OrderValidationError(f"order {order.order_id}: price off the {self.tick_size}c tick grid")
        elif order.price is not None:
            raise OrderValidationError(f"order {order.order_id}: market order must not carry a limit price")
        if order.order_id in self._resting:
            raise OrderValidationError(f"duplicate order id {order.order_id}")

    def _match(self, order: Order, now: int) -> list[Trade]:
        side = order.side
        contra = side.opposite
        prices = self._prices[contra]
        queues = self._queues[contra]
        volume = self._volume[contra]
        limit = order.price
        trades: list[Trade] = []
        while order.remaining and prices:
            best = prices[-1] if contra is Side.BUY else prices[0]
            if limit is not None and (best > limit if side is Side.BUY else best < limit):
                break
            queue = queues[best]
            while order.remaining and queue:
                resting = queue[0]
                qty = min(order.remaining, resting.remaining)
                order.remaining -= qty
                resting.remaining -= qty
                volume[best] -= qty
                trades.append(Trade(best, qty, resting.order_id, order.order_id, now,
                                    resting.agent_id, order.agent_id, side))
                if resting.remaining == 0:
                    queue.popleft()
                    del self._resting[resting.order_id]
            if not queue:
                del queues[best]
                del volume[best]
                if contra is Side.BUY:
                    prices.pop()
                else:
                    prices.pop(0)
        if trades:
            self.last_trade = trades[-1].price
        return trades

    def _rest(self, order: Order, now: int) -> None:
        side = order.side
        price = order.price
        self._seq += 1
        order.stamp = (now, self._seq)
        queue = self._queues[side].get(price)
        if queue is None:
            queue = self._queues[side][price] = deque()
            self._volume[side][price] = 0
            bisect.insort(self._prices[side], price)
        queue.append(order)
        self._volume[side][price] += order.remaining
        self._resting[order.order_id] = order

    def submit_limit(self, order: Order, now: int = 0) -> tuple[list[Trade], Order | None]:
        self._validate(order, limit=True)
        trades = self._match(order, now)
        if order.remaining:
            self._rest(order, now)
            return trades, order
        return trades, None

    def submit_market(self, order: Order, now: int = 0) -> list[Trade]:
        self._validate(order, limit=False)
        trades = self._match(order, now)
        order.cancelled = order.remaining
        order.remaining = 0
        return trades

    def cancel(self, agent_id: int, order_id: int) -> int:
        order = self._resting.get(order_id)
        if order is None:
            return 0
        if order.agent_id != agent_id:
            raise AuthorizationError(f"agent {agent_id} may not cancel order {order_id} of agent {order.agent_id}")
        side, price = order.side, order.price
        queue = self._queues[side][price]
        queue.remove(order)
        qty = order.remaining
        order.cancelled += qty
        order.remaining = 0
        del self._resting[order_id]
        self._volume[side][price] -= qty
        if not queue:
            del self._queues[side][price]
            del self._volume[side][price]
            prices = self._prices[side]
            del prices[bisect.bisect_left(prices, price)]
        return qty


class ExchangeAgent(Agent):
    """Owns the book; answers orders, cancels and quote requests by message.

    After any message that changes the visible top ``snapshot_depth`` levels,
    a :class:`BookSnapshot` is pushed to every subscriber through the kernel,
    so each subscriber sees it after its own link latency and jitter.
    """

    agent_type = "exchange"

    def __init__(self, agent_id: int = EXCHANGE_ID, snapshot_depth: int = 10, tick_size: int = 1,
                 keep_tape: bool = True):
        super().__init__(agent_id)
        self.book = LimitOrderBook(tick_size)
        self.snapshot_depth = snapshot_depth
        self.subscribers: dict[int, int] = {}
        self.tape: list[Trade] | None = [] if keep_tape else None
        self._last_view: tuple | None = None
        self.snapshots_published = 0

    def receive(self, now: int, msg: Message) -> None:
        body = msg.body
        sender = msg.sender
        mutated = False
        if type(body) is LimitOrderMsg:
            order = Order(body.order_id, sender, body.side, body.quantity, body.price)
            try:
                trades, rest = self.book.submit_limit(order, now)
            except OrderValidationError as exc:
                self.send(sender, ExecutionReportMsg(body.order_id, body.side, (), 0, 0, str(exc)))
                return
            self._report(sender, order, trades)
            mutated = True
        elif type(body) is MarketOrderMsg:
            order = Order(body.order_id, sender, body.side, body.quantity)
            try:
                trades = self.book.submit_market(order, now)
            except OrderValidationError as exc:
                self.send(sender, ExecutionReportMsg(body.order_id, body.side, (), 0, 0, str(exc)))
                return
            self._report(sender, order, trades)
            mutated = bool(trades)
        elif type(body) is CancelMsg:
            try:
                qty = self.book.cancel(sender, body.order_id)
            except AuthorizationError as exc:
                self.send(sender, CancelReportMsg(body.order_id, 0, str(exc)))
                return
            self.send(sender, CancelReportMsg(body.order_id, qty))
            mutated = qty > 0
        elif type(body) is QuoteRequestMsg:
            b = self.book
            self.send(sender, QuoteMsg(b.best_bid(), b.best_ask(), b.last_trade))
        elif type(body) is SubscribeMsg:
            self.subscribers[sender] = body.depth
            self.send(sender, self.book.snapshot(body.depth, now))
        if mutated:
            self.publish_on_change(now)

    def _report(self, sender: int, order: Order, trades: list[Trade]) -> None:
        for t in trades:
            resting = self.book.resting_order(t.resting_order_id)
            remaining = resting.remaining if resting is not None else 0
            self.send(t.resting_agent, FillMsg(t.resting_order_id, order.side.opposite, t.price, t.quantity, remaining))
        if self.tape is not None:
            self.tape.extend(trades)
        self.send(sender, ExecutionReportMsg(order.order_id, order.side,
                                             tuple((t.price, t.quantity) for t in trades),
                                             order.remaining, order.cancelled))

    def publish_on_change(self, now: int) -> None:
        if not self.subscribers:
            return
        snap = self.book.snapshot(self.snapshot_depth, now)
        view = (snap.bids, snap.asks)
        if view == self._last_view:
            return
        self._last_view = view
        self.snapshots_published += 1
        for agent_id, depth in self.subscribers.items():
            if depth == self.snapshot_depth:
                self.send(agent_id, snap)
            else:
                self.send(agent_id, self.book.snapshot(depth, now))

    def tape_lines(self) -> list[str]:
        lines = ["time_ns,price_cents,qty,resting_agent,incoming_agent"]
        for t in self.tape or ():
            lines.append(f"{t.time},{t.price},{t.quantity},{t.resting_agent},{t.incoming_agent}")
        return lines
