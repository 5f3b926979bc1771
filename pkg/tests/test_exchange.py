import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from obisim.exchange import (
    AuthorizationError,
    ExchangeAgent,
    LimitOrderBook,
    Order,
    OrderValidationError,
)
from obisim.kernel import Agent, Kernel, LatencyModel
from obisim.messages import (
    BookSnapshot,
    CancelMsg,
    CancelReportMsg,
    ExecutionReportMsg,
    FillMsg,
    LimitOrderMsg,
    MarketOrderMsg,
    Side,
    SubscribeMsg,
)

from reference_matcher import random_ops, replay_both

BUY, SELL = Side.BUY, Side.SELL


def lim(oid, side, qty, price, agent=1):
    return Order(oid, agent, side, qty, price)


def mkt(oid, side, qty, agent=1):
    return Order(oid, agent, side, qty)


def test_partial_fill_at_resting_price():
    b = LimitOrderBook()
    b.submit_limit(lim(1, SELL, 100, 10_000))
    trades, rest = b.submit_limit(lim(2, BUY, 50, 10_005))
    assert [(t.price, t.quantity) for t in trades] == [(10_000, 50)]
    assert rest is None
    assert b.snapshot(10).asks == ((10_000, 50),)


def test_oldest_order_at_a_level_trades_first():
    b = LimitOrderBook()
    b.submit_limit(lim(1, SELL, 70, 10_000, agent=1))
    b.submit_limit(lim(2, SELL, 30, 10_000, agent=2))
    trades, _ = b.submit_limit(lim(3, BUY, 70, 10_000))
    assert [(t.resting_order_id, t.quantity) for t in trades] == [(1, 70)]
    assert b.resting_order(2).remaining == 30


def test_non_crossing_limit_rests():
    b = LimitOrderBook()
    b.submit_limit(lim(1, SELL, 10, 10_000))
    trades, rest = b.submit_limit(lim(2, BUY, 10, 9_999))
    assert trades == [] and rest is not None
    assert b.best_bid() == 9_999


def test_market_order_walks_levels():
    b = LimitOrderBook()
    b.submit_limit(lim(1, SELL, 50, 10_000))
    b.submit_limit(lim(2, SELL, 50, 10_010))
    trades = b.submit_market(mkt(3, BUY, 80))
    assert [(t.price, t.quantity) for t in trades] == [(10_000, 50), (10_010, 30)]


def test_market_order_on_empty_book_is_cancelled():
    b = LimitOrderBook()
    order = mkt(1, BUY, 100)
    assert b.submit_market(order) == []
    assert order.cancelled == 100 and order.remaining == 0


def test_market_sell_against_bid():
    b = LimitOrderBook()
    b.submit_limit(lim(1, BUY, 100, 9_990))
    trades = b.submit_market(mkt(2, SELL, 10))
    assert [(t.price, t.quantity) for t in trades] == [(9_990, 10)]
    assert b.snapshot(1).bids == ((9_990, 90),)


def test_market_remainder_cancelled_not_rested():
    b = LimitOrderBook()
    b.submit_limit(lim(1, SELL, 10, 10_000))
    order = mkt(2, BUY, 25)
    b.submit_market(order)
    assert order.cancelled == 15
    assert b.best_bid() is None and b.best_ask() is None


@pytest.mark.parametrize("qty,price", [(0, 100), (-5, 100), (10, 0), (10, -1), (1.5, 100)])
def test_invalid_limit_rejected_without_mutation(qty, price):
    b = LimitOrderBook()
    b.submit_limit(lim(1, SELL, 10, 10_000))
    with pytest.raises(OrderValidationError):
        b.submit_limit(lim(2, BUY, qty, price))
    assert b.snapshot(5).asks == ((10_000, 10),)
    assert b.best_bid() is None


def test_off_tick_price_rejected():
    b = LimitOrderBook(tick_size=5)
    with pytest.raises(OrderValidationError):
        b.submit_limit(lim(1, BUY, 1, 10_002))


def test_market_with_price_rejected():
    b = LimitOrderBook()
    with pytest.raises(OrderValidationError):
        b.submit_market(Order(1, 1, BUY, 10, 10_000))


def test_cancel_returns_unfilled_remainder_and_is_idempotent():
    b = LimitOrderBook()
    b.submit_limit(lim(1, SELL, 100, 10_000))
    b.submit_market(mkt(2, BUY, 40, agent=2))
    assert b.cancel(1, 1) == 60
    assert b.best_ask() is None
    assert b.cancel(1, 1) == 0
    assert b.cancel(1, 12345) == 0


def test_cancel_of_foreign_order_is_unauthorized():
    b = LimitOrderBook()
    b.submit_limit(lim(1, SELL, 100, 10_000, agent=1))
    with pytest.raises(AuthorizationError):
        b.cancel(2, 1)
    assert b.resting_order(1).remaining == 100


def test_snapshot_aggregation_and_truncation():
    b = LimitOrderBook()
    assert b.snapshot(10) == BookSnapshot(0, (), ())
    b.submit_limit(lim(1, BUY, 100, 10_000))
    b.submit_limit(lim(2, BUY, 200, 10_000))
    b.submit_limit(lim(3, SELL, 200, 10_010))
    snap = b.snapshot(10)
    assert snap.bids == ((10_000, 300),) and snap.asks == ((10_010, 200),)
    for i in range(15):
        b.submit_limit(lim(10 + i, BUY, 1, 9_000 + i))
    snap = b.snapshot(10)
    assert len(snap.bids) == 10
    assert snap.bids[0] == (10_000, 300)
    assert [p for p, _ in snap.bids] == sorted((p for p, _ in snap.bids), reverse=True)


def test_self_trade_is_allowed():
    b = LimitOrderBook()
    b.submit_limit(lim(1, SELL, 10, 10_000, agent=7))
    trades, _ = b.submit_limit(lim(2, BUY, 10, 10_000, agent=7))
    assert trades[0].resting_agent == trades[0].incoming_agent == 7


def test_oracle_equivalence_sample():
    rng = np.random.default_rng(42)
    for _ in range(300):
        ops = random_ops(rng)
        (got, got_state, book), (want, want_state) = replay_both(ops)
        assert got == want
        assert got_state == want_state
        assert not book.is_crossed()


op = st.one_of(
    st.tuples(st.just("limit"), st.integers(1, 4), st.sampled_from([1, -1]), st.integers(1, 300), st.integers(9_995, 10_005)),
    st.tuples(st.just("market"), st.integers(1, 4), st.sampled_from([1, -1]), st.integers(1, 400), st.none()),
    st.tuples(st.just("cancel"), st.integers(1, 4), st.integers(1, 60), st.none(), st.none()),
)


def _concrete(raw):
    ops = []
    for i, (kind, agent, a, b, c) in enumerate(raw, start=1):
        if kind == "cancel":
            # ids start at 101 so small targets usually hit a submitted order
            ops.append(("cancel", 100 + a, agent, 0, 0, None))
        else:
            ops.append((kind, 100 + i, agent, a, b, c))
    return ops


@settings(max_examples=300, deadline=None)
@given(st.lists(op, min_size=1, max_size=50))
def test_matches_reference_and_conserves_shares(raw):
    ops = _concrete(raw)
    (got, got_state, book), (want, want_state) = replay_both(ops)
    assert got == want
    assert got_state == want_state
    assert not book.is_crossed()

    submitted = sum(o[4] for o in ops if o[0] != "cancel")
    traded = 2 * sum(q for fills in got if isinstance(fills, list) for _, q, _, _ in fills)
    cancelled = sum(r[1] for r in got if isinstance(r, tuple) and r[1] != "denied")
    resting = sum(rem for lv in got_state.values() for _, q in lv for _, rem in q)
    market_unfilled = 0
    for o, fills in zip(ops, got):
        if o[0] == "market":
            market_unfilled += o[4] - sum(q for _, q, _, _ in fills)
    assert submitted == traded + cancelled + resting + market_unfilled


@settings(max_examples=100, deadline=None)
@given(st.lists(op, min_size=1, max_size=50))
def test_trades_print_at_resting_limit(raw):
    ops = [o for o in _concrete(raw) if o[0] != "cancel"]
    b = LimitOrderBook()
    prices = {}
    for kind, oid, agent, side, qty, price in ops:
        prices[oid] = price
        order = Order(oid, agent, Side(side), qty, price)
        trades = b.submit_limit(order)[0] if kind == "limit" else b.submit_market(order)
        for t in trades:
            assert t.price == prices[t.resting_order_id]
            if price is not None:
                assert (t.price <= price) if side == 1 else (t.price >= price)


# -- exchange agent over the kernel -------------------------------------------


class Client(Agent):
    agent_type = "client"

    def __init__(self, agent_id, script=()):
        super().__init__(agent_id)
        self.script = list(script)
        self.inbox = []

    def kernel_starting(self, now):
        for at, _ in self.script:
            self.set_wakeup(at)

    def wakeup(self, now):
        for at, body in self.script:
            if at == now:
                self.send(0, body)

    def receive(self, now, msg):
        self.inbox.append((now, msg.body))


def _market(clients, distances=None):
    lat = LatencyModel(distances=distances or {}, jitter_factor=0.0)
    k = Kernel(lat)
    ex = k.add_agent(ExchangeAgent())
    for c in clients:
        k.add_agent(c)
    return k, ex


def test_execution_and_fill_reports():
    maker = Client(1, [(1, LimitOrderMsg(1, SELL, 100, 10_000))])
    taker = Client(2, [(5, LimitOrderMsg(2, BUY, 30, 10_000))])
    k, ex = _market([maker, taker])
    k.run()
    fills = [b for _, b in maker.inbox if isinstance(b, FillMsg)]
    assert fills == [FillMsg(1, SELL, 10_000, 30, 70)]
    reports = [b for _, b in taker.inbox if isinstance(b, ExecutionReportMsg)]
    assert reports[0].fills == ((10_000, 30),) and reports[0].resting == 0


def test_rejected_order_reported_not_raised():
    c = Client(1, [(1, LimitOrderMsg(1, BUY, 0, 10_000))])
    k, ex = _market([c])
    k.run()
    (_, rep), = c.inbox
    assert rep.rejected and rep.fills == ()


def test_foreign_cancel_reported_as_rejected():
    a = Client(1, [(1, LimitOrderMsg(1, SELL, 10, 10_000))])
    b = Client(2, [(5, CancelMsg(1))])
    k, ex = _market([a, b])
    k.run()
    rep = [m for _, m in b.inbox if isinstance(m, CancelReportMsg)][0]
    assert rep.cancelled == 0 and rep.rejected
    assert ex.book.resting_order(1).remaining == 10


def test_snapshots_reach_subscribers_after_their_own_latency():
    near = Client(1, [(0, SubscribeMsg(10))])
    far = Client(2, [(0, SubscribeMsg(10))])
    trader = Client(3, [(30_000_000, LimitOrderMsg(1, BUY, 300, 10_000))])
    k, ex = _market([near, far, trader], {1: 333, 2: 13_000_000, 3: 0})
    k.run()
    n = [(t, m) for t, m in near.inbox if m.bids]
    f = [(t, m) for t, m in far.inbox if m.bids]
    assert n[0][1].bids == f[0][1].bids == ((10_000, 300),)
    assert f[0][0] - n[0][0] == 13_000_000 - 333


def test_no_snapshot_without_a_visible_change():
    sub = Client(1, [(0, SubscribeMsg(1))])
    trader = Client(2, [(10, LimitOrderMsg(1, BUY, 100, 10_000)), (20, LimitOrderMsg(2, BUY, 100, 9_000))])
    k, ex = _market([sub, trader])
    ex.snapshot_depth = 1
    k.run()
    snaps = [m for _, m in sub.inbox if isinstance(m, BookSnapshot)]
    # initial empty snapshot, then one for the new best bid; the deeper level is invisible at depth 1
    assert [s.bids for s in snaps] == [(), ((10_000, 100),)]


def test_no_subscribers_no_snapshots():
    trader = Client(1, [(1, LimitOrderMsg(1, BUY, 10, 10_000))])
    k, ex = _market([trader])
    k.run()
    assert not any(isinstance(m, BookSnapshot) for _, m in trader.inbox)
    assert ex.snapshots_published == 0


def test_cancel_emptying_level_updates_snapshot():
    sub = Client(1, [(0, SubscribeMsg(10))])
    trader = Client(2, [(10, LimitOrderMsg(1, SELL, 10, 10_000)), (20, CancelMsg(1))])
    k, ex = _market([sub, trader])
    k.run()
    snaps = [m for _, m in sub.inbox if isinstance(m, BookSnapshot)]
    assert snaps[-1].asks == ()


def test_market_order_message():
    maker = Client(1, [(1, LimitOrderMsg(1, BUY, 100, 9_990))])
    taker = Client(2, [(5, MarketOrderMsg(2, SELL, 150))])
    k, ex = _market([maker, taker])
    k.run()
    rep = [m for _, m in taker.inbox if isinstance(m, ExecutionReportMsg)][0]
    assert rep.fills == ((9_990, 100),) and rep.cancelled == 50
