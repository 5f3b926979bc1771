"""
Matching orders by price, then time
===================================

Build a book by hand, cross it, and look at what printed.
"""

from obisim.exchange import LimitOrderBook, Order
from obisim.messages import Side

book = LimitOrderBook()

# two sellers at the same price: the older one is first in line
book.submit_limit(Order(1, agent_id=10, side=Side.SELL, quantity=100, price=10_000))
book.submit_limit(Order(2, agent_id=11, side=Side.SELL, quantity=100, price=10_000))
book.submit_limit(Order(3, agent_id=12, side=Side.SELL, quantity=50, price=10_010))
book.submit_limit(Order(4, agent_id=13, side=Side.BUY, quantity=300, price=9_990))

print("before:", book.snapshot(depth=5))

# a buyer willing to pay 100.05 takes the oldest 100.00 ask, then part of the next
trades, rest = book.submit_limit(Order(5, agent_id=20, side=Side.BUY, quantity=150, price=10_005))
for t in trades:
    print(f"  {t.quantity} @ {t.price / 100:.2f} against order {t.resting_order_id}")
print("remainder resting:", rest)

# a market sell walks down the bid side
trades = book.submit_market(Order(6, agent_id=21, side=Side.SELL, quantity=120))
print("market sell fills:", [(t.price, t.quantity) for t in trades])
print("after:", book.snapshot(depth=5))
