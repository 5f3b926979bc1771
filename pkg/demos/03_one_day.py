"""
One simulated trading day
=========================

Run the desk-scale population for a shortened day and see who made money.
"""

from collections import defaultdict

from obisim import desk_scale, run_day

cfg = desk_scale()
cfg.kernel.market_close_ns = 3_600 * 10**9  # one hour keeps the demo quick

day = run_day(cfg.with_seed(5))
print(f"{day.events} events, {day.trades} trades, closing mark {day.mark_price / 100:.2f}")

totals = defaultdict(int)
for row in day.rows:
    totals[row.agent_type] += row.mtm_profit_cents
for kind, cents in sorted(totals.items()):
    print(f"  {kind:9s} {cents / 100:12.2f}")

# the imbalance traders, fastest first
for row in sorted(day.obi_rows(), key=lambda r: r.latency_rank):
    print(f"  rank {row.latency_rank}: {row.latency_ns / 1e6:6.3f} ms  {row.mtm_profit_cents / 100:10.2f}")
