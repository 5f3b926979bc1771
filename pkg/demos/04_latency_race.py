"""
Does being close to the exchange pay?
=====================================

A few independent days with randomly placed imbalance traders; profit by latency rank.
"""

from obisim import desk_scale, run_experiment2
from obisim.analysis import aggregate_by_rank, pearson
from obisim.harness import obi_latency_profit

cfg = desk_scale()
days = run_experiment2(cfg, days=4)

for s in aggregate_by_rank(r for d in days for r in d.obi_rows()):
    print(f"rank {s.group}: mean {s.mean:10.2f}  std {s.std:10.2f}  n={s.n}")

latency, profit = obi_latency_profit(days)
print(f"latency vs profit r = {pearson(latency, profit):.3f}")
