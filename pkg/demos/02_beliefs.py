"""
What a background trader believes
=================================

A mean-reverting fundamental, a noisy observation, and the projection to the close.
"""

import numpy as np

from obisim.agents.belief import ValueBelief, belief_advance, belief_update, final_estimate
from obisim.fundamental import FundamentalParams, FundamentalSeries, kappa_for_half_life
from obisim.kernel import MARKET_CLOSE_NS, NS_PER_S

params = FundamentalParams(r_bar=100_000, kappa=kappa_for_half_life(3_600 * NS_PER_S),
                           sigma_s_sq=2e-7, megashock_rate=0.0)
series = FundamentalSeries(params, start_value=101_000)
rng = np.random.default_rng(0)

belief = ValueBelief(r_tilde=100_000.0, sigma_tilde_sq=1.0, obs_noise_var=1e4)
for minute in (5, 30, 90, 240):
    now = minute * 60 * NS_PER_S
    belief = belief_advance(belief, now, params)
    obs = series.observe(now, belief.obs_noise_var, rng)
    belief = belief_update(belief, obs)
    r_hat = final_estimate(belief, now, MARKET_CLOSE_NS, params)
    print(f"t={minute:4d} min  true={series.value_at(now)}  seen={obs}  "
          f"belief={belief.r_tilde:9.1f} +/- {belief.sigma_tilde_sq ** 0.5:6.1f}  close estimate={r_hat:9.1f}")

# the series is only computed where it was asked for
print("points materialised:", len(series.cache))
