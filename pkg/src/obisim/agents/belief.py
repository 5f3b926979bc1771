"""Bayesian fundamental-value belief and private value offsets.

Background agents carry a Gaussian belief ``(r_tilde, sigma_tilde_sq)`` about
the current fundamental. On each wake they first roll the belief forward over
the elapsed time under the known mean-reverting dynamics, then fold in a noisy
observation by precision weighting, and finally project the belief to the
market close.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from ..fundamental import FundamentalParams, accumulated_variance, decay_factor


class DegeneratePrecisionError(ZeroDivisionError):
    pass


@dataclass(frozen=True, slots=True)
class ValueBelief:
    r_tilde: float
    sigma_tilde_sq: float
    obs_noise_var: float
    last_wake: int = 0


def belief_advance(b: ValueBelief, now: int, params: FundamentalParams) -> ValueBelief:
    delta = now - b.last_wake
    if delta < 0:
        raise ValueError(f"belief at {b.last_wake} cannot be advanced back to {now}")
    if delta == 0:
        return b
    keep = decay_factor(params.kappa, delta)
    r = (1.0 - keep) * params.r_bar + keep * b.r_tilde
    var = keep * keep * b.sigma_tilde_sq + accumulated_variance(params.kappa, delta, params.sigma_s_sq)
    return ValueBelief(r, var, b.obs_noise_var, now)


def belief_update(b: ValueBelief, obs: float) -> ValueBelief:
    """Precision-weighted combination of the prior mean and one observation."""
    n, s = b.obs_noise_var, b.sigma_tilde_sq
    if math.isinf(n):
        return b
    total = n + s
    if total == 0:
        raise DegeneratePrecisionError("observation noise and belief variance are both zero")
    r = (n / total) * b.r_tilde + (s / total) * obs
    return replace(b, r_tilde=r, sigma_tilde_sq=n * s / total)


def final_estimate(b: ValueBelief, now: int, horizon: int, params: FundamentalParams) -> float:
    """Expected fundamental at ``horizon`` given the belief as of ``now``."""
    keep = decay_factor(params.kappa, max(0, horizon - now))
    return (1.0 - keep) * params.r_bar + keep * b.r_tilde


class PrivateValues:
    """Incremental private values ``theta`` for positions ``-q_max+1 .. q_max``.

    ``theta[q]`` is the extra value of holding the ``q``-th unit; values are
    sorted descending so each additional unit is worth less than the last.
    """

    __slots__ = ("q_max", "theta")

    def __init__(self, q_max: int, theta: np.ndarray):
        if len(theta) != 2 * q_max:
            raise ValueError(f"expected {2 * q_max} private values, got {len(theta)}")
        self.q_max = q_max
        self.theta = np.asarray(theta, dtype=float)

    def value(self, q: int) -> float:
        """The offset attached to unit ``q`` (valid for ``-q_max+1 <= q <= q_max``)."""
        return float(self.theta[q + self.q_max - 1])

    def for_buy(self, position: int) -> float | None:
        """Offset for moving from ``position`` to ``position + 1``, or None at the holding limit."""
        if position >= self.q_max:
            return None
        return self.value(position + 1)

    def for_sell(self, position: int) -> float | None:
        if position <= -self.q_max:
            return None
        return self.value(position)


def private_value_init(q_max: int, sigma_pv_sq: float, rng: np.random.Generator) -> PrivateValues:
    if q_max < 1:
        raise ValueError("q_max must be at least 1")
    if sigma_pv_sq < 0:
        raise ValueError("private value variance must be non-negative")
    draws = rng.normal(0.0, math.sqrt(sigma_pv_sq), 2 * q_max)
    return PrivateValues(q_max, np.sort(draws)[::-1])
