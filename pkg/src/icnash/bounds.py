"""Opponent-independent lower bounds on partial-knowledge rates.

Moving the inner expectation inside the logarithm and charging every
opponent its full budget gives a bound that depends on a user's own
policy only.  Its maximiser is a water-filling allocation on the
corresponding worst-case floors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import Info
from .errors import VisibilityMismatch, ZeroDirectGain
from .game import GameSpec, PowerPolicy, StrategyProfile, rates, sum_rate
from .projection import project_budget

__all__ = ["BoundProfile", "BoundReport", "bound_floors", "lower_bound_rate",
           "lower_bound_maximizer", "lower_bound_profile", "ne_vs_bound_report"]


def bound_floors(i: int, game: GameSpec) -> np.ndarray:
    """Worst-case floor of user ``i`` in each of its visible states."""
    if game.info is Info.FULL:
        raise VisibilityMismatch("no lower bound is defined under full knowledge")
    if min(game.channel.direct.values) == 0:
        raise ZeroDirectGain("a direct gain of zero has no finite floor")
    budgets = np.asarray(game.budgets)
    others = np.arange(game.n_users) != i
    space = game.visible_spaces[i]
    if game.info is Info.INCIDENT:
        incident = space.states
        noise = 1.0 + incident[:, others] @ budgets[others]
        return noise / incident[:, i]
    noise = 1.0 + game.channel.cross.mean * budgets[others].sum()
    return noise / space.states


def _check_policy(i: int, policy: PowerPolicy, game: GameSpec) -> np.ndarray:
    if policy.visibility.kind is not game.info or policy.user != i:
        raise VisibilityMismatch("policy does not match the game or user")
    p = np.asarray(policy.powers, float)
    if p.shape != (game.n_visible,):
        raise VisibilityMismatch("policy length does not match visible space")
    return p


def lower_bound_rate(i: int, policy: PowerPolicy, game: GameSpec) -> float:
    floors = bound_floors(i, game)
    p = _check_policy(i, policy, game)
    return float(game.visible_weights[i] @ np.log1p(p / floors))


def lower_bound_maximizer(i: int, game: GameSpec) -> PowerPolicy:
    floors = bound_floors(i, game)
    res = project_budget(-floors, game.visible_weights[i], game.budgets[i])
    return PowerPolicy(i, game.visibility(i), res.powers)


@dataclass(frozen=True, eq=False)
class BoundProfile:
    policies: StrategyProfile
    bound_values: tuple[float, ...]
    sum_rate_at_Q: float


def lower_bound_profile(game: GameSpec) -> BoundProfile:
    """Every user's bound maximiser ``Q`` and the true sum rate it achieves."""
    pols = [lower_bound_maximizer(i, game) for i in range(game.n_users)]
    Q = StrategyProfile.from_policies(pols)
    values = tuple(lower_bound_rate(i, p, game) for i, p in enumerate(pols))
    return BoundProfile(Q, values, sum_rate(Q, game))


@dataclass(frozen=True)
class BoundReport:
    ne_rates: tuple[float, ...]
    bound_values: tuple[float, ...]
    dominates: tuple[bool, ...]
    ne_sum_rate: float
    sum_rate_at_Q: float
    rates_at_Q: tuple[float, ...]


def ne_vs_bound_report(ne_profile: StrategyProfile, game: GameSpec,
                       slack: float = 1e-9) -> BoundReport:
    """Compare equilibrium rates with the per-user bound maxima.

    ``rates_at_Q`` is reported for reference only: an equilibrium need not
    beat the profile in which every user plays its bound maximiser.
    """
    bp = lower_bound_profile(game)
    r = rates(ne_profile, game)
    rq = rates(bp.policies, game)
    dom = tuple(bool(ri >= bi - slack) for ri, bi in zip(r, bp.bound_values))
    return BoundReport(tuple(map(float, r)), bp.bound_values, dom,
                       float(r.sum()), bp.sum_rate_at_Q, tuple(map(float, rq)))
