"""Budget projection and the water-filling best response."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .channel import Info
from .errors import DimensionMismatch, VisibilityMismatch, ZeroDirectGain
from .game import GameSpec, PowerPolicy, StrategyProfile, expand_profile

__all__ = ["ProjectionResult", "project_budget", "interference_floor",
           "interference_floors", "best_response_full",
           "best_response_partial"]


@dataclass(frozen=True, eq=False)
class ProjectionResult:
    """``powers = max(0, x - lam)`` spending the budget with equality.

    ``lam`` is the projection multiplier and may be negative; the
    water level of the equivalent water-filling solution is ``-lam``
    when ``x`` is a vector of negated floors.
    """

    powers: np.ndarray
    lam: float
    iterations: int

    @property
    def water_level(self) -> float:
        return -self.lam


def project_budget(x, weights, budget: float,
                   max_iter: int = 200) -> ProjectionResult:
    """Nearest point to ``x`` in ``{p >= 0, sum(weights * p) == budget}``.

    Distance is measured in the ``weights``-weighted Euclidean norm, which
    makes the solution exactly ``max(0, x - lam)``.

    Raises
    ------
    NonConvergence
        If the bisection for ``lam`` needs more than ``max_iter`` steps.
    """
    x = np.asarray(x, dtype=np.float64)
    w = np.asarray(weights, dtype=np.float64)
    if x.shape != w.shape or x.ndim != 1:
        raise DimensionMismatch("x and weights must be 1-d of equal length")
    if not budget > 0:
        raise ValueError("budget must be positive")
    if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-9:
        raise ValueError("weights must be a probability vector")
    p, lam, it = kernels.project(x, w, float(budget), max_iter)
    return ProjectionResult(p, float(lam), int(it))


def interference_floor(i: int, powers, gains) -> float:
    """Noise plus interference over direct gain for user ``i`` in one state.

    ``powers`` are all users' powers in the state; user ``i``'s own entry
    is ignored.
    """
    g = np.asarray(gains, dtype=float)
    p = np.asarray(powers, dtype=float)
    if g[i, i] == 0:
        raise ZeroDirectGain(f"user {i} has zero direct gain")
    return float((1.0 + g[i] @ p - g[i, i] * p[i]) / g[i, i])


def interference_floors(expanded: np.ndarray, game: GameSpec) -> np.ndarray:
    """``(N, S)`` floors of every user over all joint states."""
    direct = game.direct_gains
    if np.any(direct == 0):
        raise ZeroDirectGain("a direct gain of zero has no finite floor")
    total = np.einsum("sij,js->is", game.gains, expanded)
    return (1.0 + total - direct * expanded) / direct


def best_response_full(i: int, profile: StrategyProfile,
                       game: GameSpec) -> PowerPolicy:
    """Water-filling best response of user ``i`` under full knowledge."""
    if game.info is not Info.FULL:
        raise VisibilityMismatch("water-filling best response needs full knowledge")
    floors = interference_floors(expand_profile(profile, game), game)
    res = project_budget(-floors[i], game.full_space.probs, game.budgets[i])
    return PowerPolicy(i, game.visibility(i), res.powers)


def best_response_partial(i: int, profile: StrategyProfile, game: GameSpec,
                          tol: float = 1e-12, max_iter: int = 20000) -> PowerPolicy:
    """Best response of user ``i`` under partial knowledge.

    The own rate is concave in the user's visible powers, so projected
    gradient ascent with a backtracking step reaches the maximiser.  The
    ascent direction is the gradient divided by the state weights, which
    is the steepest direction in the metric of the projection.
    """
    if game.info is Info.FULL:
        raise VisibilityMismatch("use best_response_full under full knowledge")
    from .game import _own_rates
    from ._pykernels import partial_gradient

    w = game.visible_weights[i]
    mask = w > 0
    P = np.array(profile.powers, dtype=np.float64)
    expanded = expand_profile(profile, game)
    probs = game.full_space.probs

    def value(p):
        return float(_own_rates(i, p[None, :], expanded, game)[0])

    p = P[i].copy()
    fp = value(p)
    step = 1.0
    for _ in range(max_iter):
        P[i] = p
        d = np.zeros_like(p)
        d[mask] = partial_gradient(P, game.visible_index, game.gains,
                                   probs)[i][mask] / w[mask]
        while True:
            q = project_budget(np.where(mask, p + step * d, 0.0), w,
                               game.budgets[i]).powers
            fq = value(q)
            if fq >= fp + 1e-4 * (d * w) @ (q - p) or step < 1e-14:
                break
            step *= 0.5
        moved = float(np.max(np.abs(q - p)))
        if fq >= fp:
            p, fp = q, fq
        if moved <= tol * max(1.0, float(np.max(p))):
            break
        step *= 2.0
    return PowerPolicy(i, game.visibility(i), p)
