"""Power-allocation games over a finite-state Gaussian interference channel.

All rates are in nats with unit noise power.  A profile is stored as an
``(N, n_visible)`` array: row ``i`` is user ``i``'s power in each state it
can observe (all joint states under full knowledge, its incident gains, or
its direct gain only).  Rates are always exact expectations over the full
joint state space.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .channel import (DEFAULT_STATE_CAP, ChannelSpec, Info, StateSpace,
                      Visibility, enumerate_states, visible_index)
from .errors import DimensionMismatch, IndexOutOfRange, VisibilityMismatch

__all__ = ["GameSpec", "PowerPolicy", "StrategyProfile", "NeReport",
           "budgets_from_snr", "sinr", "sinr_matrix", "expand_policy",
           "expand_profile", "rate", "rates", "sum_rate", "is_feasible",
           "epsilon_ne_check", "random_policies"]

FEASIBILITY_TOL = 1e-9


def budgets_from_snr(snr_db: float, n_users: int) -> tuple[float, ...]:
    """Equal budgets ``10**(snr_db/10)`` for unit noise power."""
    return (10.0 ** (snr_db / 10.0),) * n_users


@dataclass(frozen=True, eq=False)
class GameSpec:
    channel: ChannelSpec
    budgets: tuple[float, ...]
    info: Info
    state_cap: int = DEFAULT_STATE_CAP

    def __post_init__(self):
        object.__setattr__(self, "budgets", tuple(float(b) for b in self.budgets))
        if len(self.budgets) != self.channel.n_users:
            raise DimensionMismatch(
                f"{len(self.budgets)} budgets for {self.channel.n_users} users")
        if any(not b > 0 for b in self.budgets):
            raise ValueError("power budgets must be positive")

    @classmethod
    def from_snr(cls, channel: ChannelSpec, snr_db: float, info: Info,
                 **kwargs) -> "GameSpec":
        return cls(channel, budgets_from_snr(snr_db, channel.n_users), info,
                   **kwargs)

    def with_info(self, info: Info) -> "GameSpec":
        return GameSpec(self.channel, self.budgets, info, self.state_cap)

    @property
    def n_users(self) -> int:
        return self.channel.n_users

    @cached_property
    def full_space(self) -> StateSpace:
        return enumerate_states(self.channel, Visibility.full(), self.state_cap)

    @cached_property
    def gains(self) -> np.ndarray:
        """``(S, N, N)`` power gains of every joint state."""
        return self.full_space.states

    @cached_property
    def direct_gains(self) -> np.ndarray:
        """``(N, S)`` direct gain of each user in each joint state."""
        return np.ascontiguousarray(np.einsum("sii->is", self.gains))

    def visibility(self, i: int) -> Visibility:
        if self.info is Info.FULL:
            return Visibility.full()
        if self.info is Info.INCIDENT:
            return Visibility.incident(i)
        return Visibility.direct(i)

    @cached_property
    def visible_spaces(self) -> tuple[StateSpace, ...]:
        if self.info is Info.FULL:
            return (self.full_space,) * self.n_users
        return tuple(enumerate_states(self.channel, self.visibility(i),
                                      self.state_cap)
                     for i in range(self.n_users))

    @cached_property
    def visible_index(self) -> np.ndarray:
        """``(N, S)`` index of each joint state in each user's visible space."""
        idx = np.stack([visible_index(self.full_space, self.visibility(i))
                        for i in range(self.n_users)])
        idx.setflags(write=False)
        return idx

    @cached_property
    def visible_weights(self) -> np.ndarray:
        """``(N, n_visible)`` marginal probabilities of the visible states."""
        w = np.stack([sp.probs for sp in self.visible_spaces])
        w.setflags(write=False)
        return w

    @property
    def n_visible(self) -> int:
        return self.visible_weights.shape[1]


@dataclass(frozen=True, eq=False)
class PowerPolicy:
    user: int
    visibility: Visibility
    powers: np.ndarray


@dataclass(frozen=True, eq=False)
class StrategyProfile:
    """Stacked policies of all users; ``powers`` is ``(N, n_visible)``."""

    info: Info
    powers: np.ndarray

    def __post_init__(self):
        p = np.array(self.powers, dtype=float)
        if p.ndim != 2:
            raise DimensionMismatch("profile powers must be a 2-d array")
        p.setflags(write=False)
        object.__setattr__(self, "powers", p)

    @classmethod
    def from_policies(cls, policies: Sequence[PowerPolicy]) -> "StrategyProfile":
        kinds = {p.visibility.kind for p in policies}
        if len(kinds) != 1:
            raise VisibilityMismatch("policies mix visibility kinds")
        order = sorted(policies, key=lambda p: p.user)
        return cls(kinds.pop(), np.stack([np.asarray(p.powers, float)
                                          for p in order]))

    @property
    def n_users(self) -> int:
        return self.powers.shape[0]

    def policy(self, i: int) -> PowerPolicy:
        if self.info is Info.FULL:
            vis = Visibility.full()
        else:
            vis = Visibility(self.info, i)
        return PowerPolicy(i, vis, self.powers[i])

    @property
    def policies(self) -> list[PowerPolicy]:
        return [self.policy(i) for i in range(self.n_users)]

    def replace(self, i: int, powers) -> "StrategyProfile":
        p = self.powers.copy()
        p[i] = powers
        return StrategyProfile(self.info, p)


def _check_profile(profile: StrategyProfile, game: GameSpec):
    if profile.info is not game.info:
        raise VisibilityMismatch(
            f"profile for game {profile.info.value} used in game {game.info.value}")
    if profile.powers.shape != (game.n_users, game.n_visible):
        raise DimensionMismatch(
            f"profile shape {profile.powers.shape}, expected "
            f"{(game.n_users, game.n_visible)}")


def is_feasible(profile: StrategyProfile, game: GameSpec,
                tol: float = FEASIBILITY_TOL) -> bool:
    _check_profile(profile, game)
    p = profile.powers
    spent = np.einsum("iv,iv->i", game.visible_weights, p)
    return bool(np.all(p >= -tol) and np.all(spent <= np.asarray(game.budgets) + tol))


def sinr(powers: Sequence[float], gains: np.ndarray, i: int) -> float:
    """SINR of user ``i`` in one joint state with unit noise.

    ``powers`` holds every user's transmit power in that state and
    ``gains[i, j]`` the power gain from transmitter ``j`` to receiver ``i``.
    """
    p = np.asarray(powers, float)
    g = np.asarray(gains, float)
    if not 0 <= i < p.shape[0]:
        raise IndexOutOfRange(f"user {i} out of range")
    interference = g[i] @ p - g[i, i] * p[i]
    return float(g[i, i] * p[i] / (1.0 + interference))


def sinr_matrix(expanded: np.ndarray, game: GameSpec) -> np.ndarray:
    """``(N, S)`` SINR of every user in every joint state."""
    total = np.einsum("sij,js->is", game.gains, expanded)
    signal = game.direct_gains * expanded
    return signal / (1.0 + total - signal)


def expand_policy(policy: PowerPolicy, full_space: StateSpace) -> np.ndarray:
    """Map a policy over visible states to one over all joint states."""
    vis = policy.visibility
    p = np.asarray(policy.powers, float)
    if vis.kind is Info.FULL:
        if p.shape != (len(full_space),):
            raise VisibilityMismatch("full policy length does not match space")
        return p
    if vis.user != policy.user:
        raise VisibilityMismatch("policy visibility names a different user")
    idx = visible_index(full_space, vis)
    if p.shape[0] != int(idx.max()) + 1:
        raise VisibilityMismatch("policy length does not match visible space")
    return p[idx]


def expand_profile(profile: StrategyProfile, game: GameSpec) -> np.ndarray:
    _check_profile(profile, game)
    if game.info is Info.FULL:
        return profile.powers
    return np.take_along_axis(profile.powers, game.visible_index, axis=1)


def rates(profile: StrategyProfile, game: GameSpec) -> np.ndarray:
    """Expected rate of every user, in nats per channel use."""
    gamma = sinr_matrix(expand_profile(profile, game), game)
    return np.log1p(gamma) @ game.full_space.probs


def rate(i: int, profile: StrategyProfile, game: GameSpec) -> float:
    if not 0 <= i < game.n_users:
        raise IndexOutOfRange(f"user {i} out of range")
    return float(rates(profile, game)[i])


def sum_rate(profile: StrategyProfile, game: GameSpec) -> float:
    return float(rates(profile, game).sum())


def _own_rates(i: int, candidates: np.ndarray, expanded: np.ndarray,
               game: GameSpec) -> np.ndarray:
    """Rate of user ``i`` for each row of ``candidates`` against fixed opponents."""
    g = game.gains
    interference = np.einsum("sj,js->s", g[:, i, :], expanded) \
        - game.direct_gains[i] * expanded[i]
    if game.info is not Info.FULL:
        candidates = candidates[:, game.visible_index[i]]
    gamma = game.direct_gains[i] * candidates / (1.0 + interference)
    return np.log1p(gamma) @ game.full_space.probs


def random_policies(rng: np.random.Generator, weights: np.ndarray,
                    budget: float, count: int) -> np.ndarray:
    """``count`` nonnegative policies with uniformly random direction on the
    orthant, each scaled to spend exactly ``budget``."""
    d = np.abs(rng.standard_normal((count, weights.shape[0])))
    return d * (budget / (d @ weights))[:, None]


@dataclass(frozen=True)
class NeReport:
    max_gain: float
    is_ne: bool
    user_gains: tuple[float, ...]
    best_response_gain: float | None


def epsilon_ne_check(profile: StrategyProfile, game: GameSpec, epsilon: float,
                     n_deviations: int = 1000, seed: int = 0,
                     use_best_response: bool = True) -> NeReport:
    """Largest rate gain any user obtains by a unilateral deviation.

    Deviations are ``n_deviations`` random budget-exhausting policies per
    user plus the zero policy and the exact best response (water-filling
    under full knowledge, concave ascent otherwise).
    """
    _check_profile(profile, game)
    rng = np.random.default_rng(seed)
    expanded = expand_profile(profile, game)
    current = rates(profile, game)
    gains = []
    br_gain = None
    for i in range(game.n_users):
        w = game.visible_weights[i]
        cands = random_policies(rng, w, game.budgets[i], n_deviations)
        cands = np.vstack([cands, np.zeros_like(w)])
        best = float(_own_rates(i, cands, expanded, game).max())
        if use_best_response:
            from .projection import best_response_full, best_response_partial
            respond = best_response_full if game.info is Info.FULL \
                else best_response_partial
            br = respond(i, profile, game).powers
            r_br = float(_own_rates(i, br[None, :], expanded, game)[0])
            g_br = r_br - current[i]
            br_gain = g_br if br_gain is None else max(br_gain, g_br)
            best = max(best, r_br)
        gains.append(best - float(current[i]))
    max_gain = max(gains)
    return NeReport(max_gain, max_gain <= epsilon, tuple(gains), br_gain)
