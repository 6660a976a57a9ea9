"""Finite channel-gain distributions and enumerated channel-state spaces.

Gains are stored as power gains ``|h_ij|^2``; complex amplitudes never
appear.  Link gains are independent across links, so every joint state
probability is a product of per-link marginals.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (IndexOutOfRange, LengthMismatch, NegativeValue,
                     ProbSumInvalid, SizeOverflow)

__all__ = ["GainDistribution", "ChannelSpec", "Info", "Visibility",
           "StateSpace", "build_gain_distribution", "enumerate_states",
           "state_probability", "visible_index", "DEFAULT_STATE_CAP"]

DEFAULT_STATE_CAP = 10 ** 7

_RENORM_TOL = 1e-9


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class GainDistribution:
    """Distinct nonnegative gain values with their probabilities."""

    values: tuple[float, ...]
    probs: tuple[float, ...]

    def __post_init__(self):
        if len(self.values) != len(self.probs):
            raise LengthMismatch(
                f"{len(self.values)} values but {len(self.probs)} probabilities")
        if not self.values:
            raise LengthMismatch("gain distribution must be nonempty")
        if any(not math.isfinite(v) for v in self.values):
            raise ValueError("gain values must be finite")
        if any(v < 0 for v in self.values):
            raise NegativeValue("gain values must be nonnegative")
        if any(p < 0 or not math.isfinite(p) for p in self.probs):
            raise NegativeValue("probabilities must be finite and nonnegative")
        if len(set(self.values)) != len(self.values):
            raise ValueError("gain values must be distinct")
        if abs(math.fsum(self.probs) - 1.0) > 1e-12:
            raise ProbSumInvalid(
                f"probabilities sum to {math.fsum(self.probs)!r}, not 1")

    def __len__(self):
        return len(self.values)

    @property
    def mean(self) -> float:
        return math.fsum(v * p for v, p in zip(self.values, self.probs))


def build_gain_distribution(values: Sequence[float],
                            probs: Sequence[float]) -> GainDistribution:
    """Validate ``values``/``probs`` and return a :class:`GainDistribution`.

    Probabilities whose sum is off from 1 by less than 1e-9 are
    renormalised; larger deviations raise :class:`ProbSumInvalid`.
    """
    values = tuple(float(v) for v in values)
    probs = tuple(float(p) for p in probs)
    if len(values) != len(probs):
        raise LengthMismatch(
            f"{len(values)} values but {len(probs)} probabilities")
    if not values:
        raise LengthMismatch("gain distribution must be nonempty")
    if any(p < 0 for p in probs):
        raise NegativeValue("probabilities must be nonnegative")
    total = math.fsum(probs)
    if not abs(total - 1.0) < _RENORM_TOL:
        raise ProbSumInvalid(f"probabilities sum to {total!r}, not 1")
    probs = tuple(p / total for p in probs)
    return GainDistribution(values, probs)


@dataclass(frozen=True)
class ChannelSpec:
    """``n_users`` transmitter/receiver pairs with i.i.d. direct and cross gains."""

    n_users: int
    direct: GainDistribution
    cross: GainDistribution

    def __post_init__(self):
        if int(self.n_users) != self.n_users or self.n_users < 1:
            raise ValueError("n_users must be a positive integer")

    def link_distribution(self, i: int, j: int) -> GainDistribution:
        return self.direct if i == j else self.cross


class Info(enum.Enum):
    """Channel knowledge of each user: full (A), incident (I) or direct (D)."""

    FULL = "A"
    INCIDENT = "I"
    DIRECT = "D"


@dataclass(frozen=True)
class Visibility:
    kind: Info
    user: int | None = None

    def __post_init__(self):
        if (self.kind is Info.FULL) != (self.user is None):
            raise ValueError("only incident/direct visibility names a user")

    @classmethod
    def full(cls) -> "Visibility":
        return cls(Info.FULL)

    @classmethod
    def incident(cls, user: int) -> "Visibility":
        return cls(Info.INCIDENT, user)

    @classmethod
    def direct(cls, user: int) -> "Visibility":
        return cls(Info.DIRECT, user)

    def links(self, n_users: int) -> list[tuple[int, int]]:
        """Links ``(receiver, transmitter)`` observed, in enumeration order."""
        if self.kind is Info.FULL:
            return [(i, j) for i in range(n_users) for j in range(n_users)]
        if self.kind is Info.INCIDENT:
            return [(self.user, j) for j in range(n_users)]
        return [(self.user, self.user)]


@dataclass(frozen=True, eq=False)
class StateSpace:
    """Enumerated channel states seen under one visibility.

    ``states`` has shape ``(S, N, N)`` for full visibility, ``(S, N)`` for
    the gains into one receiver, and ``(S,)`` for a single direct gain.
    ``digits[s, k]`` is the gain-value index of observed link ``k``.
    """

    visibility: Visibility
    states: np.ndarray
    probs: np.ndarray
    digits: np.ndarray
    radices: tuple[int, ...] = field(repr=False)

    def __len__(self):
        return self.probs.shape[0]


def _space_size(spec: ChannelSpec, links) -> int:
    return math.prod(len(spec.link_distribution(i, j)) for i, j in links)


def enumerate_states(spec: ChannelSpec, visibility: Visibility,
                     cap: int = DEFAULT_STATE_CAP) -> StateSpace:
    """Cartesian product of the observed link supports.

    Links are ordered row-major over ``(i, j)``; the first link varies
    slowest, so enumeration is deterministic for a given spec.
    """
    n = spec.n_users
    if visibility.user is not None and not 0 <= visibility.user < n:
        raise IndexOutOfRange(f"user {visibility.user} out of range")
    links = visibility.links(n)
    size = _space_size(spec, links)
    if size > cap:
        raise SizeOverflow(f"{size} states exceed the cap of {cap}")
    dists = [spec.link_distribution(i, j) for i, j in links]
    radices = tuple(len(d) for d in dists)
    digits = np.stack(np.unravel_index(np.arange(size), radices), axis=1) \
        if size > 1 else np.zeros((1, len(links)), dtype=np.intp)
    gains = np.empty(digits.shape)
    probs = np.ones(size)
    for k, d in enumerate(dists):
        gains[:, k] = np.asarray(d.values)[digits[:, k]]
        probs *= np.asarray(d.probs)[digits[:, k]]
    if visibility.kind is Info.FULL:
        states = gains.reshape(size, n, n)
    elif visibility.kind is Info.INCIDENT:
        states = gains
    else:
        states = gains[:, 0]
    return StateSpace(visibility, _frozen(states), _frozen(probs),
                      _frozen(digits), radices)


def state_probability(space: StateSpace, index: int) -> float:
    if not 0 <= index < len(space):
        raise IndexOutOfRange(f"state index {index} out of range")
    return float(space.probs[index])


def visible_index(full: StateSpace, visibility: Visibility) -> np.ndarray:
    """For each full state, the index of its projection onto ``visibility``."""
    if full.visibility.kind is not Info.FULL:
        raise ValueError("expected a full state space")
    if visibility.kind is Info.FULL:
        return np.arange(len(full))
    n = full.states.shape[1]
    i = visibility.user
    if visibility.kind is Info.DIRECT:
        return full.digits[:, i * n + i].copy()
    cols = full.digits[:, i * n:(i + 1) * n]
    radices = full.radices[i * n:(i + 1) * n]
    return np.ravel_multi_index(tuple(cols.T), radices)
