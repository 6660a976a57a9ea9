"""Variational-inequality operators, projected maps and the merit function.

Under full knowledge the operator is affine, ``F(P) = (I + Hhat) P + hhat``
with one ``N x N`` block per joint state.  Stacked profile vectors used by
:class:`AffineOperator` are *state-major*: the block of state ``s`` holds
``(P_1(s), ..., P_N(s))``.  Under partial knowledge ``F_i`` is minus the
gradient of user ``i``'s expected rate.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import _pykernels, kernels
from .channel import Info
from .errors import DimensionMismatch, VisibilityMismatch, ZeroDirectGain
from .game import GameSpec, StrategyProfile

__all__ = ["AffineOperator", "MonotoneReport", "ViMap", "build_affine",
           "eval_affine_F", "stack_profile", "unstack_profile",
           "grad_rate", "grad_rate_incident", "grad_rate_direct",
           "eval_T", "merit", "check_monotone"]


@dataclass(frozen=True, eq=False)
class AffineOperator:
    """Block vector ``h_vec`` (length ``N*S``) and diagonal blocks ``(S, N, N)``."""

    h_vec: np.ndarray
    blocks: np.ndarray

    @property
    def n_users(self) -> int:
        return self.blocks.shape[1]

    @property
    def n_states(self) -> int:
        return self.blocks.shape[0]


def build_affine(game: GameSpec) -> AffineOperator:
    if game.info is not Info.FULL:
        raise VisibilityMismatch("the affine operator exists only under full knowledge")
    g = game.gains
    direct = np.einsum("sii->si", g)
    if np.any(direct == 0):
        raise ZeroDirectGain("a direct gain of zero has no finite floor")
    blocks = g / direct[:, :, None]
    n = g.shape[1]
    blocks[:, np.arange(n), np.arange(n)] = 0.0
    return AffineOperator((1.0 / direct).ravel(), blocks)


def stack_profile(powers: np.ndarray) -> np.ndarray:
    """``(N, S)`` user-major powers to a state-major stacked vector."""
    return np.ascontiguousarray(np.asarray(powers, float).T).ravel()


def unstack_profile(vec: np.ndarray, n_users: int) -> np.ndarray:
    return np.ascontiguousarray(np.asarray(vec, float).reshape(-1, n_users).T)


def eval_affine_F(op: AffineOperator, P: np.ndarray) -> np.ndarray:
    """``(I + Hhat) P + hhat`` using the block structure only."""
    P = np.asarray(P, dtype=float)
    if P.shape != op.h_vec.shape:
        raise DimensionMismatch(
            f"vector of length {P.size}, operator of size {op.h_vec.size}")
    blocks_p = P.reshape(op.n_states, op.n_users)
    out = blocks_p + np.einsum("sij,sj->si", op.blocks, blocks_p)
    return out.ravel() + op.h_vec


def _require(game: GameSpec, profile: StrategyProfile, info: Info | None):
    if info is not None and game.info is not info:
        raise VisibilityMismatch(f"expected game {info.value}, got {game.info.value}")
    if profile.info is not game.info:
        raise VisibilityMismatch("profile does not match the game's information")
    if profile.powers.shape != (game.n_users, game.n_visible):
        raise DimensionMismatch("profile shape does not match the game")


def grad_rate(i: int, profile: StrategyProfile, game: GameSpec) -> np.ndarray:
    """Exact gradient of user ``i``'s rate w.r.t. its own visible powers."""
    _require(game, profile, None)
    grads = _pykernels.partial_gradient(profile.powers, game.visible_index,
                                        game.gains, game.full_space.probs)
    return grads[i]


def grad_rate_incident(i: int, profile: StrategyProfile,
                       game: GameSpec) -> np.ndarray:
    _require(game, profile, Info.INCIDENT)
    return grad_rate(i, profile, game)


def grad_rate_direct(i: int, profile: StrategyProfile,
                     game: GameSpec) -> np.ndarray:
    _require(game, profile, Info.DIRECT)
    return grad_rate(i, profile, game)


@dataclass(frozen=True, eq=False)
class ViMap:
    """Projected map ``T(P) = Proj(P - tau F(P))`` of one game.

    Under partial knowledge the step uses the rate gradient expressed in
    the same probability-weighted metric as the projection, rescaled so
    that uniform state probabilities give the plain gradient step.  This
    keeps fixed points equal to Nash equilibria for any probabilities.
    """

    game: GameSpec
    tau: float

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError("tau must be positive")

    @cached_property
    def _budgets(self) -> np.ndarray:
        return np.asarray(self.game.budgets, dtype=np.float64)

    @cached_property
    def _gains(self) -> np.ndarray:
        return np.ascontiguousarray(self.game.gains, dtype=np.float64)

    @cached_property
    def _idx(self) -> np.ndarray:
        return np.ascontiguousarray(self.game.visible_index, dtype=np.intp)

    def apply(self, P: np.ndarray, out: np.ndarray | None = None,
              tau: float | None = None) -> tuple[np.ndarray, float]:
        """Array form: returns ``(T(P), ||P - T(P)||)``."""
        P = np.ascontiguousarray(P, dtype=np.float64)
        if out is None:
            out = np.empty_like(P)
        tau = self.tau if tau is None else tau
        g = self.game
        if g.info is Info.FULL:
            m = kernels.t_affine(P, self._gains, g.full_space.probs,
                                 self._budgets, tau, out)
        else:
            m = kernels.t_partial(P, self._idx, self._gains,
                                  g.full_space.probs, g.visible_weights,
                                  self._budgets, tau, out)
        return out, m

    def merit_sq(self, P: np.ndarray) -> float:
        return self.apply(P)[1] ** 2


def eval_T(vimap: ViMap, profile: StrategyProfile) -> StrategyProfile:
    _require(vimap.game, profile, None)
    out, _ = vimap.apply(profile.powers)
    return StrategyProfile(profile.info, out)


def merit(vimap: ViMap, profile: StrategyProfile) -> float:
    """``||P - T(P)||`` in the plain stacked Euclidean norm."""
    _require(vimap.game, profile, None)
    return float(vimap.apply(profile.powers)[1])


@dataclass(frozen=True)
class MonotoneReport:
    min_eig: float
    is_psd: bool


def check_monotone(op: AffineOperator, tol: float = 1e-10) -> MonotoneReport:
    """Smallest eigenvalue of the symmetric part of ``I + Hhat``, per block."""
    n = op.n_users
    full = op.blocks + np.eye(n)
    sym = 0.5 * (full + np.swapaxes(full, 1, 2))
    min_eig = float(np.linalg.eigvalsh(sym)[:, 0].min())
    return MonotoneReport(min_eig, min_eig >= -tol)
