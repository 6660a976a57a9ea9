"""Fixed-point iteration and the two-phase merit-descent heuristic.

Phase 1 iterates the projected map ``T``.  Phase 2 runs Gauss-Seidel
sweeps of projected steepest descent on ``f(P) = ||P - T(P)||^2`` with a
forward-difference gradient.  When Phase 2 stalls away from a fixed point
the search restarts Phase 1 from the stalled point.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field, fields
from typing import Callable

import numpy as np

from . import kernels
from .channel import Info
from .errors import RestartLimitExceeded
from .game import GameSpec, PowerPolicy, StrategyProfile
from .operators import ViMap

__all__ = ["SolverConfig", "SolveResult", "default_initial",
           "fixed_point_solve", "gamma_schedule", "merit_gradient",
           "steepest_descent_step", "algorithm1"]

log = logging.getLogger(__name__)

Callback = Callable[[str, np.ndarray], None]


@dataclass(frozen=True)
class SolverConfig:
    tau: float = 0.1
    epsilon: float = 1e-4
    delta: float = 1e-6
    max_phase1: int = 100
    gamma0: float = 0.5
    gamma_block: int = 10
    fd_step: float = 1e-6
    max_restarts: int = 20
    max_phase2: int = 200
    rng_seed: int = 0

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name == "rng_seed":
                continue
            if f.name == "max_restarts":
                if v < 0:
                    raise ValueError("max_restarts must be nonnegative")
            elif not v > 0:
                raise ValueError(f"{f.name} must be positive")

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(eq=False)
class SolveResult:
    profile: StrategyProfile
    merit: float
    iterations_phase1: int
    iterations_phase2: int
    restarts: int
    merit_trace: list[float] = field(repr=False)
    converged: bool


def default_initial(game: GameSpec) -> StrategyProfile:
    """Every user spends its full budget in every visible state."""
    p = np.repeat(np.asarray(game.budgets)[:, None], game.n_visible, axis=1)
    return StrategyProfile(game.info, p)


def _start(game: GameSpec, initial: StrategyProfile | None) -> np.ndarray:
    if initial is None:
        initial = default_initial(game)
    if initial.info is not game.info or \
            initial.powers.shape != (game.n_users, game.n_visible):
        raise ValueError("initial profile does not match the game")
    return np.array(initial.powers, dtype=np.float64, order="C")


def fixed_point_solve(game: GameSpec, config: SolverConfig = SolverConfig(),
                      initial: StrategyProfile | None = None,
                      callback: Callback | None = None) -> SolveResult:
    """Iterate ``P <- T(P)`` until the merit drops below ``epsilon``."""
    vimap = ViMap(game, config.tau)
    P = _start(game, initial)
    Q = np.empty_like(P)
    trace = []
    n = 0
    while True:
        _, m = vimap.apply(P, Q)
        trace.append(m)
        if m < config.epsilon or n == config.max_phase1:
            break
        P, Q = Q, P
        n += 1
        if callback is not None:
            callback("phase1", P)
    return SolveResult(StrategyProfile(game.info, P), m, n, 0, 0, trace,
                       m < config.epsilon)


def gamma_schedule(t: int, config: SolverConfig = SolverConfig()) -> float:
    """Step size of Phase-2 sweep ``t`` (1-based).

    Constant within blocks of ``gamma_block`` sweeps; each new block maps
    ``g -> g / (1 + g)``, i.e. block ``k`` (0-based) uses
    ``1 / (1/gamma0 + k)``.
    """
    if t < 1:
        raise ValueError("t starts at 1")
    k = (t - 1) // config.gamma_block
    return 1.0 / (1.0 / config.gamma0 + k)


def merit_gradient(i: int, P: np.ndarray, vimap: ViMap,
                   fd_step: float) -> np.ndarray:
    """Forward-difference gradient of ``||P - T(P)||^2`` w.r.t. ``P[i]``.

    Perturbed profiles are evaluated as is, without re-projection.
    """
    P = np.ascontiguousarray(P, dtype=np.float64)
    game = vimap.game
    out = np.empty(P.shape[1])
    if game.info is Info.FULL:
        kernels.fd_grad_affine(P, i, vimap._gains, game.full_space.probs,
                               vimap._budgets, vimap.tau, fd_step, out)
        return out
    base = vimap.merit_sq(P)
    Pp = P.copy()
    for v in range(P.shape[1]):
        step = fd_step * max(1.0, abs(P[i, v]))
        Pp[i, v] = P[i, v] + step
        out[v] = (vimap.merit_sq(Pp) - base) / step
        Pp[i, v] = P[i, v]
    return out


def _descend(i: int, P: np.ndarray, vimap: ViMap, config: SolverConfig,
             t: int) -> np.ndarray:
    game = vimap.game
    grad = merit_gradient(i, P, vimap, config.fd_step)
    x = P[i] - gamma_schedule(t, config) * grad
    p, _, _ = kernels.project(x, game.visible_weights[i], game.budgets[i])
    return p


def steepest_descent_step(i: int, profile: StrategyProfile, game: GameSpec,
                          config: SolverConfig = SolverConfig(),
                          t: int = 1) -> PowerPolicy:
    """One projected steepest-descent step on the squared merit for user ``i``."""
    vimap = ViMap(game, config.tau)
    p = _descend(i, np.array(profile.powers), vimap, config, t)
    return PowerPolicy(i, game.visibility(i), p)


def algorithm1(game: GameSpec, config: SolverConfig = SolverConfig(),
               initial: StrategyProfile | None = None,
               callback: Callback | None = None) -> SolveResult:
    """Two-phase search for a fixed point of ``T``.

    Phase 1 applies ``T`` up to ``max_phase1`` times, stopping early once
    the merit is below ``epsilon``.  Phase 2 then sweeps the users in order,
    each taking one descent step from the partially updated profile.  A
    Phase-2 pass ends on convergence, when a sweep moves the profile by less
    than ``delta``, or after ``max_phase2`` sweeps; the last two restart
    Phase 1 from the current point, at most ``max_restarts`` times.  The
    best iterate by merit is returned when the restarts run out.
    """
    vimap = ViMap(game, config.tau)
    P = _start(game, initial)
    Q = np.empty_like(P)
    trace: list[float] = []
    best_m, best_P = math.inf, P.copy()
    it1 = it2 = restarts = 0

    def done(Pc, m, ok):
        return SolveResult(StrategyProfile(game.info, Pc.copy()), m, it1, it2,
                           restarts, trace, ok)

    while True:
        for _ in range(config.max_phase1):
            _, m = vimap.apply(P, Q)
            trace.append(m)
            if m < best_m:
                best_m, best_P = m, P.copy()
            if m < config.epsilon:
                return done(P, m, True)
            P, Q = Q, P
            it1 += 1
            if callback is not None:
                callback("phase1", P)
        m = vimap.apply(P, Q)[1]
        if m < config.epsilon:
            trace.append(m)
            return done(P, m, True)
        t = 1
        while True:
            prev = P.copy()
            for i in range(game.n_users):
                P[i] = _descend(i, P, vimap, config, t)
                if callback is not None:
                    callback("phase2", P)
            it2 += 1
            t += 1
            m = vimap.apply(P, Q)[1]
            trace.append(m)
            if m < best_m:
                best_m, best_P = m, P.copy()
            if m < config.epsilon:
                return done(P, m, True)
            if np.linalg.norm(P - prev) < config.delta or t > config.max_phase2:
                break
        if restarts >= config.max_restarts:
            warnings.warn(f"no fixed point after {restarts} restarts; best merit "
                          f"{best_m:.3g}", RestartLimitExceeded, stacklevel=2)
            return done(best_P, best_m, False)
        restarts += 1
        log.debug("phase 2 stalled at merit %.3g; restart %d", m, restarts)
