"""Preset experiments, SNR sweeps, Phase-1 statistics and CSV I/O.

Budgets follow ``P = 10**(snr_db / 10)`` with unit noise, identical for
all users, and every rate is in nats.  CSV files start with the comment
line ``# noise=1 log=nats``.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import re
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .bounds import lower_bound_profile
from .channel import ChannelSpec, Info, build_gain_distribution
from .errors import ConfigInvalid, IcnashError, IoError, ParseError
from .game import GameSpec, StrategyProfile, epsilon_ne_check, rates
from .operators import ViMap, build_affine, check_monotone
from .solvers import SolverConfig, SolveResult, algorithm1, fixed_point_solve

__all__ = ["PRESETS", "preset_channel", "ExperimentConfig", "Row", "StatRow",
           "parse_config", "parse_config_text", "run_preset", "solve_one",
           "solve_point",
           "phase1_stats", "random_feasible_profile", "emit_csv", "read_csv",
           "emit_stats_csv", "CSV_HEADER", "STATS_HEADER", "METADATA_LINE"]

log = logging.getLogger(__name__)

METADATA_LINE = "# noise=1 log=nats"
CSV_HEADER = ("example", "game", "snr_db", "psd", "converged", "merit",
              "iters_phase1", "iters_phase2", "restarts", "user", "rate_nats",
              "sum_rate_nats")
STATS_HEADER = ("example", "game", "snr_db", "trials", "max_phase1", "tau",
                "mean_g_before", "std_g_before", "mean_g_after", "std_g_after",
                "mean_g_before_tau1", "std_g_before_tau1",
                "mean_g_after_tau1", "std_g_after_tau1")

GAMES = ("A", "I", "D", "LB")
CONFIG_KEYS = ("preset", "games", "snr_db_list", "solver", "trials", "seed",
               "output_path")


def _uniform(values):
    return build_gain_distribution(values, [1.0 / len(values)] * len(values))


PRESETS = {
    "example1": ChannelSpec(3, _uniform([0.3, 1.0]), _uniform([0.2, 0.1])),
    "example2": ChannelSpec(3, _uniform([0.3, 1.0]), _uniform([0.1, 0.5])),
    "example3": ChannelSpec(2, _uniform([0.1, 0.5, 1.0]),
                            _uniform([0.25, 0.5, 0.75])),
}


def preset_channel(name: str) -> ChannelSpec:
    try:
        return PRESETS[name]
    except KeyError:
        raise ConfigInvalid(f"unknown preset {name!r}; expected one of "
                            f"{sorted(PRESETS)}") from None


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment.

    ``solver`` applies to every game; ``solver_overrides`` maps a game
    letter to a config that replaces it for that game only.
    """

    preset: str | ChannelSpec
    games: tuple[str, ...]
    snr_db_list: tuple[float, ...]
    solver: SolverConfig = SolverConfig()
    trials: int = 100
    seed: int = 0
    output_path: str | None = None
    solver_overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.snr_db_list:
            raise ConfigInvalid("snr_db_list must not be empty")
        if not self.games:
            raise ConfigInvalid("games must not be empty")
        bad = [g for g in self.games if g not in GAMES]
        if bad:
            raise ConfigInvalid(f"unknown games {bad}; expected a subset of {GAMES}")
        if self.trials < 1:
            raise ConfigInvalid("trials must be at least 1")
        if isinstance(self.preset, str):
            preset_channel(self.preset)

    @property
    def name(self) -> str:
        return self.preset if isinstance(self.preset, str) else "custom"

    @property
    def channel(self) -> ChannelSpec:
        if isinstance(self.preset, ChannelSpec):
            return self.preset
        return preset_channel(self.preset)

    def solver_for(self, game: str) -> SolverConfig:
        return self.solver_overrides.get(game, self.solver)


# -- configuration parsing ------------------------------------------------

def _position(text: str, offset: int) -> tuple[int, int]:
    line = text.count("\n", 0, offset) + 1
    col = offset - (text.rfind("\n", 0, offset) + 1) + 1
    return line, col


def _locate_key(text: str, key: str, start: int = 0) -> tuple[int, int] | tuple[None, None]:
    m = re.compile(r'"%s"\s*:' % re.escape(key)).search(text, start)
    if m is None:
        return None, None
    return _position(text, m.start())


def _check_keys(obj: dict, allowed: Sequence[str], text: str, where: str,
                start: int = 0):
    for key in obj:
        if key not in allowed:
            line, col = _locate_key(text, key, start)
            raise ParseError(f"unknown key {key!r} in {where}", line, col)


def _solver_from(obj, text: str) -> tuple[SolverConfig, dict]:
    if not isinstance(obj, dict):
        raise ConfigInvalid("solver must be an object")
    names = [f.name for f in fields(SolverConfig)]
    start = text.find('"solver"')
    _check_keys(obj, names + ["A", "I", "D"], text, "solver", max(start, 0))
    base = {k: v for k, v in obj.items() if k in names}
    try:
        config = SolverConfig(**base)
        overrides = {}
        for game in ("A", "I", "D"):
            if game in obj:
                sub = obj[game]
                if not isinstance(sub, dict):
                    raise ConfigInvalid(f"solver.{game} must be an object")
                _check_keys(sub, names, text, f"solver.{game}", max(start, 0))
                overrides[game] = replace(config, **sub)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, IcnashError):
            raise
        raise ConfigInvalid(f"invalid solver settings: {exc}") from None
    return config, overrides


def _channel_from(obj) -> ChannelSpec:
    try:
        return ChannelSpec(
            int(obj["n_users"]),
            build_gain_distribution(obj["direct"]["values"], obj["direct"]["probs"]),
            build_gain_distribution(obj["cross"]["values"], obj["cross"]["probs"]))
    except (KeyError, TypeError) as exc:
        raise ConfigInvalid(f"custom preset needs n_users, direct and cross: {exc}") \
            from None


def parse_config_text(text: str) -> ExperimentConfig:
    """Build an :class:`ExperimentConfig` from JSON text.

    Raises
    ------
    ParseError
        On malformed JSON or an unknown key, with 1-based line and column.
    ConfigInvalid
        When the keys are known but the values are not acceptable.
    """
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", exc.lineno, exc.colno) from None
    if not isinstance(obj, dict):
        raise ParseError("configuration must be a JSON object", 1, 1)
    _check_keys(obj, CONFIG_KEYS, text, "configuration")
    for key in ("preset", "games", "snr_db_list"):
        if key not in obj:
            raise ConfigInvalid(f"missing required key {key!r}")
    preset = obj["preset"]
    if isinstance(preset, dict):
        preset = _channel_from(preset)
    elif not isinstance(preset, str):
        raise ConfigInvalid("preset must be a name or a channel object")
    games, snrs = obj["games"], obj["snr_db_list"]
    if not isinstance(games, list) or not all(isinstance(g, str) for g in games):
        raise ConfigInvalid("games must be a list of strings")
    if not isinstance(snrs, list) or not all(
            isinstance(s, (int, float)) and not isinstance(s, bool) for s in snrs):
        raise ConfigInvalid("snr_db_list must be a list of numbers")
    solver, overrides = _solver_from(obj.get("solver", {}), text)
    trials, seed = obj.get("trials", 100), obj.get("seed", 0)
    for key, v in (("trials", trials), ("seed", seed)):
        if not isinstance(v, int) or isinstance(v, bool):
            raise ConfigInvalid(f"{key} must be an integer")
    out = obj.get("output_path")
    if out is not None and not isinstance(out, str):
        raise ConfigInvalid("output_path must be a string")
    return ExperimentConfig(preset, tuple(games), tuple(float(s) for s in snrs),
                            solver, trials, seed, out, overrides)


def parse_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read config {path}: {exc}") from None
    return parse_config_text(text)


# -- sweeps ---------------------------------------------------------------

@dataclass(frozen=True)
class Row:
    example: str
    game: str
    snr_db: float
    psd: bool
    converged: bool
    merit: float
    iters_phase1: int
    iters_phase2: int
    restarts: int
    user: int | str
    rate_nats: float
    sum_rate_nats: float


def _is_psd(channel: ChannelSpec) -> bool:
    """Monotonicity of the full-knowledge operator; budgets do not enter it."""
    game = GameSpec(channel, (1.0,) * channel.n_users, Info.FULL)
    try:
        return check_monotone(build_affine(game)).is_psd
    except IcnashError as exc:
        log.error("monotonicity check failed: %s", exc)
        return False


def solve_one(channel: ChannelSpec, game_letter: str, snr_db: float,
              config: SolverConfig, psd: bool | None = None,
              initial: StrategyProfile | None = None) -> SolveResult:
    """Solve one game with the solver the experiments use for it.

    Full knowledge uses the fixed-point iteration when the operator is
    monotone and the two-phase search otherwise; partial knowledge always
    uses the two-phase search.
    """
    info = Info(game_letter)
    game = GameSpec.from_snr(channel, snr_db, info)
    if info is Info.FULL:
        if psd is None:
            psd = _is_psd(channel)
        if psd:
            return fixed_point_solve(game, config, initial)
    return algorithm1(game, config, initial)


def _rows_for(example, letter, snr, psd, r, rate_vec, merit_ok):
    total = float(np.sum(rate_vec))
    common = dict(example=example, game=letter, snr_db=snr, psd=psd,
                  converged=merit_ok, merit=r[0], iters_phase1=r[1],
                  iters_phase2=r[2], restarts=r[3], sum_rate_nats=total)
    out = [Row(user=i, rate_nats=float(v), **common) for i, v in enumerate(rate_vec)]
    out.append(Row(user="all", rate_nats=total, **common))
    return out


def solve_point(config: ExperimentConfig, letter: str, snr: float,
                psd: bool | None = None) -> tuple[list[Row], SolveResult | None]:
    """Rows for one (game, snr) pair and the solve behind them.

    The result is ``None`` for ``LB`` rows and when the solver raised.
    """
    channel = config.channel
    if psd is None:
        psd = _is_psd(channel)
    try:
        if letter == "LB":
            game = GameSpec.from_snr(channel, snr, Info.INCIDENT)
            bp = lower_bound_profile(game)
            return _rows_for(config.name, letter, snr, psd, (math.nan, 0, 0, 0),
                             rates(bp.policies, game), True), None
        sc = config.solver_for(letter)
        res = solve_one(channel, letter, snr, sc, psd)
        game = GameSpec.from_snr(channel, snr, Info(letter))
        ok = res.converged
        if ok:
            rep = epsilon_ne_check(res.profile, game, 10 * sc.epsilon,
                                   seed=config.seed)
            if not rep.is_ne:
                log.warning("%s %s %g dB: merit %.3g but a deviation gains %.3g",
                            config.name, letter, snr, res.merit, rep.max_gain)
            ok = rep.is_ne
        r = (res.merit, res.iterations_phase1, res.iterations_phase2, res.restarts)
        return _rows_for(config.name, letter, snr, psd, r,
                         rates(res.profile, game), ok), res
    except IcnashError as exc:
        log.error("%s %s %g dB failed: %s", config.name, letter, snr, exc)
        nan = np.full(channel.n_users, math.nan)
        return _rows_for(config.name, letter, snr, psd, (math.nan, 0, 0, 0),
                         nan, False), None


def run_preset(config: ExperimentConfig) -> list[Row]:
    """Solve every (game, snr) pair; one row per user plus a summary row.

    A solved row counts as converged only when the merit is below the
    solver's ``epsilon`` and the profile passes an epsilon-NE check at
    ``10 * epsilon``.  ``LB`` rows evaluate the incident-gain lower-bound
    maximisers under the true incident-gain rates.  Solver errors are
    logged and recorded as non-converged rows with NaN values.
    """
    psd = _is_psd(config.channel)
    rows = []
    for letter in config.games:
        for snr in config.snr_db_list:
            rows += solve_point(config, letter, snr, psd)[0]
    return rows


# -- Phase-1 statistics ---------------------------------------------------

def random_feasible_profile(game: GameSpec, seed) -> StrategyProfile:
    """Uniform(0, 1) powers per visible state, scaled to spend each budget.

    ``seed`` may be an integer or a ``numpy.random.Generator``.
    """
    rng = np.random.default_rng(seed)
    P = rng.uniform(size=(game.n_users, game.n_visible))
    spent = np.einsum("iv,iv->i", game.visible_weights, P)
    P *= (np.asarray(game.budgets) / spent)[:, None]
    return StrategyProfile(game.info, P)


@dataclass(frozen=True)
class StatRow:
    example: str
    game: str
    snr_db: float
    trials: int
    max_phase1: int
    tau: float
    mean_g_before: float
    std_g_before: float
    mean_g_after: float
    std_g_after: float
    mean_g_before_tau1: float
    std_g_before_tau1: float
    mean_g_after_tau1: float
    std_g_after_tau1: float


def phase1_stats(config: ExperimentConfig) -> list[StatRow]:
    """Merit before and after exactly ``max_phase1`` Phase-1 iterations.

    Each trial starts from :func:`random_feasible_profile`.  Phase 1 runs
    with the solver's ``tau``; ``g`` is reported under that ``tau`` and
    under ``tau = 1`` (the water-filling map).  Standard deviations are
    population values.
    """
    rng = np.random.default_rng(config.seed)
    out = []
    for letter in config.games:
        if letter == "LB":
            continue
        sc = config.solver_for(letter)
        for snr in config.snr_db_list:
            game = GameSpec.from_snr(config.channel, snr, Info(letter))
            vimap = ViMap(game, sc.tau)
            g = np.empty((config.trials, 4))
            for k in range(config.trials):
                P = np.array(random_feasible_profile(game, rng).powers)
                g[k, 0] = vimap.apply(P)[1]
                g[k, 2] = vimap.apply(P, tau=1.0)[1]
                Q = np.empty_like(P)
                for _ in range(sc.max_phase1):
                    vimap.apply(P, Q)
                    P, Q = Q, P
                g[k, 1] = vimap.apply(P)[1]
                g[k, 3] = vimap.apply(P, tau=1.0)[1]
            mean, std = g.mean(axis=0), g.std(axis=0)
            out.append(StatRow(config.name, letter, snr, config.trials,
                               sc.max_phase1, sc.tau,
                               mean[0], std[0], mean[1], std[1],
                               mean[2], std[2], mean[3], std[3]))
    return out


# -- CSV ------------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.9g}"
    return str(v)


def _write(lines: Iterable[Sequence], header: Sequence[str], path) -> str:
    buf = io.StringIO()
    buf.write(METADATA_LINE + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for line in lines:
        writer.writerow([_fmt(v) for v in line])
    text = buf.getvalue()
    if path is not None:
        try:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise IoError(f"cannot write {path}: {exc}") from None
    return text


def emit_csv(rows: Sequence[Row], path=None) -> str:
    """Write sweep rows; returns the CSV text (also written to ``path``)."""
    return _write(([getattr(r, k) for k in CSV_HEADER] for r in rows),
                  CSV_HEADER, path)


def emit_stats_csv(rows: Sequence[StatRow], path=None) -> str:
    return _write(([getattr(r, k) for k in STATS_HEADER] for r in rows),
                  STATS_HEADER, path)


def _parse_bool(s: str) -> bool:
    if s not in ("true", "false"):
        raise ParseError(f"expected true or false, got {s!r}")
    return s == "true"


def read_csv(path) -> list[Row]:
    """Read a sweep CSV written by :func:`emit_csv`."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from None
    lines = [ln for ln in text.split("\n") if ln and not ln.startswith("#")]
    reader = csv.reader(lines)
    header = next(reader, None)
    if tuple(header or ()) != CSV_HEADER:
        raise ParseError("unexpected CSV header", 2, 1)
    rows = []
    for n, rec in enumerate(reader, start=3):
        if len(rec) != len(CSV_HEADER):
            raise ParseError(f"expected {len(CSV_HEADER)} fields", n, 1)
        d = dict(zip(CSV_HEADER, rec))
        rows.append(Row(
            d["example"], d["game"], float(d["snr_db"]), _parse_bool(d["psd"]),
            _parse_bool(d["converged"]), float(d["merit"]), int(d["iters_phase1"]),
            int(d["iters_phase2"]), int(d["restarts"]),
            "all" if d["user"] == "all" else int(d["user"]),
            float(d["rate_nats"]), float(d["sum_rate_nats"])))
    return rows
