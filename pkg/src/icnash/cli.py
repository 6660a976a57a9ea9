"""Command-line entry point.

Subcommands::

    icnash solve --config cfg.json [--game A] [--snr-db 10] [--profile-out p.json]
    icnash sweep --config cfg.json [--out rows.csv]
    icnash stats --config cfg.json [--out stats.csv]
    icnash check --config cfg.json --profile p.json [--epsilon 1e-3]

Exit status is 0 on success, 2 when any row (or the checked profile) did
not converge, and 1 on configuration or I/O errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .channel import Info
from .errors import ConfigInvalid, IoError, ParseError
from .experiments import (ExperimentConfig, emit_csv, emit_stats_csv,
                          parse_config, phase1_stats, run_preset,
                          solve_point)
from .game import GameSpec, StrategyProfile, epsilon_ne_check, rates

log = logging.getLogger("icnash")

EXIT_OK, EXIT_ERROR, EXIT_NONCONVERGED = 0, 1, 2


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="JSON experiment config")
    common.add_argument("--out", help="output path (overrides output_path)")
    common.add_argument("--seed", type=int, help="overrides the config seed")
    common.add_argument("--log-level", default="WARNING",
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    p = argparse.ArgumentParser(prog="icnash", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("solve", parents=[common],
                       help="solve one game at one SNR")
    s.add_argument("--game", choices=["A", "I", "D", "LB"],
                   help="defaults to the first game in the config")
    s.add_argument("--snr-db", type=float,
                   help="defaults to the first SNR in the config")
    s.add_argument("--profile-out", help="write the solved profile as JSON")
    sub.add_parser("sweep", parents=[common], help="every game at every SNR")
    sub.add_parser("stats", parents=[common], help="Phase-1 random-start statistics")
    c = sub.add_parser("check", parents=[common],
                       help="epsilon-NE check of a saved profile")
    c.add_argument("--profile", required=True, help="JSON from solve --profile-out")
    c.add_argument("--epsilon", type=float,
                   help="defaults to 10 x the solver epsilon for the game")
    c.add_argument("--deviations", type=int, default=1000)
    return p


def _output(text: str, path: str | None):
    if path is None:
        sys.stdout.write(text)


def _write_text(path, text):
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from None


def _cmd_solve(args, config: ExperimentConfig) -> int:
    game = args.game or config.games[0]
    snr = config.snr_db_list[0] if args.snr_db is None else args.snr_db
    rows, res = solve_point(config, game, snr)
    path = args.out or config.output_path
    _output(emit_csv(rows, path), path)
    if args.profile_out:
        if res is None:
            raise ConfigInvalid(f"no equilibrium profile to save for game {game}")
        payload = {"example": config.name, "game": game, "snr_db": snr,
                   "merit": res.merit, "powers": res.profile.powers.tolist()}
        _write_text(args.profile_out, json.dumps(payload, indent=1) + "\n")
    return EXIT_OK if all(r.converged for r in rows) else EXIT_NONCONVERGED


def _cmd_sweep(args, config: ExperimentConfig) -> int:
    rows = run_preset(config)
    path = args.out or config.output_path
    _output(emit_csv(rows, path), path)
    bad = sum(1 for r in rows if r.user == "all" and not r.converged)
    if bad:
        log.warning("%d of %d points did not converge", bad,
                    sum(1 for r in rows if r.user == "all"))
    return EXIT_OK if bad == 0 else EXIT_NONCONVERGED


def _cmd_stats(args, config: ExperimentConfig) -> int:
    rows = phase1_stats(config)
    path = args.out or config.output_path
    _output(emit_stats_csv(rows, path), path)
    return EXIT_OK


def _load_profile(path):
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise IoError(f"cannot read profile {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid profile JSON: {exc.msg}", exc.lineno,
                         exc.colno) from None
    try:
        return obj["game"], float(obj["snr_db"]), np.asarray(obj["powers"], float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigInvalid(f"profile needs game, snr_db and powers: {exc}") from None


def _cmd_check(args, config: ExperimentConfig) -> int:
    letter, snr, powers = _load_profile(args.profile)
    game = GameSpec.from_snr(config.channel, snr, Info(letter))
    if powers.shape != (game.n_users, game.n_visible):
        raise ConfigInvalid(f"profile shape {powers.shape} does not match the "
                            f"game {(game.n_users, game.n_visible)}")
    profile = StrategyProfile(game.info, powers)
    eps = args.epsilon if args.epsilon is not None \
        else 10 * config.solver_for(letter).epsilon
    rep = epsilon_ne_check(profile, game, eps, args.deviations, config.seed)
    r = rates(profile, game)
    lines = [f"game={letter} snr_db={snr:g} epsilon={eps:.3g}"]
    lines += [f"user={i} rate_nats={v:.9g} gain={g:.3g}"
              for i, (v, g) in enumerate(zip(r, rep.user_gains))]
    lines.append(f"max_gain={rep.max_gain:.3g} is_ne={str(rep.is_ne).lower()}")
    text = "\n".join(lines) + "\n"
    if args.out:
        _write_text(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if rep.is_ne else EXIT_NONCONVERGED


COMMANDS = {"solve": _cmd_solve, "sweep": _cmd_sweep, "stats": _cmd_stats,
            "check": _cmd_check}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=args.log_level,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = parse_config(args.config)
        if args.seed is not None:
            config = dataclasses.replace(config, seed=args.seed)
        return COMMANDS[args.command](args, config)
    except (ParseError, ConfigInvalid, IoError) as exc:
        log.error("%s", exc)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
