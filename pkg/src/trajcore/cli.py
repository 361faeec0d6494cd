"""Command-line surface: desk-scale experiments over the file formats.

Verbs: enumerate, mine, induce, budget, drift, gen, oracle-check.  Every
command prints a self-describing JSON report to stdout; ``--out`` (or
``--out-dir`` for gen) additionally writes the primary payload to disk.

Exit codes: 0 success, 2 usage, 3 file parse error, 4 validation or
precondition failure, 5 search-budget guard tripped, 6 internal assertion.
The ``TRAJCORE_BUDGET`` environment variable overrides the default search
budget wherever ``--budget`` is not given explicitly.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .drift import EpisodeSequence, drift_report, variation_budget
from .envs import build_coop_keydoor, build_keydoor
from .errors import (
    EmptySuccessSet,
    GuardError,
    OracleScaleError,
    ParseError,
    TrajcoreError,
    UnmappedSymbol,
    ValidationError,
)
from .mdp import DEFAULT_NODE_BUDGET, enumerate_successes, induce_mdp
from .mining import (
    DEFAULT_SEQ_BUDGET,
    IDENTITY,
    Abstraction,
    brute_force_core,
    core,
)
from . import formats

BUDGET_ENV = "TRAJCORE_BUDGET"

EXIT_OK = 0
EXIT_PARSE = 3
EXIT_VALIDATION = 4
EXIT_GUARD = 5
EXIT_INTERNAL = 6


def _budget_default() -> int | None:
    raw = os.environ.get(BUDGET_ENV)
    if raw is None:
        return None
    try:
        value = int(raw)
    except ValueError as exc:
        raise ParseError(BUDGET_ENV, f"budget override must be an integer, got {raw!r}") from exc
    if value <= 0:
        raise ParseError(BUDGET_ENV, f"budget override must be positive, got {value}")
    return value


def _budgets(args) -> tuple[int, int]:
    """Resolve (node_budget, seq_budget) from --budget / env / defaults."""
    override = args.budget if args.budget is not None else _budget_default()
    node = override if override is not None else DEFAULT_NODE_BUDGET
    seq = override if override is not None else DEFAULT_SEQ_BUDGET
    return node, seq


def _load_phi(args) -> Abstraction:
    if getattr(args, "phi", None):
        phi = formats.abstraction_from_payload(formats.read_json(args.phi), args.phi)
    else:
        phi = IDENTITY
    if getattr(args, "collapse_runs", False) and not phi.collapse_runs:
        phi = Abstraction(mapping=phi.mapping, collapse_runs=True, label=phi.label)
    return phi


def _input_digests(paths) -> dict:
    return {path: formats.file_digest(path) for path in paths if path}


# ---------------------------------------------------------------------------
# Command implementations: each returns (results payload, input paths, out files)
# ---------------------------------------------------------------------------


def cmd_enumerate(args):
    node_budget, _ = _budgets(args)
    mdp = formats.mdp_from_payload(formats.read_json(args.mdp_file), args.mdp_file)
    successes = enumerate_successes(mdp, node_budget=node_budget)
    payload = formats.successes_to_payload(successes)
    if args.out:
        formats.write_json(args.out, payload)
    return payload, [args.mdp_file], args.out


def cmd_mine(args):
    node_budget, seq_budget = _budgets(args)
    kind = formats.sniff_format(args.input_file)
    if kind == "mdp":
        mdp = formats.mdp_from_payload(formats.read_json(args.input_file), args.input_file)
        successes = enumerate_successes(mdp, node_budget=node_budget)
    elif kind == "successes":
        successes = formats.successes_from_payload(
            formats.read_json(args.input_file), args.input_file
        )
    else:
        raise ParseError(args.input_file, f"cannot mine from format {kind!r}")
    if not len(successes):
        raise EmptySuccessSet("input contains no successful trajectory")
    phi = _load_phi(args)
    mined = core(
        successes, phi=phi, strip_terminal=args.strip_terminal, budget=seq_budget
    )
    payload = {
        "format": "core",
        "version": formats.FORMAT_VERSION,
        "source_format": kind,
        "num_successes": len(successes),
        "collapse_runs": phi.collapse_runs,
        **formats.core_to_payload(mined),
    }
    if args.out:
        formats.write_json(args.out, payload)
    return payload, [args.input_file, getattr(args, "phi", None)], args.out


def cmd_induce(args):
    game = formats.game_from_payload(formats.read_json(args.game_file), args.game_file)
    peer = formats.peer_from_payload(formats.read_json(args.peer_file), args.peer_file)
    induced = induce_mdp(game, peer)
    payload = formats.mdp_to_payload(induced)
    if args.out:
        formats.write_json(args.out, payload)
    return payload, [args.game_file, args.peer_file], args.out


def _episode_sequence(args) -> tuple[EpisodeSequence, list[str]]:
    game = formats.game_from_payload(formats.read_json(args.game_file), args.game_file)
    schedule = formats.schedule_from_payload(
        formats.read_json(args.schedule_file), args.schedule_file
    )
    return EpisodeSequence.from_schedule(game, schedule), [args.game_file, args.schedule_file]


def cmd_budget(args):
    seq, inputs = _episode_sequence(args)
    budget = variation_budget(seq)
    payload = {
        "format": "budget",
        "version": formats.FORMAT_VERSION,
        "num_episodes": seq.num_episodes,
        **formats.budget_to_payload(budget),
    }
    if args.out:
        formats.write_json(args.out, payload)
    return payload, inputs, args.out


def cmd_drift(args):
    node_budget, seq_budget = _budgets(args)
    seq, inputs = _episode_sequence(args)
    phi = _load_phi(args)
    report = drift_report(
        seq,
        phi=phi,
        strip_terminal=args.strip_terminal,
        node_budget=node_budget,
        seq_budget=seq_budget,
    )
    payload = {
        "format": "drift",
        "version": formats.FORMAT_VERSION,
        "num_episodes": seq.num_episodes,
        **formats.drift_to_payload(report),
    }
    if args.out:
        formats.write_json(args.out, payload)
    if getattr(args, "phi", None):
        inputs = inputs + [args.phi]
    return payload, inputs, args.out


def cmd_gen(args):
    out_dir = args.out_dir or "."
    written = []
    if args.env_kind == "keydoor":
        cfg = formats.keydoor_config_from_payload(
            formats.read_json(args.config_file), args.config_file
        )
        mdp, phi = build_keydoor(cfg)
        prefix = args.prefix or "keydoor"
        paths = {
            "mdp": os.path.join(out_dir, f"{prefix}.mdp.json"),
            "phi": os.path.join(out_dir, f"{prefix}.phi.json"),
        }
        formats.write_json(paths["mdp"], formats.mdp_to_payload(mdp))
        formats.write_json(paths["phi"], formats.abstraction_to_payload(phi))
        written = [paths["mdp"], paths["phi"]]
    else:  # coop-keydoor
        cfg = formats.coop_config_from_payload(
            formats.read_json(args.config_file), args.config_file
        )
        game, schedule, phi = build_coop_keydoor(cfg)
        prefix = args.prefix or "coop_keydoor"
        paths = {
            "game": os.path.join(out_dir, f"{prefix}.game.json"),
            "schedule": os.path.join(out_dir, f"{prefix}.schedule.json"),
            "phi": os.path.join(out_dir, f"{prefix}.phi.json"),
        }
        formats.write_json(paths["game"], formats.game_to_payload(game))
        formats.write_json(paths["schedule"], formats.schedule_to_payload(schedule))
        formats.write_json(paths["phi"], formats.abstraction_to_payload(phi))
        written = [paths["game"], paths["schedule"], paths["phi"]]
    payload = {
        "format": "gen",
        "version": formats.FORMAT_VERSION,
        "env_kind": args.env_kind,
        "written": written,
    }
    return payload, [args.config_file], None


def _random_family(rng: np.random.Generator, alphabet: str) -> list[tuple]:
    k = int(rng.integers(2, 5))
    family = []
    for _ in range(k):
        length = int(rng.integers(1, 11))
        family.append(
            tuple(alphabet[int(i)] for i in rng.integers(0, len(alphabet), size=length))
        )
    return family


def cmd_oracle_check(args):
    _, seq_budget = _budgets(args)
    rng = np.random.Generator(np.random.PCG64(args.seed))
    alphabet = "abcdef"
    mismatches = []
    for trial in range(args.trials):
        family = _random_family(rng, alphabet)
        fast = core(family, budget=seq_budget)
        slow = brute_force_core(family)
        if fast.members != slow.members:
            mismatches.append(
                {
                    "trial": trial,
                    "family": [list(seq) for seq in family],
                    "fast": [list(m) for m in fast.members],
                    "oracle": [list(m) for m in slow.members],
                }
            )
    payload = {
        "format": "oracle_check",
        "version": formats.FORMAT_VERSION,
        "trials": args.trials,
        "seed": args.seed,
        "agreements": args.trials - len(mismatches),
        "mismatches": mismatches,
    }
    if args.out:
        formats.write_json(args.out, payload)
    assert not mismatches, f"fast path disagrees with oracle on {len(mismatches)} trials"
    return payload, [], args.out


# ---------------------------------------------------------------------------
# Parser and dispatch
# ---------------------------------------------------------------------------


def _add_budget(parser):
    parser.add_argument(
        "--budget",
        type=int,
        default=None,
        help=f"search budget guard override (default from ${BUDGET_ENV} or built-in)",
    )


def _add_out(parser):
    parser.add_argument("--out", default=None, help="write the primary payload to this file")


def _add_mining_flags(parser):
    parser.add_argument("--phi", default=None, help="abstraction map file")
    parser.add_argument(
        "--strip-terminal",
        action="store_true",
        help="drop terminal symbols before mining",
    )
    parser.add_argument(
        "--collapse-runs",
        action="store_true",
        help="collapse runs of equal abstract symbols",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trajcore",
        description="Mine shared trajectory structure in tabular MDPs and games.",
    )
    parser.add_argument("--version", action="version", version=f"trajcore {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enumerate", help="enumerate all successful trajectories of an MDP")
    p.add_argument("mdp_file")
    _add_budget(p)
    _add_out(p)
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("mine", help="mine the core of an MDP or a success-set file")
    p.add_argument("input_file")
    _add_mining_flags(p)
    _add_budget(p)
    _add_out(p)
    p.set_defaults(func=cmd_mine)

    p = sub.add_parser("induce", help="fold a peer policy into a game")
    p.add_argument("game_file")
    p.add_argument("peer_file")
    _add_out(p)
    p.set_defaults(func=cmd_induce)

    p = sub.add_parser("budget", help="variation budget of an episode schedule")
    p.add_argument("game_file")
    p.add_argument("schedule_file")
    _add_out(p)
    p.set_defaults(func=cmd_budget)

    p = sub.add_parser("drift", help="full drift report for an episode schedule")
    p.add_argument("game_file")
    p.add_argument("schedule_file")
    _add_mining_flags(p)
    _add_budget(p)
    _add_out(p)
    p.set_defaults(func=cmd_drift)

    p = sub.add_parser("gen", help="generate a key-door environment from a config")
    p.add_argument("env_kind", choices=["keydoor", "coop-keydoor"])
    p.add_argument("config_file")
    p.add_argument("--out-dir", default=".", help="directory for generated files")
    p.add_argument("--prefix", default=None, help="filename prefix for generated files")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("oracle-check", help="compare fast core mining against the oracle")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    _add_budget(p)
    _add_out(p)
    p.set_defaults(func=cmd_oracle_check)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    command_echo = list(sys.argv[1:] if argv is None else argv)
    start = time.perf_counter()
    try:
        results, input_paths, _out = args.func(args)
        report = formats.build_report(
            command_echo, _input_digests(input_paths), results, time.perf_counter() - start
        )
    except ParseError as exc:
        print(f"trajcore: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (ValidationError, EmptySuccessSet, UnmappedSymbol, OracleScaleError, ValueError) as exc:
        print(f"trajcore: invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except GuardError as exc:
        print(f"trajcore: budget guard: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (AssertionError, TrajcoreError) as exc:
        print(f"trajcore: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    print(json.dumps(report, indent=2, sort_keys=True))
    return EXIT_OK


def entrypoint() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entrypoint()
