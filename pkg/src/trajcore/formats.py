"""Versioned JSON file formats and deterministic report emission.

Every file is a single JSON object with a ``format`` and ``version`` field.
Probability tables are dense row-major nested lists; floats round-trip
exactly (shortest-repr decimal).  Writes are atomic (temp file then rename).
Serialization is canonical (sorted keys), so fixed inputs produce
byte-identical payloads across runs and platforms.
"""
from __future__ import annotations

import hashlib
import json
import os
import tempfile
from typing import Any

import numpy as np

from . import __version__
from .drift import BudgetReport, DriftReport
from .envs import CoopKeyDoorConfig, KeyDoorConfig
from .errors import ParseError
from .mdp import MarkovGame, PeerPolicy, SuccessSet, TabularMDP, Trajectory
from .mining import Abstraction, CoreSet

FORMAT_VERSION = 1


def canonical_json(payload: Any) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def digest(payload: Any) -> str:
    return hashlib.sha256(canonical_json(payload).encode("utf-8")).hexdigest()


def file_digest(path: str) -> str:
    with open(path, "rb") as handle:
        return hashlib.sha256(handle.read()).hexdigest()


def write_json(path: str, payload: Any) -> None:
    """Atomic pretty-printed write: temp file in the target directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            json.dump(payload, handle, indent=2, sort_keys=True)
            handle.write("\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_json(path: str) -> Any:
    try:
        with open(path) as handle:
            return json.load(handle)
    except OSError as exc:
        raise ParseError(path, str(exc)) from exc
    except json.JSONDecodeError as exc:
        raise ParseError(path, f"invalid JSON at line {exc.lineno}, column {exc.colno}") from exc


def _expect(payload: Any, path: str, kind: str) -> dict:
    if not isinstance(payload, dict):
        raise ParseError(path, "top-level value must be a JSON object")
    got = payload.get("format")
    if got != kind:
        raise ParseError(path, f"expected format {kind!r}, found {got!r}")
    return payload


def _field(payload: dict, path: str, name: str):
    if name not in payload:
        raise ParseError(path, f"missing field {name!r}")
    return payload[name]


def sniff_format(path: str) -> str:
    payload = read_json(path)
    if not isinstance(payload, dict) or "format" not in payload:
        raise ParseError(path, "missing 'format' field")
    return str(payload["format"])


# ---------------------------------------------------------------------------
# MDPs and games
# ---------------------------------------------------------------------------


def mdp_to_payload(mdp: TabularMDP) -> dict:
    return {
        "format": "mdp",
        "version": FORMAT_VERSION,
        "num_states": mdp.num_states,
        "num_actions": mdp.num_actions,
        "kernel": mdp.kernel.tolist(),
        "reward": mdp.reward.tolist(),
        "horizon": mdp.horizon,
        "goals": sorted(mdp.goals),
        "initial": mdp.initial.tolist(),
        "goal_absorbing": mdp.goal_absorbing,
    }


def mdp_from_payload(payload: dict, path: str = "<memory>") -> TabularMDP:
    payload = _expect(payload, path, "mdp")
    try:
        return TabularMDP(
            num_states=int(_field(payload, path, "num_states")),
            num_actions=int(_field(payload, path, "num_actions")),
            kernel=np.asarray(_field(payload, path, "kernel"), dtype=float),
            reward=np.asarray(_field(payload, path, "reward"), dtype=float),
            horizon=int(_field(payload, path, "horizon")),
            goals=frozenset(int(g) for g in _field(payload, path, "goals")),
            initial=np.asarray(_field(payload, path, "initial"), dtype=float),
            goal_absorbing=bool(payload.get("goal_absorbing", False)),
        )
    except (TypeError, ValueError) as exc:
        raise ParseError(path, f"malformed mdp payload: {exc}") from exc


def game_to_payload(game: MarkovGame) -> dict:
    return {
        "format": "game",
        "version": FORMAT_VERSION,
        "num_states": game.num_states,
        "num_actions_1": game.num_actions_1,
        "num_actions_2": game.num_actions_2,
        "joint_kernel": game.joint_kernel.tolist(),
        "reward_1": game.reward_1.tolist(),
        "horizon": game.horizon,
        "goals": sorted(game.goals),
        "initial": game.initial.tolist(),
    }


def game_from_payload(payload: dict, path: str = "<memory>") -> MarkovGame:
    payload = _expect(payload, path, "game")
    try:
        return MarkovGame(
            num_states=int(_field(payload, path, "num_states")),
            num_actions_1=int(_field(payload, path, "num_actions_1")),
            num_actions_2=int(_field(payload, path, "num_actions_2")),
            joint_kernel=np.asarray(_field(payload, path, "joint_kernel"), dtype=float),
            reward_1=np.asarray(_field(payload, path, "reward_1"), dtype=float),
            horizon=int(_field(payload, path, "horizon")),
            goals=frozenset(int(g) for g in _field(payload, path, "goals")),
            initial=np.asarray(_field(payload, path, "initial"), dtype=float),
        )
    except (TypeError, ValueError) as exc:
        raise ParseError(path, f"malformed game payload: {exc}") from exc


# ---------------------------------------------------------------------------
# Policies and schedules
# ---------------------------------------------------------------------------


def peer_to_payload(peer: PeerPolicy) -> dict:
    return {
        "format": "peer_policy",
        "version": FORMAT_VERSION,
        "label": peer.label,
        "probs": peer.probs.tolist(),
    }


def peer_from_payload(payload: dict, path: str = "<memory>") -> PeerPolicy:
    payload = _expect(payload, path, "peer_policy")
    return PeerPolicy(
        probs=np.asarray(_field(payload, path, "probs"), dtype=float),
        label=str(payload.get("label", "peer")),
    )


def schedule_to_payload(schedule: "list[PeerPolicy] | tuple[PeerPolicy, ...]") -> dict:
    return {
        "format": "peer_schedule",
        "version": FORMAT_VERSION,
        "policies": [
            {"label": p.label, "probs": p.probs.tolist()} for p in schedule
        ],
    }


def schedule_from_payload(payload: dict, path: str = "<memory>") -> list[PeerPolicy]:
    payload = _expect(payload, path, "peer_schedule")
    policies = _field(payload, path, "policies")
    if not isinstance(policies, list) or not policies:
        raise ParseError(path, "field 'policies' must be a nonempty list")
    return [
        PeerPolicy(
            probs=np.asarray(_field(entry, path, "probs"), dtype=float),
            label=str(entry.get("label", f"peer-e{i + 1}")),
        )
        for i, entry in enumerate(policies)
    ]


# ---------------------------------------------------------------------------
# Abstractions, trajectories, cores
# ---------------------------------------------------------------------------


def abstraction_to_payload(phi: Abstraction) -> dict:
    entries = []
    if phi.mapping is not None:
        entries = [[s, a, symbol] for (s, a), symbol in sorted(phi.mapping.items())]
    return {
        "format": "abstraction",
        "version": FORMAT_VERSION,
        "label": phi.label,
        "collapse_runs": phi.collapse_runs,
        "identity": phi.mapping is None,
        "entries": entries,
    }


def abstraction_from_payload(payload: dict, path: str = "<memory>") -> Abstraction:
    payload = _expect(payload, path, "abstraction")
    if payload.get("identity", False):
        mapping = None
    else:
        entries = _field(payload, path, "entries")
        try:
            mapping = {(int(s), int(a)): str(symbol) for s, a, symbol in entries}
        except (TypeError, ValueError) as exc:
            raise ParseError(path, f"malformed abstraction entries: {exc}") from exc
    return Abstraction(
        mapping=mapping,
        collapse_runs=bool(payload.get("collapse_runs", False)),
        label=str(payload.get("label", "")),
    )


def trajectory_to_payload(traj: Trajectory) -> dict:
    return {
        "steps": [[s, a] for s, a in traj.steps],
        "terminal_state": traj.terminal_state,
    }


def trajectory_from_payload(entry: dict, path: str = "<memory>") -> Trajectory:
    try:
        terminal = entry.get("terminal_state")
        return Trajectory(
            steps=tuple((int(s), int(a)) for s, a in entry["steps"]),
            terminal_state=None if terminal is None else int(terminal),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(path, f"malformed trajectory entry: {exc}") from exc


def successes_to_payload(successes: SuccessSet) -> dict:
    return {
        "format": "successes",
        "version": FORMAT_VERSION,
        "count": len(successes),
        "trajectories": [trajectory_to_payload(t) for t in successes],
    }


def successes_from_payload(payload: dict, path: str = "<memory>") -> SuccessSet:
    payload = _expect(payload, path, "successes")
    entries = _field(payload, path, "trajectories")
    return SuccessSet.from_iterable(
        trajectory_from_payload(entry, path) for entry in entries
    )


def symbol_to_json(symbol) -> Any:
    if isinstance(symbol, tuple):
        return [int(symbol[0]), int(symbol[1])]
    return symbol


def symbol_from_json(value) -> Any:
    if isinstance(value, list):
        return (int(value[0]), int(value[1]))
    return value


def core_to_payload(core_set: CoreSet) -> dict:
    return {
        "alphabet_tag": core_set.alphabet_tag,
        "strip_terminal_applied": core_set.strip_terminal_applied,
        "count": len(core_set),
        "members": [[symbol_to_json(sym) for sym in member] for member in core_set],
    }


# ---------------------------------------------------------------------------
# Environment configs
# ---------------------------------------------------------------------------


def keydoor_config_to_payload(cfg: KeyDoorConfig) -> dict:
    return {
        "format": "keydoor_config",
        "version": FORMAT_VERSION,
        "corridor_length": cfg.corridor_length,
        "key_pos": cfg.key_pos,
        "door_pos": cfg.door_pos,
        "goal_pos": cfg.goal_pos,
        "start_pos": cfg.start_pos,
        "horizon": cfg.horizon,
    }


def keydoor_config_from_payload(payload: dict, path: str = "<memory>") -> KeyDoorConfig:
    payload = _expect(payload, path, "keydoor_config")
    try:
        return KeyDoorConfig(
            corridor_length=int(_field(payload, path, "corridor_length")),
            key_pos=int(_field(payload, path, "key_pos")),
            door_pos=int(_field(payload, path, "door_pos")),
            goal_pos=int(_field(payload, path, "goal_pos")),
            start_pos=int(_field(payload, path, "start_pos")),
            horizon=int(_field(payload, path, "horizon")),
        )
    except (TypeError, ValueError) as exc:
        raise ParseError(path, f"malformed keydoor config: {exc}") from exc


def coop_config_to_payload(cfg: CoopKeyDoorConfig) -> dict:
    payload = keydoor_config_to_payload(
        KeyDoorConfig(
            corridor_length=cfg.corridor_length,
            key_pos=cfg.key_pos,
            door_pos=cfg.door_pos,
            goal_pos=cfg.goal_pos,
            start_pos=cfg.start_pos,
            horizon=cfg.horizon,
        )
    )
    payload["format"] = "coop_keydoor_config"
    payload["peer_start"] = cfg.peer_start
    payload["peer_modes"] = list(cfg.peer_modes)
    return payload


def coop_config_from_payload(payload: dict, path: str = "<memory>") -> CoopKeyDoorConfig:
    payload = _expect(payload, path, "coop_keydoor_config")
    try:
        return CoopKeyDoorConfig(
            corridor_length=int(_field(payload, path, "corridor_length")),
            key_pos=int(_field(payload, path, "key_pos")),
            door_pos=int(_field(payload, path, "door_pos")),
            goal_pos=int(_field(payload, path, "goal_pos")),
            start_pos=int(_field(payload, path, "start_pos")),
            peer_start=int(_field(payload, path, "peer_start")),
            horizon=int(_field(payload, path, "horizon")),
            peer_modes=tuple(str(m) for m in _field(payload, path, "peer_modes")),
        )
    except (TypeError, ValueError) as exc:
        raise ParseError(path, f"malformed coop config: {exc}") from exc


# ---------------------------------------------------------------------------
# Drift payloads and reports
# ---------------------------------------------------------------------------


def budget_to_payload(budget: BudgetReport) -> dict:
    return {
        "kernel_deltas": list(budget.kernel_deltas),
        "reward_deltas": list(budget.reward_deltas),
        "total": budget.total,
    }


def drift_to_payload(report: DriftReport) -> dict:
    steps = []
    for step in report.steps:
        steps.append(
            {
                "index": step.index,
                "common_core": None
                if step.common_core is None
                else core_to_payload(step.common_core),
                "literal_intersection": None
                if step.literal_intersection is None
                else [
                    [symbol_to_json(sym) for sym in member]
                    for member in step.literal_intersection
                ],
                "vanished": [
                    {
                        "member": [symbol_to_json(s) for s in change.member],
                        "witness": trajectory_to_payload(change.witness),
                        "witness_image": [symbol_to_json(s) for s in change.witness_image],
                    }
                    for change in step.vanished
                ],
                "gained": [
                    {
                        "member": [symbol_to_json(s) for s in change.member],
                        "witness": trajectory_to_payload(change.witness),
                        "witness_image": [symbol_to_json(s) for s in change.witness_image],
                    }
                    for change in step.gained
                ],
                "common_within_individual": step.common_within_individual,
            }
        )
    return {
        "episode_cores": [
            None if c is None else core_to_payload(c) for c in report.episode_cores
        ],
        "steps": steps,
        "individual_core": None
        if report.individual is None
        else core_to_payload(report.individual),
        "individual_core_definition": report.individual_core_definition,
        "budget": budget_to_payload(report.budget),
    }


def build_report(command: list[str], inputs: "dict[str, str]", results: Any, elapsed: float) -> dict:
    """Self-describing command report with input and result digests."""
    return {
        "format": "report",
        "version": FORMAT_VERSION,
        "tool_version": __version__,
        "command": list(command),
        "inputs": dict(sorted(inputs.items())),
        "results": results,
        "results_digest": digest(results),
        "timing_s": round(elapsed, 6),
    }
