"""Episode schedules over a game: per-episode cores, drift, variation budget.

An episode schedule folds one peer policy per episode into the game, giving a
sequence of induced MDPs.  This module quantifies how much that sequence
moves (sup-norm variation budget) and how the per-episode common-subsequence
cores change: which prototypes vanish or appear between consecutive episodes,
each certified by a concrete counterexample trajectory.

"Shared structure across two episodes" is computed as the core over the union
of both success sets (sequences common to every success of either episode);
the literal set intersection of the two core sets is reported alongside it
for comparison.  The individual task core is defined as the core of the MDP
induced by the full-support uniform peer policy, i.e. the structure that
survives every peer behavior the joint dynamics support; this definition is
echoed in every report.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EmptySuccessSet
from .mdp import (
    DEFAULT_NODE_BUDGET,
    MarkovGame,
    PeerPolicy,
    SuccessSet,
    TabularMDP,
    Trajectory,
    enumerate_successes,
    induce_mdp,
)
from .mining import (
    DEFAULT_SEQ_BUDGET,
    IDENTITY,
    Abstraction,
    CoreSet,
    SymbolSeq,
    apply_abstraction,
    canonical_member_order,
    core,
    is_subsequence,
)

INDIVIDUAL_CORE_DEFINITION = (
    "core of the MDP induced by the full-support uniform peer policy"
)


@dataclass(frozen=True, eq=False)
class EpisodeSequence:
    """A game plus one peer policy per episode, with induced MDPs materialized."""

    game: MarkovGame
    schedule: tuple[PeerPolicy, ...]
    induced: tuple[TabularMDP, ...]

    @classmethod
    def from_schedule(
        cls, game: MarkovGame, schedule: "list[PeerPolicy] | tuple[PeerPolicy, ...]"
    ) -> "EpisodeSequence":
        schedule = tuple(schedule)
        if not schedule:
            raise ValueError("need at least one episode")
        induced = tuple(induce_mdp(game, peer) for peer in schedule)
        return cls(game=game, schedule=schedule, induced=induced)

    @property
    def num_episodes(self) -> int:
        return len(self.schedule)


@dataclass(frozen=True)
class BudgetReport:
    """Per-step sup-norm deltas between consecutive induced MDPs and their sum."""

    kernel_deltas: tuple[float, ...]
    reward_deltas: tuple[float, ...]
    total: float


@dataclass(frozen=True)
class PrototypeChange:
    """A core member that fails to embed in some success of the other episode."""

    member: SymbolSeq
    witness: Trajectory
    witness_image: SymbolSeq


@dataclass(frozen=True)
class DriftStep:
    """Everything measured between episode ``index`` and ``index + 1`` (1-based)."""

    index: int
    common_core: CoreSet | None
    literal_intersection: tuple[SymbolSeq, ...] | None
    vanished: tuple[PrototypeChange, ...]
    gained: tuple[PrototypeChange, ...]
    common_within_individual: bool | None


@dataclass(frozen=True)
class DriftReport:
    episode_cores: tuple[CoreSet | None, ...]
    steps: tuple[DriftStep, ...]
    individual: CoreSet | None
    budget: BudgetReport
    individual_core_definition: str = INDIVIDUAL_CORE_DEFINITION


def kernel_distance(kernel: np.ndarray, previous: np.ndarray) -> float:
    """Largest L1 distance between matching next-state rows."""
    kernel = np.asarray(kernel, dtype=float)
    previous = np.asarray(previous, dtype=float)
    if kernel.shape != previous.shape:
        raise DimensionMismatch(f"kernel shapes differ: {kernel.shape} vs {previous.shape}")
    return float(np.abs(kernel - previous).sum(axis=-1).max())


def reward_distance(reward: np.ndarray, previous: np.ndarray) -> float:
    """Entrywise sup-norm distance between reward tables."""
    reward = np.asarray(reward, dtype=float)
    previous = np.asarray(previous, dtype=float)
    if reward.shape != previous.shape:
        raise DimensionMismatch(f"reward shapes differ: {reward.shape} vs {previous.shape}")
    if reward.size == 0:
        return 0.0
    return float(np.abs(reward - previous).max())


def variation_budget(seq: EpisodeSequence) -> BudgetReport:
    """Cumulative kernel-plus-reward drift over the induced episode sequence."""
    kernel_deltas = []
    reward_deltas = []
    for prev, cur in zip(seq.induced, seq.induced[1:]):
        kernel_deltas.append(kernel_distance(cur.kernel, prev.kernel))
        reward_deltas.append(reward_distance(cur.reward, prev.reward))
    total = float(sum(kernel_deltas) + sum(reward_deltas))
    return BudgetReport(
        kernel_deltas=tuple(kernel_deltas),
        reward_deltas=tuple(reward_deltas),
        total=total,
    )


def uniform_peer(game: MarkovGame) -> PeerPolicy:
    probs = np.full((game.num_states, game.num_actions_2), 1.0 / game.num_actions_2)
    return PeerPolicy(probs=probs, label="uniform-full-support")


def individual_core(
    game: MarkovGame,
    phi: Abstraction = IDENTITY,
    strip_terminal: bool = False,
    node_budget: int = DEFAULT_NODE_BUDGET,
    seq_budget: int = DEFAULT_SEQ_BUDGET,
) -> CoreSet:
    """Core over every trajectory feasible under any peer behavior.

    Computed on the MDP induced by the full-support uniform peer, whose
    kernel support is the union of the supports induced by every possible
    peer policy.
    """
    full = induce_mdp(game, uniform_peer(game))
    successes = enumerate_successes(full, node_budget=node_budget)
    if not len(successes):
        raise EmptySuccessSet("no trajectory succeeds under any peer behavior")
    return core(successes, phi=phi, strip_terminal=strip_terminal, budget=seq_budget)


def episode_cores(
    seq: EpisodeSequence,
    phi: Abstraction = IDENTITY,
    strip_terminal: bool = False,
    node_budget: int = DEFAULT_NODE_BUDGET,
    seq_budget: int = DEFAULT_SEQ_BUDGET,
) -> list[CoreSet | None]:
    """Per-episode cores; None marks an episode whose success set is empty."""
    out: list[CoreSet | None] = []
    for mdp in seq.induced:
        successes = enumerate_successes(mdp, node_budget=node_budget)
        if not len(successes):
            out.append(None)
        else:
            out.append(core(successes, phi=phi, strip_terminal=strip_terminal, budget=seq_budget))
    return out


def _certified_changes(
    lost_from: CoreSet,
    kept_in: CoreSet,
    other_successes: SuccessSet,
    phi: Abstraction,
) -> tuple[PrototypeChange, ...]:
    """Members of ``lost_from`` with no superseding member in ``kept_in``.

    Each is certified by a trajectory of the other episode it fails to embed
    into; such a trajectory must exist whenever no superseding member does.
    """
    changes = []
    for member in lost_from.members:
        if any(is_subsequence(member, other) for other in kept_in.members):
            continue
        witness = None
        for traj in other_successes:
            image = apply_abstraction(traj, phi)
            if not is_subsequence(member, image):
                witness = PrototypeChange(member=member, witness=traj, witness_image=image)
                break
        assert witness is not None, (
            f"prototype {member!r} embeds in every success yet has no "
            f"superseding core member; core computation is inconsistent"
        )
        changes.append(witness)
    return tuple(changes)


def drift_report(
    seq: EpisodeSequence,
    phi: Abstraction = IDENTITY,
    strip_terminal: bool = False,
    node_budget: int = DEFAULT_NODE_BUDGET,
    seq_budget: int = DEFAULT_SEQ_BUDGET,
) -> DriftReport:
    """Full drift analysis of an episode schedule.

    Assembles per-episode cores, per-step shared structure (core over the
    union of consecutive success sets, plus the literal core intersection),
    vanished and gained prototypes with certifying witnesses, the individual
    task core, the variation budget, and a per-step check that the shared
    structure is embedded in the individual core.
    """
    success_sets = [enumerate_successes(m, node_budget=node_budget) for m in seq.induced]
    cores: list[CoreSet | None] = [
        core(s, phi=phi, strip_terminal=strip_terminal, budget=seq_budget)
        if len(s)
        else None
        for s in success_sets
    ]

    try:
        individual = individual_core(
            seq.game,
            phi=phi,
            strip_terminal=strip_terminal,
            node_budget=node_budget,
            seq_budget=seq_budget,
        )
    except EmptySuccessSet:
        individual = None

    steps = []
    for e in range(len(cores) - 1):
        core_a, core_b = cores[e], cores[e + 1]
        if core_a is None or core_b is None:
            steps.append(
                DriftStep(
                    index=e + 1,
                    common_core=None,
                    literal_intersection=None,
                    vanished=(),
                    gained=(),
                    common_within_individual=None,
                )
            )
            continue
        union_trajectories = list(success_sets[e]) + list(success_sets[e + 1])
        common = core(
            union_trajectories, phi=phi, strip_terminal=strip_terminal, budget=seq_budget
        )
        literal = canonical_member_order(
            set(core_a.members) & set(core_b.members)
        )
        vanished = _certified_changes(core_a, core_b, success_sets[e + 1], phi)
        gained = _certified_changes(core_b, core_a, success_sets[e], phi)
        if individual is None:
            contained = None
        else:
            contained = all(
                any(is_subsequence(member, big) for big in individual.members)
                for member in common.members
            )
        steps.append(
            DriftStep(
                index=e + 1,
                common_core=common,
                literal_intersection=literal,
                vanished=vanished,
                gained=gained,
                common_within_individual=contained,
            )
        )

    return DriftReport(
        episode_cores=tuple(cores),
        steps=tuple(steps),
        individual=individual,
        budget=variation_budget(seq),
    )
