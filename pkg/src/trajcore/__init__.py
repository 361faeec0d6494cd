"""Trajectory-core mining over tabular MDPs and two-player Markov games.

Build finite-horizon tabular MDPs or decentralized two-player games,
enumerate every successful trajectory, mine the maximal common subsequences
shared by all of them (optionally under an abstraction), and measure how a
drifting peer policy erodes that shared structure via a variation budget
over the induced MDP sequence.
"""

__version__ = "0.1.0"

from .errors import (
    BudgetExceeded,
    ConfigError,
    DimensionMismatch,
    EmptyGoalError,
    EmptySuccessSet,
    ExplosionGuard,
    GuardError,
    HorizonError,
    OracleScaleError,
    ParseError,
    RowSumError,
    TrajcoreError,
    UnmappedSymbol,
    ValidationError,
)
from .mdp import (
    TERMINAL,
    MarkovGame,
    PeerPolicy,
    RolloutSet,
    SuccessSet,
    TabularMDP,
    Trajectory,
    enumerate_successes,
    game_from_mdp,
    induce_mdp,
    is_successful,
    rollout,
    validate_game,
    validate_mdp,
    validate_peer,
)
from .mining import (
    IDENTITY,
    Abstraction,
    CoreSet,
    apply_abstraction,
    brute_force_core,
    common_subsequences,
    core,
    core_nonempty_witness,
    is_subsequence,
    lcs_pair,
)
from .trie import TrajectoryTrie, build_trie, is_complete, successful_leaves
from .drift import (
    BudgetReport,
    DriftReport,
    DriftStep,
    EpisodeSequence,
    PrototypeChange,
    drift_report,
    episode_cores,
    individual_core,
    kernel_distance,
    reward_distance,
    uniform_peer,
    variation_budget,
)
from .envs import (
    HELPER,
    INDEPENDENT,
    CoopKeyDoorConfig,
    KeyDoorConfig,
    build_coop_keydoor,
    build_keydoor,
    random_mdp,
)

__all__ = [
    "__version__",
    "TERMINAL",
    "TabularMDP",
    "MarkovGame",
    "PeerPolicy",
    "Trajectory",
    "SuccessSet",
    "RolloutSet",
    "validate_mdp",
    "validate_game",
    "validate_peer",
    "induce_mdp",
    "game_from_mdp",
    "enumerate_successes",
    "is_successful",
    "rollout",
    "TrajectoryTrie",
    "build_trie",
    "successful_leaves",
    "is_complete",
    "Abstraction",
    "IDENTITY",
    "CoreSet",
    "is_subsequence",
    "apply_abstraction",
    "lcs_pair",
    "common_subsequences",
    "core",
    "core_nonempty_witness",
    "brute_force_core",
    "EpisodeSequence",
    "BudgetReport",
    "DriftReport",
    "DriftStep",
    "PrototypeChange",
    "kernel_distance",
    "reward_distance",
    "variation_budget",
    "episode_cores",
    "drift_report",
    "individual_core",
    "uniform_peer",
    "KeyDoorConfig",
    "CoopKeyDoorConfig",
    "HELPER",
    "INDEPENDENT",
    "build_keydoor",
    "build_coop_keydoor",
    "random_mdp",
    "TrajcoreError",
    "ValidationError",
    "RowSumError",
    "EmptyGoalError",
    "HorizonError",
    "DimensionMismatch",
    "ConfigError",
    "UnmappedSymbol",
    "EmptySuccessSet",
    "GuardError",
    "ExplosionGuard",
    "BudgetExceeded",
    "OracleScaleError",
    "ParseError",
]
