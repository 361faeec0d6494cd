"""Shared fixtures and independent oracles used across the test suite."""
from itertools import product

import numpy as np
import pytest

from trajcore import MarkovGame, PeerPolicy, SuccessSet, TabularMDP, Trajectory


@pytest.fixture
def chain_mdp() -> TabularMDP:
    """3-state chain: 0 -L-> 0, 0 -R-> 1, 1 -L-> 0, 1 -R-> 2; goal {2} absorbing."""
    kernel = np.zeros((3, 2, 3))
    kernel[0, 0, 0] = 1.0
    kernel[0, 1, 1] = 1.0
    kernel[1, 0, 0] = 1.0
    kernel[1, 1, 2] = 1.0
    kernel[2, 0, 2] = 1.0
    kernel[2, 1, 2] = 1.0
    return TabularMDP(
        num_states=3,
        num_actions=2,
        kernel=kernel,
        reward=np.zeros((3, 2)),
        horizon=4,
        goals=frozenset({2}),
        initial=np.array([1.0, 0.0, 0.0]),
        goal_absorbing=True,
    )


def oracle_enumerate(mdp: TabularMDP) -> SuccessSet:
    """Generate-and-filter success enumeration, independent of the DFS path.

    Enumerates every pair sequence of length <= horizon - 1 over the full
    S x A alphabet together with every candidate goal, then keeps the valid
    ones.  Exponential; only for tiny instances.
    """
    pairs = list(product(range(mdp.num_states), range(mdp.num_actions)))
    init = set(mdp.initial_support())
    successes = []
    for length in range(mdp.horizon):
        for steps in product(pairs, repeat=length):
            for goal in sorted(mdp.goals):
                states = [s for s, _ in steps] + [goal]
                if states[0] not in init:
                    continue
                if any(s in mdp.goals for s, _ in steps):
                    continue
                if any(
                    mdp.kernel[s, a, nxt] <= 0.0
                    for (s, a), nxt in zip(steps, states[1:])
                ):
                    continue
                successes.append(Trajectory(steps=steps, terminal_state=goal))
    return SuccessSet.from_iterable(successes)


def random_game(
    rng: np.random.Generator,
    num_states: int = 4,
    num_actions_1: int = 2,
    num_actions_2: int = 2,
    horizon: int = 4,
) -> MarkovGame:
    """Dense random game with a single absorbing goal in the last state."""
    goal = num_states - 1
    joint = rng.random((num_states, num_actions_1, num_actions_2, num_states)) + 1e-3
    joint /= joint.sum(axis=-1, keepdims=True)
    joint[goal] = 0.0
    joint[goal, :, :, goal] = 1.0
    initial = np.zeros(num_states)
    initial[0] = 1.0
    return MarkovGame(
        num_states=num_states,
        num_actions_1=num_actions_1,
        num_actions_2=num_actions_2,
        joint_kernel=joint,
        reward_1=rng.random((num_states, num_actions_1, num_actions_2)),
        horizon=horizon,
        goals=frozenset({goal}),
        initial=initial,
    )


def random_peer(rng: np.random.Generator, game: MarkovGame, label: str = "peer") -> PeerPolicy:
    probs = rng.random((game.num_states, game.num_actions_2)) + 1e-3
    probs /= probs.sum(axis=1, keepdims=True)
    return PeerPolicy(probs=probs, label=label)


def reweight_support(rng: np.random.Generator, mdp: TabularMDP) -> TabularMDP:
    """Randomize kernel and initial magnitudes without touching their supports."""
    kernel = np.array(mdp.kernel)
    mask = kernel > 0
    kernel[mask] = rng.random(mask.sum()) + 1e-3
    kernel /= kernel.sum(axis=-1, keepdims=True)
    initial = np.array(mdp.initial)
    imask = initial > 0
    initial[imask] = rng.random(imask.sum()) + 1e-3
    initial /= initial.sum()
    return TabularMDP(
        num_states=mdp.num_states,
        num_actions=mdp.num_actions,
        kernel=kernel,
        reward=mdp.reward,
        horizon=mdp.horizon,
        goals=mdp.goals,
        initial=initial,
        goal_absorbing=mdp.goal_absorbing,
    )
