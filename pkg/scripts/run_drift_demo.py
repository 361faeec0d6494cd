#!/usr/bin/env python3
"""Drift demo: helper -> independent peer schedule on the cooperative corridor.

Builds the default cooperative key-door game, folds the two scripted peer
policies into it, and prints the per-episode cores, what vanished between
episodes, the individual task core, and the variation budget.
"""
import argparse

from trajcore import EpisodeSequence, build_coop_keydoor, drift_report
from trajcore.envs import DEFAULT_COOP


def fmt(member) -> str:
    return " > ".join(str(sym) for sym in member)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--keep-terminal", action="store_true",
                        help="keep the goal symbol inside mined members")
    args = parser.parse_args()

    game, schedule, phi = build_coop_keydoor(DEFAULT_COOP)
    seq = EpisodeSequence.from_schedule(game, schedule)
    report = drift_report(seq, phi=phi, strip_terminal=not args.keep_terminal)

    print(f"game: {game.num_states} states, horizon {game.horizon}")
    print(f"schedule: {[p.label for p in schedule]}")
    print()
    for i, core_set in enumerate(report.episode_cores, start=1):
        print(f"episode {i} core:")
        if core_set is None:
            print("  (no successes)")
            continue
        for member in core_set.members:
            print(f"  {fmt(member)}")
    print()
    for step in report.steps:
        print(f"step {step.index} -> {step.index + 1}:")
        if step.common_core is None:
            print("  (an episode had no successes)")
            continue
        print("  shared structure across both episodes:")
        for member in step.common_core.members:
            print(f"    {fmt(member)}")
        print(f"  literal core intersection: "
              f"{[fmt(m) for m in step.literal_intersection] or 'empty'}")
        for change in step.vanished:
            print(f"  vanished: {fmt(change.member)}")
            print(f"    counterexample success: {fmt(change.witness_image)}")
        for change in step.gained:
            print(f"  gained:   {fmt(change.member)}")
        print(f"  shared structure within individual core: {step.common_within_individual}")
    print()
    print(f"individual task core ({report.individual_core_definition}):")
    for member in report.individual.members:
        print(f"  {fmt(member)}")
    print()
    budget = report.budget
    print(f"variation budget: kernel deltas {list(budget.kernel_deltas)}, "
          f"reward deltas {list(budget.reward_deltas)}, total {budget.total}")


if __name__ == "__main__":
    main()
