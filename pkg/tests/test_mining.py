from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trajcore import (
    TERMINAL,
    Abstraction,
    BudgetExceeded,
    EmptySuccessSet,
    OracleScaleError,
    Trajectory,
    UnmappedSymbol,
    apply_abstraction,
    brute_force_core,
    common_subsequences,
    core,
    core_nonempty_witness,
    enumerate_successes,
    is_subsequence,
    lcs_pair,
)
from trajcore.mining import maximal_elements

symbols = st.sampled_from("abcd")
seqs = st.lists(symbols, min_size=0, max_size=8).map(tuple)


def brute_is_subsequence(u, v):
    """Check every index embedding explicitly."""
    return any(
        all(v[j] == u[i] for i, j in enumerate(picks))
        for picks in combinations(range(len(v)), len(u))
    )


def all_subsequences(seq):
    out = set()
    for r in range(len(seq) + 1):
        for picks in combinations(range(len(seq)), r):
            out.add(tuple(seq[i] for i in picks))
    return out


# ---------------------------------------------------------------------------
# is_subsequence
# ---------------------------------------------------------------------------


def test_is_subsequence_examples():
    assert is_subsequence((), ("a", "b"))
    assert is_subsequence(("b", "c"), ("b", "c", "a", "a"))
    assert not is_subsequence(("c", "b"), ("b", "c", "a", "a"))
    assert is_subsequence(("a", "b"), ("a", "b"))


@settings(max_examples=200, deadline=None)
@given(seqs, seqs)
def test_is_subsequence_matches_brute_force(u, v):
    assert is_subsequence(u, v) == brute_is_subsequence(u, v)


# ---------------------------------------------------------------------------
# apply_abstraction
# ---------------------------------------------------------------------------


def test_identity_abstraction_returns_pairs():
    traj = Trajectory(steps=((0, 1), (1, 1)), terminal_state=2)
    assert apply_abstraction(traj) == ((0, 1), (1, 1), (2, TERMINAL))


def test_mapping_abstraction_with_run_collapse():
    mapping = {
        (0, 0): "move",
        (1, 0): "move",
        (2, 0): "move",
        (3, 1): "find_key",
        (4, TERMINAL): "terminal",
    }
    phi = Abstraction(mapping=mapping, collapse_runs=True, label="demo")
    traj = Trajectory(steps=((0, 0), (1, 0), (2, 0), (3, 1)), terminal_state=4)
    assert apply_abstraction(traj, phi) == ("move", "find_key", "terminal")


def test_unmapped_pair_raises():
    phi = Abstraction(mapping={(0, 0): "move"})
    with pytest.raises(UnmappedSymbol):
        apply_abstraction(Trajectory(steps=((5, 1),)), phi)


# ---------------------------------------------------------------------------
# lcs_pair
# ---------------------------------------------------------------------------


def test_lcs_identity():
    x = tuple("abcab")
    assert lcs_pair(x, x) == (len(x), x)


def test_lcs_disjoint_alphabets():
    assert lcs_pair(tuple("aaa"), tuple("bbb")) == (0, ())


def test_lcs_known_length_case():
    x, y = tuple("abcbdab"), tuple("bdcaba")
    length, witness = lcs_pair(x, y)
    brute_best = max(
        (len(u) for u in all_subsequences(x) if brute_is_subsequence(u, y)),
        default=0,
    )
    assert brute_best == 4
    assert length == 4
    assert is_subsequence(witness, x) and is_subsequence(witness, y)


@settings(max_examples=150, deadline=None)
@given(seqs, seqs)
def test_lcs_matches_brute_force_and_witness_is_least(x, y):
    length, witness = lcs_pair(x, y)
    common = {u for u in all_subsequences(x) if brute_is_subsequence(u, y)}
    best = max((len(u) for u in common), default=0)
    assert length == best
    assert len(witness) == length
    assert witness == min(u for u in common if len(u) == best)


# ---------------------------------------------------------------------------
# common_subsequences
# ---------------------------------------------------------------------------


def test_common_subsequences_single_sequence():
    assert common_subsequences([("a", "b")]) == {(), ("a",), ("b",), ("a", "b")}


def test_common_subsequences_known_pair():
    found = common_subsequences([tuple("bcaa"), tuple("abc")])
    assert found == {(), ("a",), ("b",), ("c",), ("b", "c")}


def test_common_subsequences_with_empty_member():
    assert common_subsequences([tuple("abc"), ()]) == {()}


def test_common_subsequences_budget():
    with pytest.raises(BudgetExceeded):
        common_subsequences([tuple("abcdefgh")], budget=10)


@settings(max_examples=80, deadline=None)
@given(st.lists(seqs, min_size=1, max_size=4))
def test_common_subsequences_matches_power_set_filter(family):
    found = common_subsequences(family)
    shortest = min(family, key=len)
    expected = {
        u
        for u in all_subsequences(shortest)
        if all(brute_is_subsequence(u, s) for s in family)
    }
    assert found == expected


# ---------------------------------------------------------------------------
# core and its oracle
# ---------------------------------------------------------------------------


def test_core_of_single_sequence_is_itself():
    assert core([tuple("abca")]).members == (tuple("abca"),)


def test_core_rejects_empty_input():
    with pytest.raises(EmptySuccessSet):
        core([])


def test_core_of_chain_is_the_short_success(chain_mdp):
    successes = enumerate_successes(chain_mdp)
    mined = core(successes)
    assert mined.members == (((0, 1), (1, 1), (2, TERMINAL)),)


def test_core_members_can_have_unequal_lengths():
    mined = core([tuple("bcaa"), tuple("abc")])
    assert mined.members == (("b", "c"), ("a",))


def test_core_duplication_and_order_invariance():
    family = [tuple("abac"), tuple("caba"), tuple("baca")]
    base = core(family)
    assert core(family + family).members == base.members
    assert core(list(reversed(family))).members == base.members


def test_core_strip_terminal(chain_mdp):
    successes = enumerate_successes(chain_mdp)
    mined = core(successes, strip_terminal=True)
    assert mined.strip_terminal_applied
    assert mined.members == (((0, 1), (1, 1)),)


def test_core_strip_of_terminal_only_success_is_empty(chain_mdp):
    from trajcore import SuccessSet

    terminal_only = SuccessSet.from_iterable([Trajectory(steps=(), terminal_state=2)])
    mined = core(terminal_only, strip_terminal=True)
    assert mined.members == ()
    assert core(terminal_only).members == (((2, TERMINAL),),)


def test_core_maximality_against_common_subsequences():
    family = [tuple("abcabc"), tuple("cbacba"), tuple("abccba")]
    mined = core(family)
    commons = common_subsequences(family)
    for member in mined:
        assert member in commons
        for other in commons:
            if member != other:
                assert not is_subsequence(member, other) or not (
                    other in set(mined.members)
                )
        # nothing in the common set strictly extends a member
        assert not any(
            member != v and is_subsequence(member, v) for v in maximal_elements(commons)
        )


def test_core_contains_lcs_length_member_for_pairs():
    x, y = tuple("abcbdab"), tuple("bdcaba")
    length, _ = lcs_pair(x, y)
    mined = core([x, y])
    assert mined.max_length() == length


def test_brute_force_core_scale_guard():
    with pytest.raises(OracleScaleError):
        brute_force_core([tuple("abcdefghabcdef")])
    with pytest.raises(OracleScaleError):
        brute_force_core([tuple(f"ab{i}") for i in range(7)])


def test_brute_force_core_self_cases():
    assert brute_force_core([tuple("bcaa"), tuple("abc")]).members == (
        ("b", "c"),
        ("a",),
    )
    assert brute_force_core([tuple("abc")]).members == (tuple("abc"),)
    assert brute_force_core([tuple("abc")] * 4).members == (tuple("abc"),)


@settings(max_examples=150, deadline=None)
@given(st.lists(seqs, min_size=1, max_size=4))
def test_core_equals_brute_force_core(family):
    fast = core(family)
    slow = brute_force_core(family)
    assert fast.members == slow.members


def test_shared_symbol_appears_in_some_member():
    # every input contains 'z': some maximal member must contain it
    family = [tuple("azb"), tuple("bza"), tuple("zz")]
    mined = core(family)
    assert any("z" in member for member in mined)


# ---------------------------------------------------------------------------
# core_nonempty_witness
# ---------------------------------------------------------------------------


def test_witness_on_unique_goal(chain_mdp):
    successes = enumerate_successes(chain_mdp)
    assert core_nonempty_witness(successes) == (2, TERMINAL)


def test_witness_rejects_multiple_goals(chain_mdp):
    mixed = enumerate_successes(chain_mdp).trajectories + (
        Trajectory(steps=(), terminal_state=1),
    )
    from trajcore import SuccessSet

    with pytest.raises(ValueError):
        core_nonempty_witness(SuccessSet.from_iterable(mixed))


def test_witness_under_abstraction(chain_mdp):
    successes = enumerate_successes(chain_mdp)
    mapping = {(s, a): "step" for s in range(3) for a in range(2)}
    mapping[(2, TERMINAL)] = "goal!"
    phi = Abstraction(mapping=mapping, label="coarse")
    assert core_nonempty_witness(successes, phi) == "goal!"
