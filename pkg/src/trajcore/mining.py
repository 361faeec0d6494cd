"""Subsequence order, abstractions, and maximal common-subsequence mining.

Symbols are plain hashable values: concrete ``(state, action)`` pairs
(including terminal pseudo-pairs) or abstract names (strings).  A sequence is
a tuple of symbols.  Mixing the two alphabets inside one computation is never
meaningful and is not supported.

The fast path enumerates the exact set of common subsequences with a
k-pointer automaton over leftmost-occurrence jumps (each distinct common
subsequence is generated exactly once), then keeps the maximal elements.
:func:`brute_force_core` is a deliberately independent oracle built on raw
power-set enumeration and is used to cross-check the fast path.
"""
from __future__ import annotations

from bisect import bisect_left
from collections import defaultdict
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Iterator, Mapping, Sequence, Union

from .errors import (
    BudgetExceeded,
    EmptySuccessSet,
    OracleScaleError,
    UnmappedSymbol,
)
from .mdp import TERMINAL, SuccessSet, Trajectory

Symbol = Union[tuple[int, int], str]
SymbolSeq = tuple[Symbol, ...]

DEFAULT_SEQ_BUDGET = 1_000_000

TERMINAL_NAME = "terminal"


@dataclass(frozen=True)
class Abstraction:
    """Map from concrete (state, action) pairs to an abstract alphabet.

    ``mapping=None`` is the identity abstraction.  With ``collapse_runs``,
    maximal runs of equal abstract symbols are collapsed to a single symbol
    after mapping.
    """

    mapping: Mapping[tuple[int, int], str] | None = None
    collapse_runs: bool = False
    label: str = ""

    def __post_init__(self):
        if self.mapping is not None:
            object.__setattr__(
                self,
                "mapping",
                {(int(s), int(a)): str(v) for (s, a), v in self.mapping.items()},
            )
        if not self.label:
            object.__setattr__(
                self, "label", "identity" if self.mapping is None else "abstract"
            )

    @property
    def is_identity(self) -> bool:
        return self.mapping is None

    def image(self, pair: tuple[int, int]) -> Symbol:
        if self.mapping is None:
            return (int(pair[0]), int(pair[1]))
        try:
            return self.mapping[(int(pair[0]), int(pair[1]))]
        except KeyError:
            raise UnmappedSymbol(tuple(pair)) from None

    def terminal_symbols(self) -> frozenset[Symbol]:
        """Symbols that stand for goal-terminal pairs under this abstraction."""
        cached = self.__dict__.get("_terminal_symbols")
        if cached is None:
            if self.mapping is None:
                cached = frozenset()
            else:
                cached = frozenset(
                    v for (s, a), v in self.mapping.items() if a == TERMINAL
                )
            self.__dict__["_terminal_symbols"] = cached
        return cached

    def is_terminal_symbol(self, sym: Symbol) -> bool:
        if isinstance(sym, tuple):
            return sym[1] == TERMINAL
        return sym in self.terminal_symbols() or sym == TERMINAL_NAME


IDENTITY = Abstraction()


@dataclass(frozen=True)
class CoreSet:
    """Maximal common subsequences of a family of sequences.

    Members are nonempty, canonically ordered (length-descending, then
    lexicographic).  An empty ``members`` tuple means the inputs share no
    nonempty common structure.
    """

    members: tuple[SymbolSeq, ...]
    alphabet_tag: str = "identity"
    strip_terminal_applied: bool = False

    def __iter__(self) -> Iterator[SymbolSeq]:
        return iter(self.members)

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, seq) -> bool:
        return tuple(seq) in set(self.members)

    def max_length(self) -> int:
        return max((len(m) for m in self.members), default=0)


def canonical_member_order(members: Iterable[SymbolSeq]) -> tuple[SymbolSeq, ...]:
    return tuple(sorted(set(members), key=lambda m: (-len(m), m)))


def is_subsequence(u: Sequence, v: Sequence) -> bool:
    """True iff ``u`` embeds order-preservingly (not necessarily contiguously) in ``v``."""
    i = 0
    n = len(u)
    if n == 0:
        return True
    for sym in v:
        if sym == u[i]:
            i += 1
            if i == n:
                return True
    return False


def apply_abstraction(traj: Trajectory | Sequence, phi: Abstraction = IDENTITY) -> SymbolSeq:
    """Elementwise image of a trajectory (or raw pair sequence) under ``phi``."""
    if isinstance(traj, Trajectory):
        pairs = traj.pairs()
    else:
        pairs = tuple(traj)
    if phi.is_identity:
        out = tuple(
            (int(p[0]), int(p[1])) if isinstance(p, (tuple, list)) else p for p in pairs
        )
    else:
        out = tuple(phi.image(p) for p in pairs)
    if phi.collapse_runs:
        collapsed = []
        for sym in out:
            if not collapsed or collapsed[-1] != sym:
                collapsed.append(sym)
        out = tuple(collapsed)
    return out


def lcs_pair(x: Sequence, y: Sequence) -> tuple[int, SymbolSeq]:
    """Length of a longest common subsequence of two sequences, plus a witness.

    The witness is the lexicographically least among all longest common
    subsequences (canonical backtrack order).  O(|x|*|y|) table plus an
    O(L*|x|*|y|) reconstruction.
    """
    x, y = tuple(x), tuple(y)
    n, m = len(x), len(y)
    table = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n - 1, -1, -1):
        row, below = table[i], table[i + 1]
        for j in range(m - 1, -1, -1):
            if x[i] == y[j]:
                row[j] = below[j + 1] + 1
            else:
                row[j] = below[j] if below[j] >= row[j + 1] else row[j + 1]
    length = table[0][0]
    out: list = []
    i = j = 0
    remaining = length
    while remaining:
        best = None  # (symbol, i2, j2): min symbol, then earliest positions
        for i2 in range(i, n):
            c = x[i2]
            for j2 in range(j, m):
                if y[j2] == c and table[i2 + 1][j2 + 1] >= remaining - 1:
                    cand = (c, i2, j2)
                    if best is None or cand < best:
                        best = cand
                    break
        c, i2, j2 = best
        out.append(c)
        i, j = i2 + 1, j2 + 1
        remaining -= 1
    return length, tuple(out)


def common_subsequences(
    seqs: Sequence[Sequence], budget: int = DEFAULT_SEQ_BUDGET
) -> set[SymbolSeq]:
    """Exact deduplicated set of common subsequences of all ``seqs``.

    Always contains the empty sequence.  Implemented as a lazy product-position
    search: a DFS over per-sequence read pointers where matching a symbol
    jumps every pointer to just past its leftmost occurrence.  Leftmost
    embeddings are unique, so each common subsequence is emitted exactly once.
    Raises :class:`BudgetExceeded` once the result set would exceed ``budget``.
    """
    if not seqs:
        raise ValueError("need at least one sequence")
    seqs = [tuple(s) for s in seqs]
    occurrences: list[dict] = []
    for seq in seqs:
        occ: dict = defaultdict(list)
        for pos, sym in enumerate(seq):
            occ[sym].append(pos)
        occurrences.append(occ)
    alphabet = set(occurrences[0])
    for occ in occurrences[1:]:
        alphabet &= set(occ)
    alphabet = sorted(alphabet, key=lambda s: (isinstance(s, str), s))

    results: set[SymbolSeq] = set()
    stack: list[tuple[tuple[int, ...], SymbolSeq]] = [((0,) * len(seqs), ())]
    while stack:
        pointers, prefix = stack.pop()
        results.add(prefix)
        if len(results) > budget:
            raise BudgetExceeded(budget)
        for sym in alphabet:
            advanced = []
            for occ, ptr in zip(occurrences, pointers):
                positions = occ[sym]
                k = bisect_left(positions, ptr)
                if k == len(positions):
                    break
                advanced.append(positions[k] + 1)
            else:
                stack.append((tuple(advanced), prefix + (sym,)))
    return results


def maximal_elements(commons: Iterable[SymbolSeq]) -> set[SymbolSeq]:
    """Maximal members of a subsequence-closed set.

    For a downward-closed set, a member is maximal iff it is not a
    single-symbol deletion of a member one symbol longer, which avoids
    quadratic embedding checks.
    """
    by_len: dict[int, set[SymbolSeq]] = defaultdict(set)
    for seq in commons:
        by_len[len(seq)].add(seq)
    maximal: set[SymbolSeq] = set()
    for length, bucket in by_len.items():
        longer = by_len.get(length + 1, ())
        deletions: set[SymbolSeq] = set()
        for seq in longer:
            for i in range(len(seq)):
                deletions.add(seq[:i] + seq[i + 1 :])
        maximal |= bucket - deletions
    return maximal


def _prepare_sequences(
    successes: SuccessSet | Iterable, phi: Abstraction, strip_terminal: bool
) -> list[SymbolSeq]:
    if isinstance(successes, SuccessSet):
        items: Iterable = successes.trajectories
    else:
        items = list(successes)
    seqs = {apply_abstraction(item, phi) for item in items}
    if not seqs:
        raise EmptySuccessSet("core is undefined over zero successes")
    if strip_terminal:
        seqs = {
            tuple(sym for sym in seq if not phi.is_terminal_symbol(sym)) for seq in seqs
        }
    # the core is a set-level function: duplicates cannot change it
    return sorted(seqs)


def core(
    successes: SuccessSet | Iterable,
    phi: Abstraction = IDENTITY,
    strip_terminal: bool = False,
    budget: int = DEFAULT_SEQ_BUDGET,
) -> CoreSet:
    """Maximal subsequences shared by every (abstracted) successful trajectory.

    Accepts a :class:`SuccessSet` or any iterable of trajectories / raw symbol
    sequences.  With ``strip_terminal``, terminal symbols are removed before
    mining, matching the "ignore the trivial goal symbol" reading.
    """
    seqs = _prepare_sequences(successes, phi, strip_terminal)
    commons = common_subsequences(seqs, budget=budget)
    members = [m for m in maximal_elements(commons) if m]
    return CoreSet(
        members=canonical_member_order(members),
        alphabet_tag=phi.label,
        strip_terminal_applied=strip_terminal,
    )


def core_nonempty_witness(
    successes: SuccessSet, phi: Abstraction = IDENTITY
) -> Symbol:
    """Return a symbol embedded in every success of a unique-goal instance.

    The terminal encoding guarantees the goal pseudo-pair (or its abstract
    image) is shared by all successes; a failed embedding check here signals
    a bug, not bad input.
    """
    if not len(successes):
        raise EmptySuccessSet("no successes to witness")
    goal_states = {t.terminal_state for t in successes}
    if len(goal_states) != 1:
        raise ValueError(
            f"witness requires a unique goal; successes end in {sorted(goal_states)}"
        )
    goal = goal_states.pop()
    witness = phi.image((goal, TERMINAL)) if not phi.is_identity else (goal, TERMINAL)
    for traj in successes:
        image = apply_abstraction(traj, phi)
        assert is_subsequence((witness,), image), (
            f"terminal witness {witness!r} missing from {image!r}"
        )
    return witness


def _embeds(u: Sequence, v: Sequence) -> bool:
    # Oracle-local embedding test, kept separate from is_subsequence.
    it = iter(v)
    return all(any(c == w for w in it) for c in u)


def _all_subsequences(seq: SymbolSeq) -> set[SymbolSeq]:
    out: set[SymbolSeq] = set()
    idx = range(len(seq))
    for r in range(len(seq) + 1):
        for picks in combinations(idx, r):
            out.add(tuple(seq[i] for i in picks))
    return out


def brute_force_core(
    successes: SuccessSet | Iterable,
    phi: Abstraction = IDENTITY,
    strip_terminal: bool = False,
) -> CoreSet:
    """Independent oracle for :func:`core` via power-set enumeration.

    Enumerates all 2^n subsequences of the shortest abstracted sequence,
    keeps those embedding in every other sequence, then keeps the maximal
    ones by pairwise checks.  Only valid at small scale.
    """
    seqs = _prepare_sequences(successes, phi, strip_terminal)
    if len(seqs) > 6:
        raise OracleScaleError(f"oracle supports at most 6 sequences, got {len(seqs)}")
    longest = max(len(s) for s in seqs)
    if longest > 12:
        raise OracleScaleError(f"oracle supports length <= 12, got {longest}")
    shortest = min(seqs, key=len)
    others = [s for s in seqs if s is not shortest]
    commons = {
        u for u in _all_subsequences(shortest) if all(_embeds(u, s) for s in others)
    }
    maximal = {
        u
        for u in commons
        if u and not any(u != v and _embeds(u, v) for v in commons)
    }
    return CoreSet(
        members=canonical_member_order(maximal),
        alphabet_tag=phi.label,
        strip_terminal_applied=strip_terminal,
    )
