"""Finite extensive-form game trees with chance nodes and information sets.

A game is a finite tree of states. Each inner state has a mover: either a
regular player (1..k) or the nature player (0), which models stochastic
events by selecting a successor according to an exact rational
distribution. Terminal states carry one payoff per regular player, kept as
exact decimals so that payoff literals survive compilation byte-for-byte.
Every regular player has an information partition over all states: the
states inside one part are mutually indistinguishable to that player.

All values are immutable after construction, so every operation in this
module is safe to call concurrently.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Sequence

NATURE = 0  # pseudo-player id of the chance/nature mover

MAX_PLAYERS = 100
MAX_STATES = 1_000_000


@dataclass(frozen=True)
class EfgNode:
    """One tree node: a decision node, a chance node, or a terminal.

    Terminals are encoded as ``mover is None`` with no children and a payoff
    vector. Chance nodes have ``mover == NATURE`` and one probability per
    child; the probabilities are exact rationals that must be positive and
    sum to exactly 1.
    """

    id: int
    mover: int | None = None
    children: tuple[int, ...] = ()
    chance_probs: tuple[Fraction, ...] | None = None
    payoffs: tuple[Decimal, ...] | None = None

    @property
    def is_terminal(self) -> bool:
        return self.mover is None

    @property
    def is_chance(self) -> bool:
        return self.mover == NATURE


@dataclass(frozen=True)
class ExtensiveFormGame:
    """A validated-shape game tree over dense state ids 0..num_states-1.

    ``information_sets[p - 1]`` holds player p's partition as a tuple of
    parts, each part a sorted tuple of state ids; parts are ordered by their
    smallest member. The root state always has id 0.
    """

    num_players: int
    nodes: tuple[EfgNode, ...]
    information_sets: tuple[tuple[tuple[int, ...], ...], ...]

    @property
    def num_states(self) -> int:
        return len(self.nodes)

    def node(self, state: int) -> EfgNode:
        return self.nodes[state]

    @cached_property
    def _part_of(self) -> tuple[dict[int, int], ...]:
        tables = []
        for parts in self.information_sets:
            table: dict[int, int] = {}
            for idx, part in enumerate(parts):
                for state in part:
                    table[state] = idx
            tables.append(table)
        return tuple(tables)

    def information_set(self, player: int, state: int) -> tuple[int, ...]:
        """States player ``player`` cannot tell apart from ``state``."""
        parts = self.information_sets[player - 1]
        return parts[self._part_of[player - 1][state]]

    def infoset_index(self, player: int, state: int) -> int:
        """Stable index of the part containing ``state`` in player's partition."""
        return self._part_of[player - 1][state]

    def structurally_equal(self, other: "ExtensiveFormGame") -> bool:
        """Equality down to exact rationals and exact decimal representations.

        Decimal payoffs compare by representation (0.5 and 0.50 differ), so
        structural equality implies byte-identical serialization.
        """
        if self.num_players != other.num_players:
            return False
        if self.information_sets != other.information_sets:
            return False
        if len(self.nodes) != len(other.nodes):
            return False
        for a, b in zip(self.nodes, other.nodes):
            if (a.id, a.mover, a.children, a.chance_probs) != (
                b.id,
                b.mover,
                b.children,
                b.chance_probs,
            ):
                return False
            if (a.payoffs is None) != (b.payoffs is None):
                return False
            if a.payoffs is not None and b.payoffs is not None:
                if len(a.payoffs) != len(b.payoffs):
                    return False
                if any(x.as_tuple() != y.as_tuple() for x, y in zip(a.payoffs, b.payoffs)):
                    return False
        return True


@dataclass(frozen=True)
class Trajectory:
    """A root-to-leaf path with its exact chance probability.

    ``probability`` is the product of the chance-branch probabilities taken
    along the path (1 if the path crosses no chance node). ``movers`` lists
    the mover of each non-terminal state along the path.
    """

    states: tuple[int, ...]
    probability: Fraction
    movers: tuple[int, ...]


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of validate_game: violations are data, not exceptions."""

    violations: tuple[str, ...]
    warnings: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations


def complete_partitions(
    num_states: int,
    num_players: int,
    declared: Mapping[int, Sequence[Sequence[int]]] | None = None,
) -> tuple[tuple[tuple[int, ...], ...], ...]:
    """Build full per-player partitions from declared groups.

    States not mentioned in any declared group become singleton parts. The
    result is canonical: members sorted, parts ordered by smallest member.
    Raises ValueError if a state appears in two groups for the same player
    or a group references an out-of-range state.
    """
    declared = declared or {}
    partitions = []
    for player in range(1, num_players + 1):
        seen: dict[int, int] = {}
        parts: list[tuple[int, ...]] = []
        for group in declared.get(player, ()):
            members = tuple(sorted(set(group)))
            if len(members) != len(tuple(group)):
                raise ValueError(
                    f"player {player}: duplicate state in information set {tuple(group)}"
                )
            for state in members:
                if not 0 <= state < num_states:
                    raise ValueError(
                        f"player {player}: information set references unknown state {state}"
                    )
                if state in seen:
                    raise ValueError(
                        f"player {player}: state {state} appears in two information sets"
                    )
                seen[state] = len(parts)
            parts.append(members)
        for state in range(num_states):
            if state not in seen:
                parts.append((state,))
        parts.sort(key=lambda part: part[0])
        partitions.append(tuple(parts))
    return tuple(partitions)


def validate_game(game: ExtensiveFormGame) -> ValidationReport:
    """Check every structural invariant; report violations and warnings.

    Violations cover player count, dense ids, tree shape (single root 0,
    one parent per non-root, connectivity), terminal/inner consistency,
    exact chance distributions with positive entries summing to 1, payoff
    arity, and partition coherence. Information sets that mix movers or
    branching factors only warn.
    """
    violations: list[str] = []
    warnings: list[str] = []
    k = game.num_players
    n = game.num_states

    if k < 1:
        violations.append(f"player count must be at least 1, got {k}")
    if k > MAX_PLAYERS:
        violations.append(f"player count {k} exceeds cap {MAX_PLAYERS}")
    if n == 0:
        violations.append("game has no states")
        return ValidationReport(tuple(violations), tuple(warnings))
    if n > MAX_STATES:
        violations.append(f"state count {n} exceeds cap {MAX_STATES}")

    for index, node in enumerate(game.nodes):
        if node.id != index:
            violations.append(f"node at position {index} carries id {node.id}")

    parent: dict[int, int] = {}
    for node in game.nodes:
        if node.is_terminal:
            if node.children:
                violations.append(f"state {node.id}: terminal but has children")
            if node.payoffs is None:
                violations.append(f"state {node.id}: terminal without payoffs")
            elif len(node.payoffs) != k:
                violations.append(
                    f"state {node.id}: payoff vector has {len(node.payoffs)} entries, expected {k}"
                )
            if node.chance_probs is not None:
                violations.append(f"state {node.id}: terminal with chance distribution")
            continue
        if not 0 <= node.mover <= k:
            violations.append(f"state {node.id}: mover {node.mover} out of range 0..{k}")
        if not node.children:
            violations.append(f"state {node.id}: inner node without children")
        if node.payoffs is not None:
            violations.append(f"state {node.id}: non-terminal with payoffs")
        if node.is_chance:
            probs = node.chance_probs
            if probs is None or len(probs) != len(node.children):
                violations.append(
                    f"state {node.id}: chance node needs one probability per child"
                )
            else:
                if any(p <= 0 for p in probs):
                    violations.append(
                        f"state {node.id}: chance probabilities must be positive"
                    )
                total = sum(probs, Fraction(0))
                if total != 1:
                    violations.append(
                        f"state {node.id}: distribution sums to {total} != 1"
                    )
        elif node.chance_probs is not None:
            violations.append(
                f"state {node.id}: chance distribution on a non-chance node"
            )
        for child in node.children:
            if not 0 <= child < n:
                violations.append(f"state {node.id}: child {child} does not exist")
                continue
            if child == 0:
                violations.append("state 0 must be the root, but it is listed as a child")
                continue
            if child in parent:
                violations.append(
                    f"not a tree: state {child} is a child of both "
                    f"{parent[child]} and {node.id}"
                )
            else:
                parent[child] = node.id

    for state in range(1, n):
        if state not in parent:
            violations.append(f"state {state} is unreachable from the root")

    if len(game.information_sets) != k:
        violations.append(
            f"expected {k} information partitions, got {len(game.information_sets)}"
        )
    else:
        for player, parts in enumerate(game.information_sets, start=1):
            seen: dict[int, int] = {}
            for part in parts:
                for state in part:
                    if not 0 <= state < n:
                        violations.append(
                            f"player {player}: information set references unknown state {state}"
                        )
                    elif state in seen:
                        violations.append(
                            f"player {player}: state {state} appears in two information sets"
                        )
                    else:
                        seen[state] = 1
            missing = [s for s in range(n) if s not in seen]
            if missing:
                violations.append(
                    f"player {player}: states {missing} belong to no information set"
                )
            for part in parts:
                if len(part) < 2:
                    continue
                in_range = [s for s in part if 0 <= s < n]
                movers = {game.nodes[s].mover for s in in_range}
                if len(movers) > 1:
                    warnings.append(
                        f"player {player}: information set {part} mixes movers {sorted(movers, key=str)}"
                    )
                branchings = {len(game.nodes[s].children) for s in in_range}
                if len(branchings) > 1:
                    warnings.append(
                        f"player {player}: information set {part} mixes branching factors"
                    )

    return ValidationReport(tuple(violations), tuple(warnings))


def enumerate_states(game: ExtensiveFormGame) -> list[int]:
    """Breadth-first state order from the root, children in declared order.

    Position 0 is the root; the result is a permutation of all state ids.
    """
    order: list[int] = []
    queue: deque[int] = deque([0])
    while queue:
        state = queue.popleft()
        order.append(state)
        queue.extend(game.nodes[state].children)
    return order


def enumerate_trajectories(game: ExtensiveFormGame) -> list[Trajectory]:
    """All root-to-leaf paths with exact chance probabilities.

    One trajectory per leaf, in left-to-right leaf order. Decision branches
    contribute no probability factor; chance branches multiply in their
    exact rational probability.
    """
    out: list[Trajectory] = []
    stack: list[tuple[int, tuple[int, ...], Fraction, tuple[int, ...]]] = [
        (0, (0,), Fraction(1), ())
    ]
    while stack:
        state, path, prob, movers = stack.pop()
        node = game.nodes[state]
        if node.is_terminal:
            out.append(Trajectory(path, prob, movers))
            continue
        branches = []
        for index, child in enumerate(node.children):
            factor = node.chance_probs[index] if node.is_chance else Fraction(1)
            branches.append(
                (child, path + (child,), prob * factor, movers + (node.mover,))
            )
        stack.extend(reversed(branches))
    return out


def swap_player_labels(game: ExtensiveFormGame, a: int, b: int) -> ExtensiveFormGame:
    """Exchange the labels of regular players ``a`` and ``b`` everywhere.

    Movers, payoff vector positions and information partitions are swapped;
    applying the same swap twice restores the original game.
    """
    if not (1 <= a <= game.num_players and 1 <= b <= game.num_players):
        raise ValueError(f"players to swap must be in 1..{game.num_players}")
    if a == b:
        return game

    def swap_mover(mover: int | None) -> int | None:
        if mover == a:
            return b
        if mover == b:
            return a
        return mover

    nodes = []
    for node in game.nodes:
        payoffs = node.payoffs
        if payoffs is not None:
            values = list(payoffs)
            values[a - 1], values[b - 1] = values[b - 1], values[a - 1]
            payoffs = tuple(values)
        nodes.append(
            EfgNode(
                id=node.id,
                mover=swap_mover(node.mover),
                children=node.children,
                chance_probs=node.chance_probs,
                payoffs=payoffs,
            )
        )
    partitions = list(game.information_sets)
    partitions[a - 1], partitions[b - 1] = partitions[b - 1], partitions[a - 1]
    return ExtensiveFormGame(game.num_players, tuple(nodes), tuple(partitions))


def relabel_first_mover(game: ExtensiveFormGame) -> ExtensiveFormGame:
    """Make player 1 the first to move by swapping labels if needed.

    If the root is a chance node, a terminal, or already moved by player 1,
    the game is returned unchanged. Otherwise the root's mover p and player
    1 trade labels everywhere. The operation is idempotent.
    """
    root = game.nodes[0]
    if root.is_terminal or root.mover in (NATURE, 1):
        return game
    return swap_player_labels(game, 1, root.mover)


def normalize_initial_states(
    fragments: Sequence[tuple[ExtensiveFormGame, Fraction]],
) -> ExtensiveFormGame:
    """Combine alternative initial positions under a single chance root.

    Each fragment is a complete game; the fragment probabilities must sum to
    exactly 1. A single fragment (necessarily probability 1) is returned
    unchanged. Otherwise a fresh chance root with the given distribution is
    created and fragment states are re-indexed into consecutive blocks.
    """
    if not fragments:
        raise ValueError("at least one initial-state fragment is required")
    total = sum((prob for _, prob in fragments), Fraction(0))
    if total != 1:
        raise ValueError(f"fragment probabilities sum to {total} != 1")
    if any(prob <= 0 for _, prob in fragments):
        raise ValueError("fragment probabilities must be positive")
    if len(fragments) == 1:
        return fragments[0][0]

    k = fragments[0][0].num_players
    if any(g.num_players != k for g, _ in fragments):
        raise ValueError("all fragments must have the same player count")

    offsets = []
    offset = 1  # state 0 is the fresh chance root
    for g, _ in fragments:
        offsets.append(offset)
        offset += g.num_states

    nodes: list[EfgNode] = [
        EfgNode(
            id=0,
            mover=NATURE,
            children=tuple(offsets),
            chance_probs=tuple(prob for _, prob in fragments),
        )
    ]
    declared: dict[int, list[tuple[int, ...]]] = {p: [] for p in range(1, k + 1)}
    for (g, _), base in zip(fragments, offsets):
        for node in g.nodes:
            nodes.append(
                EfgNode(
                    id=node.id + base,
                    mover=node.mover,
                    children=tuple(c + base for c in node.children),
                    chance_probs=node.chance_probs,
                    payoffs=node.payoffs,
                )
            )
        for player in range(1, k + 1):
            for part in g.information_sets[player - 1]:
                if len(part) > 1:
                    declared[player].append(tuple(s + base for s in part))
    partitions = complete_partitions(offset, k, declared)
    return ExtensiveFormGame(k, tuple(nodes), partitions)


def game_from_nodes(
    num_players: int,
    nodes: Iterable[EfgNode],
    declared_infosets: Mapping[int, Sequence[Sequence[int]]] | None = None,
) -> ExtensiveFormGame:
    """Assemble a game from nodes plus optional non-singleton infoset groups."""
    node_tuple = tuple(sorted(nodes, key=lambda node: node.id))
    partitions = complete_partitions(len(node_tuple), num_players, declared_infosets)
    return ExtensiveFormGame(num_players, node_tuple, partitions)
