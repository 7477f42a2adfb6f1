"""Seeded random game generation for tests and the command line.

All randomness flows from one SplitMix64 seed, so the same parameters
always produce the identical game. Generation policy (a testing choice,
nothing more): states are created breadth-first, so ids grow with depth;
an inner node becomes a chance node with the configured rate; leaf payoffs
mix integers and simple decimal fractions to exercise exact payoff
handling; information sets are merged only among same-depth states that
share a mover, which keeps the hidden-information structure plausible and
keeps the root's information sets singleton.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction

from .game import NATURE, EfgNode, ExtensiveFormGame, complete_partitions
from .rng import SplitMix64

_PAYOFF_FRACTIONS = ("0", "25", "5", "75")


@dataclass(frozen=True)
class GeneratorConfig:
    max_nodes: int = 400
    max_branching: int = 4
    chance_rate: float = 0.3
    merge_rate: float = 0.25
    max_depth: int = 8
    players: int | None = None  # None: drawn uniformly from 1..4


def _payoff(rng: SplitMix64) -> Decimal:
    units = rng.below(41) - 20
    if rng.chance(1, 3):
        fraction = _PAYOFF_FRACTIONS[rng.below(len(_PAYOFF_FRACTIONS))]
        if fraction != "0":
            sign = "-" if units < 0 else ""
            return Decimal(f"{sign}{abs(units)}.{fraction}")
    return Decimal(units)


def _rate_to_per_thousand(rate: float) -> int:
    return max(0, min(1000, round(rate * 1000)))


def generate_game(seed: int, config: GeneratorConfig = GeneratorConfig()) -> ExtensiveFormGame:
    """Build a random valid game, deterministically from ``seed``."""
    if config.max_nodes < 1:
        raise ValueError("max_nodes must be at least 1")
    if config.max_branching < 1:
        raise ValueError("max_branching must be at least 1")
    rng = SplitMix64(seed)
    players = config.players or (1 + rng.below(4))
    chance_rate = _rate_to_per_thousand(config.chance_rate)
    merge_rate = _rate_to_per_thousand(config.merge_rate)

    nodes: dict[int, EfgNode] = {}
    depths: dict[int, int] = {0: 0}
    queue: list[int] = [0]
    created = 1
    index = 0
    while index < len(queue):
        state = queue[index]
        index += 1
        depth = depths[state]
        budget = config.max_nodes - created
        # Leaf probability climbs with depth so trees stay shallow and wide.
        must_leaf = depth >= config.max_depth or budget == 0
        wants_leaf = state != 0 and rng.chance(150 + 100 * depth, 1000)
        if must_leaf or wants_leaf:
            payoffs = tuple(_payoff(rng) for _ in range(players))
            nodes[state] = EfgNode(state, payoffs=payoffs)
            continue
        branching = min(budget, 1 + rng.below(config.max_branching))
        if branching >= 2 and rng.chance(3, 4):
            pass  # keep the drawn branching
        elif branching >= 2:
            branching = max(2, branching - 1)
        children = tuple(range(created, created + branching))
        created += branching
        for child in children:
            depths[child] = depth + 1
            queue.append(child)
        if rng.chance(chance_rate, 1000):
            weights = [1 + rng.below(6) for _ in children]
            total = sum(weights)
            probs = tuple(Fraction(w, total) for w in weights)
            nodes[state] = EfgNode(state, NATURE, children, probs)
        else:
            mover = 1 + rng.below(players)
            nodes[state] = EfgNode(state, mover, children)

    # Infoset merging: same-depth inner states with the same mover may be
    # chained into shared sets, independently per observing player.
    grouped: dict[tuple[int, int], list[int]] = {}
    for state, node in nodes.items():
        if not node.is_terminal:
            grouped.setdefault((depths[state], node.mover), []).append(state)
    declared: dict[int, list[tuple[int, ...]]] = {p: [] for p in range(1, players + 1)}
    for player in range(1, players + 1):
        for (_, _), members in sorted(grouped.items()):
            if len(members) < 2:
                continue
            pool = sorted(members)
            rng.shuffle(pool)
            cluster = [pool[0]]
            for state in pool[1:]:
                if rng.chance(merge_rate, 1000):
                    cluster.append(state)
                else:
                    if len(cluster) > 1:
                        declared[player].append(tuple(sorted(cluster)))
                    cluster = [state]
            if len(cluster) > 1:
                declared[player].append(tuple(sorted(cluster)))

    node_tuple = tuple(nodes[i] for i in range(created))
    partitions = complete_partitions(created, players, declared)
    return ExtensiveFormGame(players, node_tuple, partitions)
