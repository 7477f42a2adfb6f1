"""Shared fixtures: small hand-built games and independent oracles."""

from __future__ import annotations

from decimal import Decimal
from fractions import Fraction

import pytest

from efg2ludii import EfgNode, NATURE, game_from_nodes


def dec(value) -> Decimal:
    return Decimal(str(value))


def frac(num, den=1) -> Fraction:
    return Fraction(num, den)


def brute_force_trajectories(game):
    """Independent recursive oracle: (leaf path, chance probability) pairs.

    Intentionally a different implementation shape from the library (plain
    recursion instead of an explicit stack) so the two can cross-check.
    """
    out = []

    def walk(state, path, prob):
        node = game.nodes[state]
        if node.is_terminal:
            out.append((tuple(path), prob))
            return
        for index, child in enumerate(node.children):
            factor = node.chance_probs[index] if node.is_chance else Fraction(1)
            walk(child, path + [child], prob * factor)

    walk(0, [0], Fraction(1))
    return out


@pytest.fixture
def one_terminal_game():
    """The smallest legal game: a single terminal root, one player."""
    return game_from_nodes(1, [EfgNode(0, payoffs=(dec(0),))])


@pytest.fixture
def coin_game():
    """Chance root 1/2-1/2 over two terminals, one player."""
    return game_from_nodes(
        1,
        [
            EfgNode(0, NATURE, (1, 2), (frac(1, 2), frac(1, 2))),
            EfgNode(1, payoffs=(dec(1),)),
            EfgNode(2, payoffs=(dec(-1),)),
        ],
    )


@pytest.fixture
def third_game():
    """Chance root 1/3-2/3 over two terminals; the statistical fixture."""
    return game_from_nodes(
        1,
        [
            EfgNode(0, NATURE, (1, 2), (frac(1, 3), frac(2, 3))),
            EfgNode(1, payoffs=(dec(1),)),
            EfgNode(2, payoffs=(dec(0),)),
        ],
    )


@pytest.fixture
def twin_leaf_game():
    """Chance root over two terminals with identical payoffs."""
    return game_from_nodes(
        1,
        [
            EfgNode(0, NATURE, (1, 2), (frac(1, 2), frac(1, 2))),
            EfgNode(1, payoffs=(dec(3),)),
            EfgNode(2, payoffs=(dec(3),)),
        ],
    )


@pytest.fixture
def hidden_coin_game():
    """Hidden coin flip: player 1 acts without seeing the chance outcome.

    Chance root 1/2-1/2 into two decision states for player 1 that share
    one information set; player 2 tells them apart. Two players.
    """
    nodes = [
        EfgNode(0, NATURE, (1, 2), (frac(1, 2), frac(1, 2))),
        EfgNode(1, 1, (3, 4)),
        EfgNode(2, 1, (5, 6)),
        EfgNode(3, payoffs=(dec(1), dec(-1))),
        EfgNode(4, payoffs=(dec(-1), dec(1))),
        EfgNode(5, payoffs=(dec("0.5"), dec("-0.5"))),
        EfgNode(6, payoffs=(dec(0), dec(0))),
    ]
    return game_from_nodes(2, nodes, {1: [(1, 2)]})


@pytest.fixture
def mixed_depth3_game():
    """Depth-3 game mixing chance and (single-option) decision nodes.

    Five leaves whose chance probabilities sum to exactly 1:
    1/8, 1/8 on the left and 1/4, 1/8, 3/8 on the right.
    """
    nodes = [
        EfgNode(0, NATURE, (1, 2), (frac(1, 4), frac(3, 4))),
        EfgNode(1, 1, (3,)),
        EfgNode(2, 2, (4,)),
        EfgNode(3, NATURE, (5, 6), (frac(1, 2), frac(1, 2))),
        EfgNode(4, NATURE, (7, 8, 9), (frac(1, 3), frac(1, 6), frac(1, 2))),
        EfgNode(5, payoffs=(dec(1), dec(0))),
        EfgNode(6, payoffs=(dec(2), dec(0))),
        EfgNode(7, payoffs=(dec(3), dec(1))),
        EfgNode(8, payoffs=(dec(4), dec(1))),
        EfgNode(9, payoffs=(dec("5.5"), dec(1))),
    ]
    return game_from_nodes(2, nodes)


@pytest.fixture
def three_player_game():
    """Three players moving in sequence; exercises mover bookkeeping."""
    nodes = [
        EfgNode(0, 1, (1, 2)),
        EfgNode(1, 2, (3, 4)),
        EfgNode(2, 3, (5, 6)),
        EfgNode(3, payoffs=(dec(1), dec(2), dec(3))),
        EfgNode(4, payoffs=(dec(0), dec(0), dec(0))),
        EfgNode(5, payoffs=(dec(-1), dec("0.5"), dec(1))),
        EfgNode(6, payoffs=(dec(2), dec(-2), dec(0))),
    ]
    return game_from_nodes(3, nodes, {1: [(1, 2)]})
