"""Core model: validation, enumeration, trajectories, relabeling, merging."""

from decimal import Decimal
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from efg2ludii import (
    EfgNode,
    NATURE,
    enumerate_states,
    enumerate_trajectories,
    game_from_nodes,
    normalize_initial_states,
    relabel_first_mover,
    swap_player_labels,
    validate_game,
)
from efg2ludii.generator import GeneratorConfig, generate_game

from conftest import brute_force_trajectories, dec, frac


# ---------------------------------------------------------------------------
# validate_game


def test_valid_two_state_chance_game(coin_game):
    report = validate_game(coin_game)
    assert report.ok
    assert report.violations == ()


def test_bad_distribution_sum_names_state():
    game = game_from_nodes(
        1,
        [
            EfgNode(0, NATURE, (1, 2), (frac(1, 2), frac(1, 3))),
            EfgNode(1, payoffs=(dec(0),)),
            EfgNode(2, payoffs=(dec(0),)),
        ],
    )
    report = validate_game(game)
    assert not report.ok
    assert any("state 0" in v and "5/6" in v for v in report.violations)


def test_two_parents_is_not_a_tree():
    game = game_from_nodes(
        1,
        [
            EfgNode(0, 1, (1, 2)),
            EfgNode(1, 1, (2,)),
            EfgNode(2, payoffs=(dec(0),)),
        ],
    )
    report = validate_game(game)
    assert any("not a tree" in v for v in report.violations)


def test_unreachable_state_detected():
    game = game_from_nodes(
        1,
        [
            EfgNode(0, payoffs=(dec(0),)),
            EfgNode(1, payoffs=(dec(0),)),
        ],
    )
    report = validate_game(game)
    assert any("unreachable" in v for v in report.violations)


def test_zero_probability_branch_rejected():
    game = game_from_nodes(
        1,
        [
            EfgNode(0, NATURE, (1, 2), (frac(0), frac(1))),
            EfgNode(1, payoffs=(dec(0),)),
            EfgNode(2, payoffs=(dec(0),)),
        ],
    )
    report = validate_game(game)
    assert any("positive" in v for v in report.violations)


def test_mixed_mover_infoset_only_warns():
    nodes = [
        EfgNode(0, 1, (1, 2)),
        EfgNode(1, 1, (3,)),
        EfgNode(2, 2, (4,)),
        EfgNode(3, payoffs=(dec(0), dec(0))),
        EfgNode(4, payoffs=(dec(0), dec(0))),
    ]
    game = game_from_nodes(2, nodes, {1: [(1, 2)]})
    report = validate_game(game)
    assert report.ok
    assert any("mixes movers" in w for w in report.warnings)


def test_payoff_arity_checked(three_player_game):
    assert validate_game(three_player_game).ok
    broken = game_from_nodes(
        2,
        [
            EfgNode(0, 1, (1,)),
            EfgNode(1, payoffs=(dec(0),)),  # one payoff for two players
        ],
    )
    assert any("payoff" in v for v in validate_game(broken).violations)


# ---------------------------------------------------------------------------
# enumerate_states


def test_single_state_enumeration(one_terminal_game):
    assert enumerate_states(one_terminal_game) == [0]


def test_breadth_first_order_follows_declaration():
    # Root's children declared (2, 1); 1 has child 3. Breadth-first order
    # visits both root children before the grandchild.
    nodes = [
        EfgNode(0, 1, (2, 1)),
        EfgNode(1, 1, (3,)),
        EfgNode(2, payoffs=(dec(0),)),
        EfgNode(3, payoffs=(dec(0),)),
    ]
    game = game_from_nodes(1, nodes)
    assert enumerate_states(game) == [0, 2, 1, 3]


def test_enumeration_is_permutation_and_deterministic(mixed_depth3_game):
    order = enumerate_states(mixed_depth3_game)
    assert sorted(order) == list(range(mixed_depth3_game.num_states))
    assert order == enumerate_states(mixed_depth3_game)


# ---------------------------------------------------------------------------
# enumerate_trajectories


def test_single_state_trajectory(one_terminal_game):
    trajectories = enumerate_trajectories(one_terminal_game)
    assert len(trajectories) == 1
    assert trajectories[0].states == (0,)
    assert trajectories[0].probability == 1
    assert trajectories[0].movers == ()


def test_coin_game_probabilities(coin_game):
    trajectories = enumerate_trajectories(coin_game)
    assert [(t.states, t.probability) for t in trajectories] == [
        ((0, 1), frac(1, 2)),
        ((0, 2), frac(1, 2)),
    ]


def test_depth3_game_against_brute_force(mixed_depth3_game):
    trajectories = enumerate_trajectories(mixed_depth3_game)
    assert len(trajectories) == 5
    # Frozen values computed with the recursive oracle.
    expected = [
        ((0, 1, 3, 5), frac(1, 8)),
        ((0, 1, 3, 6), frac(1, 8)),
        ((0, 2, 4, 7), frac(1, 4)),
        ((0, 2, 4, 8), frac(1, 8)),
        ((0, 2, 4, 9), frac(3, 8)),
    ]
    assert [(t.states, t.probability) for t in trajectories] == expected
    assert brute_force_trajectories(mixed_depth3_game) == [
        (states, prob) for states, prob in expected
    ]
    assert sum(t.probability for t in trajectories) == 1


def test_mover_sequences(mixed_depth3_game):
    trajectories = enumerate_trajectories(mixed_depth3_game)
    assert trajectories[0].movers == (NATURE, 1, NATURE)
    assert trajectories[2].movers == (NATURE, 2, NATURE)


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_trajectories_match_brute_force_oracle(seed):
    game = generate_game(seed, GeneratorConfig(max_nodes=40))
    got = [(t.states, t.probability) for t in enumerate_trajectories(game)]
    assert got == brute_force_trajectories(game)


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_uniform_policy_mass_sums_to_one(seed):
    # Chance probabilities weighted by uniform decision choices always form
    # a probability distribution over leaves.
    game = generate_game(seed, GeneratorConfig(max_nodes=40))
    total = Fraction(0)
    for trajectory in enumerate_trajectories(game):
        mass = trajectory.probability
        for state in trajectory.states[:-1]:
            node = game.nodes[state]
            if not node.is_chance:
                mass /= len(node.children)
        total += mass
    assert total == 1


# ---------------------------------------------------------------------------
# relabel_first_mover / swap_player_labels


def test_relabel_identity_when_player_one_first(three_player_game):
    relabeled = relabel_first_mover(three_player_game)
    assert relabeled is three_player_game


def test_relabel_identity_for_chance_root(coin_game):
    assert relabel_first_mover(coin_game) is coin_game


def test_relabel_swaps_movers_payoffs_partitions():
    nodes = [
        EfgNode(0, 3, (1, 2)),
        EfgNode(1, payoffs=(dec("0.5"), dec(2), dec(3))),
        EfgNode(2, payoffs=(dec(-1), dec(0), dec(7))),
    ]
    game = game_from_nodes(3, nodes)
    relabeled = relabel_first_mover(game)
    assert relabeled.nodes[0].mover == 1
    # payoff columns for players 1 and 3 swap: (a, b, c) -> (c, b, a)
    assert relabeled.nodes[1].payoffs == (dec(3), dec(2), dec("0.5"))
    assert relabeled.nodes[2].payoffs == (dec(7), dec(0), dec(-1))
    # idempotent once player 1 moves first
    assert relabel_first_mover(relabeled) is relabeled


def test_swap_is_an_involution():
    nodes = [
        EfgNode(0, 2, (1, 2)),
        EfgNode(1, 1, (3,)),
        EfgNode(2, payoffs=(dec(1), dec(2))),
        EfgNode(3, payoffs=(dec(3), dec(4))),
    ]
    game = game_from_nodes(2, nodes, {2: [(1, 2)]})
    twice = swap_player_labels(swap_player_labels(game, 1, 2), 1, 2)
    assert twice.structurally_equal(game)


# ---------------------------------------------------------------------------
# normalize_initial_states


def test_single_fragment_unchanged(hidden_coin_game):
    combined = normalize_initial_states([(hidden_coin_game, frac(1))])
    assert combined is hidden_coin_game


def test_two_fragments_get_chance_root(coin_game, one_terminal_game):
    one = game_from_nodes(1, [EfgNode(0, payoffs=(dec(5),))])
    combined = normalize_initial_states([(one, frac(1, 4)), (coin_game, frac(3, 4))])
    root = combined.nodes[0]
    assert root.is_chance
    assert root.chance_probs == (frac(1, 4), frac(3, 4))
    assert combined.num_states == 1 + 1 + 3
    assert validate_game(combined).ok


def test_three_fragments_trajectory_count_is_sum(coin_game, mixed_depth3_game, one_terminal_game):
    # Oracle: trajectory counts before combination, summed.
    pieces = [coin_game, one_terminal_game, mixed_depth3_game]
    # Player counts must match; lift the 1-player games to 2 players.
    def widen(game):
        if game.num_players == 2:
            return game
        nodes = [
            EfgNode(
                n.id,
                n.mover,
                n.children,
                n.chance_probs,
                None if n.payoffs is None else n.payoffs + (dec(0),),
            )
            for n in game.nodes
        ]
        return game_from_nodes(2, nodes)

    pieces = [widen(g) for g in pieces]
    expected = sum(len(enumerate_trajectories(g)) for g in pieces)
    combined = normalize_initial_states(
        [(g, frac(1, 3)) for g in pieces]
    )
    assert validate_game(combined).ok
    assert len(enumerate_trajectories(combined)) == expected
    assert sum(t.probability for t in enumerate_trajectories(combined)) \
        == sum(frac(1, 3) * t.probability for g in pieces for t in enumerate_trajectories(g))


def test_bad_probability_sum_rejected(coin_game):
    with pytest.raises(ValueError, match="sum"):
        normalize_initial_states([(coin_game, frac(1, 2)), (coin_game, frac(1, 3))])


# ---------------------------------------------------------------------------
# partitions


def test_partition_coherence(hidden_coin_game):
    game = hidden_coin_game
    for player in (1, 2):
        for state in range(game.num_states):
            assert state in game.information_set(player, state)
    assert game.information_set(1, 1) == (1, 2)
    assert game.information_set(1, 2) == (1, 2)
    assert game.information_set(2, 1) == (1,)


def test_structural_equality_sees_decimal_representation(coin_game):
    other = game_from_nodes(
        1,
        [
            EfgNode(0, NATURE, (1, 2), (frac(1, 2), frac(1, 2))),
            EfgNode(1, payoffs=(Decimal("1.0"),)),  # same value, new literal
            EfgNode(2, payoffs=(dec(-1),)),
        ],
    )
    assert not coin_game.structurally_equal(other)
