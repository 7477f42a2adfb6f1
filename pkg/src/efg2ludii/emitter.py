"""Compile an extensive-form game into the marker-tracking description subset.

The compiled game is played on a graph board holding k+1 disconnected
copies of the game tree, one per player plus one for nature. The vertex
for state i in copy p has index ``p * num_states + i``. A neutral marker
walks down the nature copy and records the true state; each player p keeps
markers on exactly the copy-p vertices of their current information set,
so what a player can see never exceeds what they are entitled to know.

Sections are emitted in a fixed order and every list is deterministically
ordered, so compiling equal games yields byte-identical text:

* equipment: the marker piece types, the board graph, one
  ``InformationSet_i_p`` region per (state, player), and one ``Subgraph_p``
  region per copy.
* start rules: place each marker on its copy's root vertex, then hide the
  nature copy from everyone and each player's copy from every other player.
* play rules: a chain of ``(if (= (where "Marker" Neutral) i) ...)``
  clauses over inner states in ascending id order. Decision states offer
  one Select move per child inside ``(or { ... })``; chance states wrap the
  same moves in ``(random { weights } { ... })`` with exact integer weights.
* end rules: one clause per terminal state returning its payoff vector.

Every move carries the same effect list shape: relocate the neutral
marker, rebuild each player's information-set markers, re-hide everything
that the rebuild made visible, and set the next mover.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import gcd, lcm
from typing import Sequence

from .game import (
    MAX_PLAYERS,
    MAX_STATES,
    NATURE,
    ExtensiveFormGame,
    validate_game,
)
from .ludemes import Array, LudemeTerm, Symbol, array, render, term


class CompileError(Exception):
    """The input game cannot be compiled as given."""


@dataclass(frozen=True)
class LudiiDescription:
    """A compiled game description: the term tree plus its canonical text."""

    root: LudemeTerm

    @cached_property
    def text(self) -> str:
        return render(self.root) + "\n"


def vertex_index(player: int, state: int, num_states: int) -> int:
    """Board vertex of ``state`` inside ``player``'s tree copy."""
    if num_states <= 0:
        raise ValueError("num_states must be positive")
    if player < 0:
        raise ValueError(f"player {player} out of range")
    if not 0 <= state < num_states:
        raise ValueError(f"state {state} out of range 0..{num_states - 1}")
    return player * num_states + state


def probabilities_to_weights(probs: Sequence[Fraction]) -> list[int]:
    """Convert an exact distribution into minimal positive integer weights.

    ``weights[i] / sum(weights)`` equals ``probs[i]`` exactly; the weights
    share no common factor.
    """
    if not probs:
        raise ValueError("empty probability list")
    if any(p <= 0 for p in probs):
        raise ValueError("probabilities must be positive")
    scale = lcm(*(p.denominator for p in probs))
    weights = [int(p * scale) for p in probs]
    common = gcd(*weights)
    return [w // common for w in weights]


def information_set_region(state: int, player: int) -> str:
    return f"InformationSet_{state}_{player}"


def subgraph_region(player: int) -> str:
    return f"Subgraph_{player}"


def marker_name(player: int) -> str:
    return f"Marker{player}"


def _hidden_statements(num_players: int) -> list[LudemeTerm]:
    """The mask block: nature's copy hidden from all, copy p from every q != p."""
    statements = [
        term("set", Symbol("Hidden"), term("sites", subgraph_region(0)), to=Symbol("All"))
    ]
    for player in range(1, num_players + 1):
        for observer in range(1, num_players + 1):
            if observer == player:
                continue
            statements.append(
                term(
                    "set",
                    Symbol("Hidden"),
                    term("sites", subgraph_region(player)),
                    to=term("player", observer),
                )
            )
    return statements


def emit_equipment(game: ExtensiveFormGame) -> LudemeTerm:
    """Pieces, the (k+1)-copy board graph, and all regions."""
    k = game.num_players
    n = game.num_states
    items: list[LudemeTerm] = [
        term("piece", "Marker", Symbol("Neutral")),
        term("piece", "Marker", Symbol("Each")),
    ]
    vertices = Array(tuple(range((k + 1) * n)))
    edges = []
    for player in range(k + 1):
        base = player * n
        for node in game.nodes:
            for child in node.children:
                edges.append(array(base + node.id, base + child))
    items.append(
        LudemeTerm(
            "board",
            (LudemeTerm("graph", (), (("vertices", vertices), ("edges", Array(tuple(edges))))),),
        )
    )
    for state in range(n):
        for player in range(1, k + 1):
            members = tuple(
                vertex_index(player, other, n)
                for other in game.information_set(player, state)
            )
            items.append(
                term("regions", information_set_region(state, player), Array(members))
            )
    for player in range(k + 1):
        span = tuple(range(player * n, (player + 1) * n))
        items.append(term("regions", subgraph_region(player), Array(span)))
    return term("equipment", Array(tuple(items)))


def emit_start_rules(game: ExtensiveFormGame) -> LudemeTerm:
    """Place every marker on its copy's root vertex, then apply the masks."""
    k = game.num_players
    n = game.num_states
    statements: list[LudemeTerm] = [
        term("place", marker_name(player), vertex_index(player, 0, n))
        for player in range(k + 1)
    ]
    statements.extend(_hidden_statements(k))
    return term("start", Array(tuple(statements)))


def _next_mover(game: ExtensiveFormGame, state: int) -> int:
    """Mover to install after entering ``state``; 1 when nobody must act."""
    node = game.nodes[state]
    if node.is_terminal or node.is_chance:
        return 1
    return node.mover


def emit_move_rule(
    game: ExtensiveFormGame, parent: int, branch: int, child: int
) -> LudemeTerm:
    """The Select move for the ``branch``-th edge out of ``parent``.

    The selected vertex is just the branch number; the effect list moves
    the neutral marker along the edge, rebuilds every player's
    information-set markers for the new state, restores the masks, and sets
    the next mover.
    """
    node = game.nodes[parent]
    if branch >= len(node.children) or node.children[branch] != child:
        raise ValueError(f"no branch {branch} from state {parent} to state {child}")
    k = game.num_players
    n = game.num_states
    effects: list[LudemeTerm] = [
        term(
            "fromTo",
            term("from", vertex_index(NATURE, parent, n)),
            term("to", vertex_index(NATURE, child, n)),
        )
    ]
    for player in range(1, k + 1):
        effects.append(
            term("remove", LudemeTerm("sites", (Symbol("Occupied"),), (("by", Symbol(f"P{player}")),)))
        )
    for player in range(1, k + 1):
        effects.append(
            term(
                "add",
                term("piece", player),
                term("to", term("sites", information_set_region(child, player))),
            )
        )
    effects.extend(_hidden_statements(k))
    effects.append(
        term("set", Symbol("NextPlayer"), term("player", _next_mover(game, child)))
    )
    return term(
        "move",
        Symbol("Select"),
        term("from", branch),
        term("then", term("and", Array(tuple(effects)))),
    )


def _state_moves(game: ExtensiveFormGame, state: int) -> LudemeTerm:
    node = game.nodes[state]
    moves = tuple(
        emit_move_rule(game, state, branch, child)
        for branch, child in enumerate(node.children)
    )
    if node.is_chance:
        weights = probabilities_to_weights(node.chance_probs)
        return term("random", Array(tuple(weights)), Array(moves))
    return term("or", Array(moves))


def emit_play_rules(game: ExtensiveFormGame) -> LudemeTerm:
    """The state-dispatch chain over inner states, ascending by id.

    The final else branch offers no moves; it is syntactically required but
    unreachable because the neutral marker always sits on some state vertex.
    """
    n = game.num_states
    chain: LudemeTerm = term("or", Array(()))
    inner = [node.id for node in game.nodes if not node.is_terminal]
    for state in reversed(inner):
        condition = term(
            "=",
            term("where", "Marker", Symbol("Neutral")),
            vertex_index(NATURE, state, n),
        )
        chain = term("if", condition, _state_moves(game, state), chain)
    return term("play", chain)


def emit_end_rules(game: ExtensiveFormGame) -> LudemeTerm:
    """One terminal-detection clause per leaf, ascending by state id."""
    n = game.num_states
    clauses = []
    for node in game.nodes:
        if not node.is_terminal:
            continue
        condition = term(
            "=",
            term("where", "Marker", Symbol("Neutral")),
            vertex_index(NATURE, node.id, n),
        )
        payoffs = tuple(
            term("payoff", Symbol(f"P{player}"), value)
            for player, value in enumerate(node.payoffs, start=1)
        )
        clauses.append(term("if", condition, term("payoffs", Array(payoffs))))
    return term("end", Array(tuple(clauses)))


def sanitize_name(raw: str) -> str:
    cleaned = "".join(ch for ch in raw if ch.isalnum())
    return cleaned or "game"


def compile_game(game: ExtensiveFormGame, name: str = "game") -> LudiiDescription:
    """Compile a validated game into a complete description.

    Preconditions beyond validity: the root mover is player 1 or nature,
    and every player's information set at the root is the singleton root
    (apply relabel_first_mover / normalize_initial_states first). The
    output is deterministic: structurally equal games compile to
    byte-identical text.
    """
    report = validate_game(game)
    if not report.ok:
        raise CompileError("invalid game: " + "; ".join(report.violations))
    if game.num_players > MAX_PLAYERS or game.num_states > MAX_STATES:
        raise CompileError(
            f"size caps exceeded: {game.num_players} players, {game.num_states} states"
        )
    root = game.nodes[0]
    if not root.is_terminal and root.mover not in (NATURE, 1):
        raise CompileError(
            f"root mover is player {root.mover}; relabel so player 1 moves first"
        )
    for player in range(1, game.num_players + 1):
        members = game.information_set(player, 0)
        if members != (0,):
            raise CompileError(
                f"player {player}'s information set at the root must be the root alone,"
                f" got {members}"
            )
    description = term(
        "game",
        sanitize_name(name),
        term("players", game.num_players),
        emit_equipment(game),
        term(
            "rules",
            emit_start_rules(game),
            emit_play_rules(game),
            emit_end_rules(game),
        ),
    )
    return LudiiDescription(description)
