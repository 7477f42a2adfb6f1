"""Compile extensive-form games to a Ludii-style description subset.

The pipeline: model a finite extensive-form game exactly (rational chance
probabilities, decimal payoffs, per-player information partitions),
compile it onto a marker-tracking board description, interpret that
description, and mechanically check that the two sides stay equivalent
state for state, move for move, probability for probability, and
observation for observation.
"""

from .game import (
    NATURE,
    EfgNode,
    ExtensiveFormGame,
    Trajectory,
    ValidationReport,
    complete_partitions,
    enumerate_states,
    enumerate_trajectories,
    game_from_nodes,
    normalize_initial_states,
    relabel_first_mover,
    swap_player_labels,
    validate_game,
)
from .efg_text import EfgFormatError, parse_efg, serialize_efg
from .ludemes import Array, LudemeTerm, Symbol, array, render, term
from .emitter import (
    CompileError,
    LudiiDescription,
    compile_game,
    emit_end_rules,
    emit_equipment,
    emit_move_rule,
    emit_play_rules,
    emit_start_rules,
    probabilities_to_weights,
    vertex_index,
)
from .lgdl import KEYWORDS, LgdlError, parse_term_text, subset_violations
from .interpreter import (
    Chance,
    Deterministic,
    InterpreterError,
    InterpreterState,
    LudiiAst,
    MoveChoice,
    ObservationView,
    PlayoutResult,
    apply_move,
    initial_state,
    is_terminal,
    legal_moves,
    observe,
    parse_lgdl,
    playout,
    uniform_policy,
)
from .checker import (
    EquivalenceReport,
    StatisticalReport,
    check_equivalence,
    check_indistinguishability,
    statistical_playout_check,
    verify_description,
)
from .generator import GeneratorConfig, generate_game
from .rng import SplitMix64

__all__ = [
    "NATURE",
    "EfgNode",
    "ExtensiveFormGame",
    "Trajectory",
    "ValidationReport",
    "complete_partitions",
    "enumerate_states",
    "enumerate_trajectories",
    "game_from_nodes",
    "normalize_initial_states",
    "relabel_first_mover",
    "swap_player_labels",
    "validate_game",
    "EfgFormatError",
    "parse_efg",
    "serialize_efg",
    "Array",
    "LudemeTerm",
    "Symbol",
    "array",
    "render",
    "term",
    "CompileError",
    "LudiiDescription",
    "compile_game",
    "emit_end_rules",
    "emit_equipment",
    "emit_move_rule",
    "emit_play_rules",
    "emit_start_rules",
    "probabilities_to_weights",
    "vertex_index",
    "KEYWORDS",
    "LgdlError",
    "parse_term_text",
    "subset_violations",
    "Chance",
    "Deterministic",
    "InterpreterError",
    "InterpreterState",
    "LudiiAst",
    "MoveChoice",
    "ObservationView",
    "PlayoutResult",
    "apply_move",
    "initial_state",
    "is_terminal",
    "legal_moves",
    "observe",
    "parse_lgdl",
    "playout",
    "uniform_policy",
    "EquivalenceReport",
    "StatisticalReport",
    "check_equivalence",
    "check_indistinguishability",
    "statistical_playout_check",
    "verify_description",
    "GeneratorConfig",
    "generate_game",
    "SplitMix64",
]
