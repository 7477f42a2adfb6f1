"""Execute game descriptions in the construction subset.

States are immutable values: marker placement per vertex, a hidden
relation between vertices and observing players, the current mover, and
the payoff vector when an end clause matches. ``apply_move`` returns a
fresh state and never touches its input, so everything here is safe to
call concurrently.

Visibility follows reveal-on-change semantics: the moment a vertex's
occupancy changes (a piece leaves, arrives, or passes through) the vertex
becomes visible to every player, and it stays visible until an explicit
``set Hidden`` inside the same move's effect list masks it again. Emitted
descriptions therefore end every move with a full re-hiding block; strip
that block and players start seeing markers they must not see.

Chance moves are sampled with the SplitMix64 generator from
:mod:`efg2ludii.rng`, so playouts are bit-for-bit reproducible from their
seed on any platform.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from typing import Callable, Mapping, Sequence, Union

from .ludemes import Array, LudemeTerm, Symbol
from .lgdl import LgdlError, parse_term_text, subset_violations
from .rng import SplitMix64


class InterpreterError(Exception):
    """A move effect's precondition failed or a playout cannot continue."""


# ---------------------------------------------------------------------------
# Move effects


@dataclass(frozen=True)
class FromTo:
    source: int
    target: int


@dataclass(frozen=True)
class RemoveAllOf:
    owner: int


@dataclass(frozen=True)
class AddToRegion:
    owner: int
    region: str


@dataclass(frozen=True)
class SetHiddenRegion:
    region: str
    observers: tuple[int, ...]  # resolved player ids; All becomes 1..k


@dataclass(frozen=True)
class SetNextPlayer:
    player: int


Effect = Union[FromTo, RemoveAllOf, AddToRegion, SetHiddenRegion, SetNextPlayer]


@dataclass(frozen=True)
class MoveChoice:
    """One selectable move: the vertex to select plus its effect list."""

    select_vertex: int
    effects: tuple[Effect, ...]


@dataclass(frozen=True)
class Deterministic:
    """The mover freely picks one of these choices."""

    choices: tuple[MoveChoice, ...]


@dataclass(frozen=True)
class Chance:
    """A weighted random pick between alternative choice lists."""

    branches: tuple[tuple[int, tuple[MoveChoice, ...]], ...]

    @property
    def total_weight(self) -> int:
        return sum(weight for weight, _ in self.branches)


MoveResolution = Union[Deterministic, Chance]


# ---------------------------------------------------------------------------
# Parsed description


@dataclass(frozen=True)
class LudiiAst:
    """A subset description with resolved symbol tables, ready to execute."""

    name: str
    num_players: int
    num_vertices: int
    edges: tuple[tuple[int, int], ...]
    regions: Mapping[str, tuple[int, ...]]
    start_places: tuple[tuple[int, int], ...]  # (owner, vertex)
    start_hidden: tuple[SetHiddenRegion, ...]
    play_clauses: tuple[tuple[int, MoveResolution], ...]  # (tested vertex, moves)
    end_clauses: tuple[tuple[int, tuple[Decimal, ...]], ...]
    root: LudemeTerm
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def region(self, name: str) -> tuple[int, ...]:
        return self.regions[name]


@dataclass(frozen=True)
class InterpreterState:
    """Immutable snapshot of a running game.

    ``placement`` maps occupied vertices to the owning player (0 is the
    neutral marker). ``hidden[p - 1]`` is the set of vertices masked from
    player p. ``payoffs`` is set exactly when an end clause matches.
    """

    placement: Mapping[int, int]
    hidden: tuple[frozenset[int], ...]
    mover: int
    payoffs: tuple[Decimal, ...] | None = None

    def neutral_vertex(self) -> int:
        """Vertex holding the neutral marker, or -1 if there is none."""
        for vertex, owner in self.placement.items():
            if owner == 0:
                return vertex
        return -1

    def is_hidden(self, vertex: int, player: int) -> bool:
        return vertex in self.hidden[player - 1]

    @property
    def is_terminal(self) -> bool:
        return self.payoffs is not None


@dataclass(frozen=True)
class ObservationView:
    """What one player sees: every vertex is hidden, empty, or a piece.

    ``visible_pieces`` holds (vertex, owner) for occupied vertices the
    observer may see; vertices in ``hidden_vertices`` report hidden no
    matter what they contain; everything else is visibly empty.
    """

    num_vertices: int
    hidden_vertices: frozenset[int]
    visible_pieces: frozenset[tuple[int, int]]

    HIDDEN = "hidden"
    EMPTY = "empty"

    def cell(self, vertex: int):
        if vertex in self.hidden_vertices:
            return self.HIDDEN
        for v, owner in self.visible_pieces:
            if v == vertex:
                return owner
        return self.EMPTY

    def first_difference(self, other: "ObservationView") -> int | None:
        for vertex in range(max(self.num_vertices, other.num_vertices)):
            if self.cell(vertex) != other.cell(vertex):
                return vertex
        return None


# ---------------------------------------------------------------------------
# Building the executable form


def _resolve_observers(target, num_players: int) -> tuple[int, ...]:
    if isinstance(target, Symbol):  # to:All
        return tuple(range(1, num_players + 1))
    return (target.args[0],)


def _build_move(node: LudemeTerm, num_players: int) -> MoveChoice:
    select = node.args[1].args[0]
    effect_terms = node.args[2].args[0].args[0].items
    effects: list[Effect] = []
    for item in effect_terms:
        if item.head == "fromTo":
            effects.append(FromTo(item.args[0].args[0], item.args[1].args[0]))
        elif item.head == "remove":
            owner = int(dict(item.args[0].named)["by"].name[1:])
            effects.append(RemoveAllOf(owner))
        elif item.head == "add":
            effects.append(AddToRegion(item.args[0].args[0], item.args[1].args[0].args[0]))
        elif item.head == "set" and item.args[0].name == "NextPlayer":
            effects.append(SetNextPlayer(item.args[1].args[0]))
        else:  # set Hidden
            region = item.args[1].args[0]
            observers = _resolve_observers(dict(item.named)["to"], num_players)
            effects.append(SetHiddenRegion(region, observers))
    return MoveChoice(select, tuple(effects))


def _build_resolution(node: LudemeTerm, num_players: int) -> MoveResolution:
    if node.head == "or":
        return Deterministic(
            tuple(_build_move(move, num_players) for move in node.args[0].items)
        )
    weights = node.args[0].items
    moves = node.args[1].items
    return Chance(
        tuple(
            (weight, (_build_move(move, num_players),))
            for weight, move in zip(weights, moves)
        )
    )


def build_ast(root: LudemeTerm) -> LudiiAst:
    """Resolve a structurally valid subset term into an executable form.

    Raises LgdlError for semantic problems the shape checks cannot see:
    out-of-range vertices, references to undeclared regions or pieces, and
    player numbers beyond the declared count.
    """
    problems = subset_violations(root)
    if problems:
        raise LgdlError("not in the supported subset: " + "; ".join(problems))

    name = root.args[0]
    num_players = root.args[1].args[0]
    equipment = root.args[2].args[0].items
    rules = root.args[3]

    has_neutral = False
    has_each = False
    num_vertices = 0
    edges: list[tuple[int, int]] = []
    regions: dict[str, tuple[int, ...]] = {}
    for item in equipment:
        if item.head == "piece":
            if item.args[1].name == "Neutral":
                has_neutral = True
            else:
                has_each = True
        elif item.head == "board":
            graph = item.args[0]
            named = dict(graph.named)
            vertices = named["vertices"].items
            if tuple(vertices) != tuple(range(len(vertices))):
                raise LgdlError("graph vertices must be the dense list 0..N-1")
            num_vertices = len(vertices)
            edges = [(edge.items[0], edge.items[1]) for edge in named["edges"].items]
        else:  # regions
            region_name = item.args[0]
            if region_name in regions:
                raise LgdlError(f"region {region_name!r} declared twice")
            regions[region_name] = tuple(item.args[1].items)

    def check_vertex(vertex: int, what: str) -> None:
        if not 0 <= vertex < num_vertices:
            raise LgdlError(f"{what} references vertex {vertex}, board has {num_vertices}")

    def check_player(player: int, what: str) -> None:
        if not 1 <= player <= num_players:
            raise LgdlError(f"{what} references player {player}, game has {num_players}")

    def check_region(region: str, what: str) -> None:
        if region not in regions:
            raise LgdlError(f"{what} references undeclared region {region!r}")

    for a, b in edges:
        check_vertex(a, "graph edge")
        check_vertex(b, "graph edge")
    for region_name, members in regions.items():
        for vertex in members:
            check_vertex(vertex, f"region {region_name!r}")

    start = rules.args[0]
    places: list[tuple[int, int]] = []
    start_hidden: list[SetHiddenRegion] = []
    for item in start.args[0].items:
        if item.head == "place":
            owner = int(item.args[0][len("Marker"):])
            vertex = item.args[1]
            if owner == 0 and not has_neutral:
                raise LgdlError('placing "Marker0" needs (piece "Marker" Neutral)')
            if owner > 0 and not has_each:
                raise LgdlError(f'placing "Marker{owner}" needs (piece "Marker" Each)')
            if owner > num_players:
                raise LgdlError(f'"Marker{owner}" exceeds the player count {num_players}')
            check_vertex(vertex, "place statement")
            places.append((owner, vertex))
        else:
            region = item.args[1].args[0]
            check_region(region, "set Hidden")
            observers = _resolve_observers(dict(item.named)["to"], num_players)
            for obs in observers:
                check_player(obs, "set Hidden")
            start_hidden.append(SetHiddenRegion(region, observers))

    def check_choice(choice: MoveChoice) -> None:
        for effect in choice.effects:
            if isinstance(effect, FromTo):
                check_vertex(effect.source, "fromTo")
                check_vertex(effect.target, "fromTo")
            elif isinstance(effect, RemoveAllOf):
                check_player(effect.owner, "remove")
            elif isinstance(effect, AddToRegion):
                check_player(effect.owner, "add (piece ...)")
                check_region(effect.region, "add")
                if not has_each:
                    raise LgdlError('(add (piece p) ...) needs (piece "Marker" Each)')
            elif isinstance(effect, SetHiddenRegion):
                check_region(effect.region, "set Hidden")
                for obs in effect.observers:
                    check_player(obs, "set Hidden")
            else:
                check_player(effect.player, "set NextPlayer")

    play_clauses: list[tuple[int, MoveResolution]] = []
    generator = rules.args[1].args[0]
    while True:
        if generator.head == "if":
            tested = generator.args[0].args[1]
            check_vertex(tested, "play condition")
            resolution = _build_resolution(generator.args[1], num_players)
            play_clauses.append((tested, resolution))
            if len(generator.args) == 3:
                generator = generator.args[2]
                continue
            break
        # A bare (or ...) or (random ...) applies unconditionally; record it
        # as matching every vertex via a catch-all handled in legal_moves.
        resolution = _build_resolution(generator, num_players)
        play_clauses.append((-1, resolution))
        break
    for _, resolution in play_clauses:
        if isinstance(resolution, Deterministic):
            for choice in resolution.choices:
                check_choice(choice)
        else:
            for _, choices in resolution.branches:
                for choice in choices:
                    check_choice(choice)

    end_clauses: list[tuple[int, tuple[Decimal, ...]]] = []
    for clause in rules.args[2].args[0].items:
        tested = clause.args[0].args[1]
        check_vertex(tested, "end condition")
        payoffs: list[Decimal] = []
        for entry in clause.args[1].args[0].items:
            player = int(entry.args[0].name[1:])
            check_player(player, "payoff")
            value = entry.args[1]
            payoffs.append(value if isinstance(value, Decimal) else Decimal(value))
        if len(payoffs) != num_players:
            raise LgdlError(
                f"end clause for vertex {tested} lists {len(payoffs)} payoffs,"
                f" expected {num_players}"
            )
        end_clauses.append((tested, tuple(payoffs)))

    return LudiiAst(
        name=name,
        num_players=num_players,
        num_vertices=num_vertices,
        edges=tuple(edges),
        regions=regions,
        start_places=tuple(places),
        start_hidden=tuple(start_hidden),
        play_clauses=tuple(play_clauses),
        end_clauses=tuple(end_clauses),
        root=root,
    )


def parse_lgdl(text: str) -> LudiiAst:
    """Parse description text, enforce the subset, and build symbol tables."""
    return build_ast(parse_term_text(text))


# ---------------------------------------------------------------------------
# Semantics


def is_terminal(ast: LudiiAst, state: InterpreterState) -> tuple[Decimal, ...] | None:
    """Payoffs of the first end clause matching ``state``, if any."""
    neutral = state.neutral_vertex()
    for tested, payoffs in ast.end_clauses:
        if tested == neutral:
            return payoffs
    return None


def _finish_state(
    ast: LudiiAst,
    placement: dict[int, int],
    hidden: tuple[frozenset[int], ...],
    mover: int,
) -> InterpreterState:
    state = InterpreterState(placement, hidden, mover)
    payoffs = is_terminal(ast, state)
    if payoffs is None:
        return state
    return InterpreterState(placement, hidden, mover, payoffs)


def _region_set(ast: LudiiAst, name: str) -> frozenset[int]:
    key = ("region", name)
    cached = ast._cache.get(key)
    if cached is None:
        cached = frozenset(ast.regions[name])
        ast._cache[key] = cached
    return cached


def _initial_masks(ast: LudiiAst) -> tuple[frozenset[int], ...]:
    """Hidden sets produced by the start rules, cached as shared objects."""
    cached = ast._cache.get("initial_masks")
    if cached is None:
        masks = [set() for _ in range(ast.num_players)]
        for statement in ast.start_hidden:
            members = ast.regions[statement.region]
            for observer in statement.observers:
                masks[observer - 1].update(members)
        cached = tuple(frozenset(mask) for mask in masks)
        ast._cache["initial_masks"] = cached
    return cached


def _region_newly_hidden(ast: LudiiAst, region: str, observer: int) -> frozenset[int]:
    """Region vertices not already masked from ``observer`` initially."""
    key = ("outside", region, observer)
    cached = ast._cache.get(key)
    if cached is None:
        cached = _region_set(ast, region) - _initial_masks(ast)[observer - 1]
        ast._cache[key] = cached
    return cached


def initial_state(ast: LudiiAst) -> InterpreterState:
    """Run the start rules: place markers, then apply hidden masks, mover 1."""
    placement: dict[int, int] = {}
    for owner, vertex in ast.start_places:
        if vertex in placement:
            raise InterpreterError(f"place onto occupied vertex {vertex}")
        placement[vertex] = owner
    return _finish_state(ast, placement, _initial_masks(ast), 1)


def legal_moves(ast: LudiiAst, state: InterpreterState) -> MoveResolution:
    """Walk the play chain; the first matching clause supplies the moves."""
    neutral = state.neutral_vertex()
    for tested, resolution in ast.play_clauses:
        if tested == neutral or tested == -1:
            return resolution
    return Deterministic(())


def apply_move(
    ast: LudiiAst, state: InterpreterState, choice: MoveChoice
) -> InterpreterState:
    """Apply one move's effects in order and return the successor state.

    Any vertex whose occupancy changes is revealed to all players at that
    point in the effect list; later ``set Hidden`` effects can mask it
    again. After the effects, the mover advances to the next player
    (wrapping k back to 1) unless an explicit next-player effect fired.
    """
    placement = dict(state.placement)
    # Visibility log in effect order: ("reveal", vertices) applies to every
    # player; ("hide", region name, observers) masks a region for some
    # players. The final status of a vertex is decided by the last entry
    # covering it, so reveal-then-rehide restores the mask exactly.
    log: list[tuple] = []
    next_mover: int | None = None

    for effect in choice.effects:
        if isinstance(effect, FromTo):
            if effect.source not in placement:
                raise InterpreterError(
                    f"fromTo: vertex {effect.source} holds no piece to move"
                )
            if effect.target in placement:
                raise InterpreterError(
                    f"fromTo: vertex {effect.target} is already occupied"
                )
            placement[effect.target] = placement.pop(effect.source)
            log.append(("reveal", frozenset((effect.source, effect.target))))
        elif isinstance(effect, RemoveAllOf):
            cleared = frozenset(
                vertex for vertex, owner in placement.items() if owner == effect.owner
            )
            for vertex in cleared:
                del placement[vertex]
            if cleared:
                log.append(("reveal", cleared))
        elif isinstance(effect, AddToRegion):
            members = ast.regions[effect.region]
            for vertex in members:
                if vertex in placement:
                    raise InterpreterError(f"add: vertex {vertex} is already occupied")
                placement[vertex] = effect.owner
            if members:
                log.append(("reveal", frozenset(members)))
        elif isinstance(effect, SetHiddenRegion):
            log.append(("hide", effect.region, effect.observers))
        else:
            next_mover = effect.player

    initial = _initial_masks(ast)
    new_hidden: list[frozenset[int]] = []
    for observer in range(1, ast.num_players + 1):
        current = state.hidden[observer - 1]
        # The only vertices whose masked status can change are those some
        # reveal touched, plus hide targets that were not masked before.
        # Everything else is either untouched or re-hidden in place.
        candidates: set[int] = set()
        for entry in log:
            if entry[0] == "reveal":
                candidates.update(entry[1])
            elif observer in entry[2]:
                if current is initial[observer - 1]:
                    candidates.update(_region_newly_hidden(ast, entry[1], observer))
                else:
                    candidates.update(_region_set(ast, entry[1]) - current)
        add: set[int] = set()
        drop: set[int] = set()
        for vertex in candidates:
            status = vertex in current
            for entry in log:
                if entry[0] == "reveal":
                    if vertex in entry[1]:
                        status = False
                elif observer in entry[2] and vertex in _region_set(ast, entry[1]):
                    status = True
            if status != (vertex in current):
                (add if status else drop).add(vertex)
        if add or drop:
            new_hidden.append(frozenset((current - drop) | add))
        else:
            new_hidden.append(current)

    mover = next_mover if next_mover is not None else state.mover % ast.num_players + 1
    return _finish_state(ast, placement, tuple(new_hidden), mover)


def observe(ast: LudiiAst, state: InterpreterState, player: int) -> ObservationView:
    """The board as ``player`` sees it, with masked vertices reported hidden."""
    if not 1 <= player <= ast.num_players:
        raise ValueError(f"player {player} out of range 1..{ast.num_players}")
    masked = state.hidden[player - 1]
    visible = frozenset(
        (vertex, owner)
        for vertex, owner in state.placement.items()
        if vertex not in masked
    )
    return ObservationView(ast.num_vertices, masked, visible)


# ---------------------------------------------------------------------------
# Playouts


Policy = Callable[[SplitMix64, InterpreterState, Sequence[MoveChoice]], int]


def uniform_policy(
    rng: SplitMix64, state: InterpreterState, choices: Sequence[MoveChoice]
) -> int:
    """Pick uniformly among the available choices."""
    return rng.below(len(choices))


@dataclass(frozen=True)
class PlayoutStep:
    before_vertex: int
    select_vertex: int
    after_vertex: int


@dataclass(frozen=True)
class PlayoutResult:
    steps: tuple[PlayoutStep, ...]
    choices: tuple[MoveChoice, ...]
    payoffs: tuple[Decimal, ...]
    final_state: InterpreterState
    chance_probability: Fraction  # product of sampled chance-branch weights


def playout(
    ast: LudiiAst,
    seed: int,
    policy: Policy | None = uniform_policy,
    max_steps: int = 1_000_000,
) -> PlayoutResult:
    """Play one full game from the initial state, deterministically from seed.

    Chance branches are sampled by weight; free choices go through
    ``policy`` (uniform by default). Passing ``policy=None`` makes a state
    with more than one free choice an error, for callers that insist on
    supplying every decision themselves. The same (description, seed,
    policy) always reproduces the same trajectory.
    """
    rng = SplitMix64(seed)
    state = initial_state(ast)
    steps: list[PlayoutStep] = []
    taken: list[MoveChoice] = []
    probability = Fraction(1)
    for _ in range(max_steps):
        if state.is_terminal:
            return PlayoutResult(
                tuple(steps), tuple(taken), state.payoffs, state, probability
            )
        resolution = legal_moves(ast, state)
        if isinstance(resolution, Deterministic):
            choices = resolution.choices
            if not choices:
                raise InterpreterError(
                    "no legal moves in a non-terminal state (malformed game)"
                )
            if len(choices) == 1:
                picked = choices[0]
            elif policy is None:
                raise InterpreterError(
                    "external choice required: state offers several moves"
                )
            else:
                picked = choices[policy(rng, state, choices)]
        else:
            branches = resolution.branches
            index = 0 if len(branches) == 1 else rng.weighted(
                [weight for weight, _ in branches]
            )
            weight, branch_choices = branches[index]
            if len(branch_choices) != 1:
                raise InterpreterError(
                    "chance branch must yield exactly one move"
                )
            picked = branch_choices[0]
            probability *= Fraction(weight, resolution.total_weight)
        before = state.neutral_vertex()
        state = apply_move(ast, state, picked)
        steps.append(PlayoutStep(before, picked.select_vertex, state.neutral_vertex()))
        taken.append(picked)
    raise InterpreterError(f"playout did not terminate within {max_steps} steps")
