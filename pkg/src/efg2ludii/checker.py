"""Mechanically verify that a compiled description matches its source game.

The checks walk the game tree and the interpreter side by side, pairing
each source state with the interpreter state whose neutral marker sits on
the matching vertex. Criteria checked:

* 1  subset validity: the description re-parses inside the construction
  subset (the full upstream language is out of scope, so this is what
  "valid description" means here).
* 2a pairing: every reachable state has an equivalent interpreter state at
  the same transition depth, witnessed by the neutral marker's vertex.
* 2b movers: at non-chance states the interpreter's mover is the state's.
* 2c branching: decision states offer exactly one move per child.
* 2d chance: chance states offer weighted branches whose normalized
  weights equal the source probabilities exactly.
* 2e payoffs: terminal states align and pay out exactly equal vectors.
* 3  indistinguishability: two states look identical to a player if and
  only if they share that player's information set, in both directions.

On top of the criteria, the equivalence check compares the multiset of
(leaf, exact chance probability) trajectories on both sides. All
comparisons except the sampled statistical check are exact: rationals and
decimals, no tolerances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .game import ExtensiveFormGame, Trajectory, enumerate_trajectories
from .interpreter import (
    Chance,
    Deterministic,
    InterpreterState,
    LudiiAst,
    MoveChoice,
    apply_move,
    initial_state,
    is_terminal,
    legal_moves,
    observe,
    parse_lgdl,
    playout,
)
from .lgdl import LgdlError, subset_violations
from .ludemes import render
from .rng import SplitMix64

PASS = "pass"
FAIL = "fail"
SKIPPED = "skipped"

CRITERIA = ("1", "2a", "2b", "2c", "2d", "2e", "3")


@dataclass(frozen=True)
class SyncPair:
    """A source state paired with its candidate equivalent interpreter state."""

    efg_state: int
    ludii_state: InterpreterState
    depth: int
    path: tuple[int, ...]  # branch indices from the root


@dataclass(frozen=True)
class Counterexample:
    criterion: str
    message: str
    states: tuple[int, ...] = ()
    player: int | None = None
    path: tuple[int, ...] = ()
    second_path: tuple[int, ...] | None = None
    depths: tuple[int, ...] = ()

    def render(self) -> str:
        parts = [f"counterexample criterion={self.criterion}"]
        if self.player is not None:
            parts.append(f"player={self.player}")
        if self.states:
            parts.append("states=" + ",".join(str(s) for s in self.states))
        if self.depths:
            parts.append("depths=" + ",".join(str(d) for d in self.depths))
        parts.append("path=" + (".".join(str(b) for b in self.path) or "-"))
        if self.second_path is not None:
            parts.append(
                "second_path=" + (".".join(str(b) for b in self.second_path) or "-")
            )
        parts.append(f"detail={self.message!r}")
        return " ".join(parts)


@dataclass
class CriterionResult:
    name: str
    status: str = PASS
    checked: int = 0
    counterexamples: list[Counterexample] = field(default_factory=list)

    def fail(self, example: Counterexample) -> None:
        self.status = FAIL
        self.counterexamples.append(example)


@dataclass
class EquivalenceReport:
    """Per-criterion outcomes plus the trajectory-multiset comparison."""

    results: dict[str, CriterionResult] = field(default_factory=dict)
    bijection: CriterionResult | None = None
    pairs_checked: int = 0
    moves_applied: int = 0

    def result(self, name: str) -> CriterionResult:
        if name not in self.results:
            self.results[name] = CriterionResult(name)
        return self.results[name]

    @property
    def all_pass(self) -> bool:
        outcomes = [r.status for r in self.results.values()]
        if self.bijection is not None:
            outcomes.append(self.bijection.status)
        return all(status != FAIL for status in outcomes)

    def failed_criteria(self) -> list[str]:
        return [name for name, r in sorted(self.results.items()) if r.status == FAIL]

    def merge(self, other: "EquivalenceReport") -> "EquivalenceReport":
        merged = EquivalenceReport()
        for source in (self, other):
            for name, result in source.results.items():
                merged.results[name] = result
        merged.bijection = other.bijection if other.bijection else self.bijection
        merged.pairs_checked = max(self.pairs_checked, other.pairs_checked)
        merged.moves_applied = self.moves_applied + other.moves_applied
        return merged

    def render(self) -> str:
        lines = []
        for name in sorted(self.results):
            result = self.results[name]
            lines.append(
                f"criterion={name} status={result.status} checked={result.checked}"
            )
            for example in result.counterexamples:
                lines.append(example.render())
        if self.bijection is not None:
            lines.append(
                f"trajectory_bijection status={self.bijection.status}"
                f" checked={self.bijection.checked}"
            )
            for example in self.bijection.counterexamples:
                lines.append(example.render())
        lines.append(
            f"summary status={'PASS' if self.all_pass else 'FAIL'}"
            f" pairs={self.pairs_checked} moves={self.moves_applied}"
        )
        return "\n".join(lines)


def _check_subset_validity(ast: LudiiAst, report: EquivalenceReport) -> None:
    result = report.result("1")
    result.checked = 1
    problems = subset_violations(ast.root)
    if problems:
        result.fail(
            Counterexample("1", "description left the subset: " + "; ".join(problems))
        )
    else:
        try:
            parse_lgdl(render(ast.root))
        except LgdlError as exc:
            result.fail(Counterexample("1", f"re-parse failed: {exc}"))


def _branch_choices(resolution, index: int) -> tuple[MoveChoice, ...]:
    if isinstance(resolution, Deterministic):
        if index < len(resolution.choices):
            return (resolution.choices[index],)
        return ()
    if index < len(resolution.branches):
        return resolution.branches[index][1]
    return ()


def synchronized_pairs(
    game: ExtensiveFormGame, ast: LudiiAst
) -> tuple[list[SyncPair], list[str]]:
    """Depth-first synchronized traversal; also reports structural snags.

    Branch b of a state is paired with the b-th move (or chance branch) of
    the matching clause. When one side offers fewer branches the extras are
    skipped and noted; criteria checks downstream turn that into failures.
    """
    pairs: list[SyncPair] = []
    snags: list[str] = []
    stack = [SyncPair(0, initial_state(ast), 0, ())]
    while stack:
        pair = stack.pop()
        pairs.append(pair)
        node = game.nodes[pair.efg_state]
        if node.is_terminal:
            continue
        if pair.ludii_state.is_terminal:
            snags.append(
                f"state {pair.efg_state}: interpreter state is terminal, source is not"
            )
            continue
        resolution = legal_moves(ast, pair.ludii_state)
        descend = []
        for branch, child in enumerate(node.children):
            choices = _branch_choices(resolution, branch)
            if len(choices) != 1:
                snags.append(
                    f"state {pair.efg_state}: branch {branch} has no unique paired move"
                )
                continue
            successor = apply_move(ast, pair.ludii_state, choices[0])
            descend.append(
                SyncPair(child, successor, pair.depth + 1, pair.path + (branch,))
            )
        stack.extend(reversed(descend))
    return pairs, snags


def check_equivalence(game: ExtensiveFormGame, ast: LudiiAst) -> EquivalenceReport:
    """Verify criteria 1 and 2a-2e plus the trajectory multiset, exactly."""
    report = EquivalenceReport()
    _check_subset_validity(ast, report)
    for name in ("2a", "2b", "2c", "2d", "2e"):
        report.result(name)
    bijection = CriterionResult("bijection")
    report.bijection = bijection

    ludii_leaves: list[tuple[int, Fraction]] = []
    stack = [(SyncPair(0, initial_state(ast), 0, ()), 0, Fraction(1))]
    while stack:
        pair, steps_taken, probability = stack.pop()
        report.pairs_checked += 1
        node = game.nodes[pair.efg_state]
        state = pair.ludii_state

        result_2a = report.result("2a")
        result_2a.checked += 1
        neutral = state.neutral_vertex()
        if neutral != pair.efg_state:
            result_2a.fail(
                Counterexample(
                    "2a",
                    f"neutral marker on vertex {neutral}, expected state {pair.efg_state}",
                    states=(pair.efg_state,),
                    path=pair.path,
                    depths=(pair.depth, steps_taken),
                )
            )
        if steps_taken != pair.depth:
            result_2a.fail(
                Counterexample(
                    "2a",
                    f"reached in {steps_taken} transitions, source depth {pair.depth}",
                    states=(pair.efg_state,),
                    path=pair.path,
                    depths=(pair.depth, steps_taken),
                )
            )

        result_2e = report.result("2e")
        result_2e.checked += 1
        ludii_payoffs = is_terminal(ast, state)
        if node.is_terminal:
            if ludii_payoffs is None:
                result_2e.fail(
                    Counterexample(
                        "2e",
                        f"terminal state {pair.efg_state} is not terminal when interpreted",
                        states=(pair.efg_state,),
                        path=pair.path,
                    )
                )
            elif len(ludii_payoffs) != len(node.payoffs) or any(
                a != b for a, b in zip(ludii_payoffs, node.payoffs)
            ):
                result_2e.fail(
                    Counterexample(
                        "2e",
                        f"payoffs {tuple(map(str, ludii_payoffs))} != "
                        f"{tuple(map(str, node.payoffs))}",
                        states=(pair.efg_state,),
                        path=pair.path,
                    )
                )
            ludii_leaves.append((neutral, probability))
            continue
        if ludii_payoffs is not None:
            result_2e.fail(
                Counterexample(
                    "2e",
                    f"inner state {pair.efg_state} is terminal when interpreted",
                    states=(pair.efg_state,),
                    path=pair.path,
                )
            )
            continue

        resolution = legal_moves(ast, state)
        branch_probs: list[Fraction] = []
        if node.is_chance:
            result_2d = report.result("2d")
            result_2d.checked += 1
            if not isinstance(resolution, Chance):
                result_2d.fail(
                    Counterexample(
                        "2d",
                        f"chance state {pair.efg_state} resolves to free moves",
                        states=(pair.efg_state,),
                        path=pair.path,
                    )
                )
            else:
                total = resolution.total_weight
                if len(resolution.branches) != len(node.children):
                    result_2d.fail(
                        Counterexample(
                            "2d",
                            f"{len(resolution.branches)} chance branches for"
                            f" {len(node.children)} children",
                            states=(pair.efg_state,),
                            path=pair.path,
                        )
                    )
                for index, (weight, choices) in enumerate(resolution.branches):
                    if index < len(node.children):
                        expected = node.chance_probs[index]
                        actual = Fraction(weight, total)
                        if actual != expected:
                            result_2d.fail(
                                Counterexample(
                                    "2d",
                                    f"branch {index} probability {actual} != {expected}",
                                    states=(pair.efg_state,),
                                    path=pair.path,
                                )
                            )
                    if len(choices) != 1:
                        result_2d.fail(
                            Counterexample(
                                "2d",
                                f"chance branch {index} yields {len(choices)} moves,"
                                " expected exactly one",
                                states=(pair.efg_state,),
                                path=pair.path,
                            )
                        )
                branch_probs = [
                    Fraction(weight, total) for weight, _ in resolution.branches
                ]
        else:
            result_2b = report.result("2b")
            result_2b.checked += 1
            if state.mover != node.mover:
                result_2b.fail(
                    Counterexample(
                        "2b",
                        f"interpreter mover {state.mover}, source mover {node.mover}",
                        states=(pair.efg_state,),
                        path=pair.path,
                    )
                )
            result_2c = report.result("2c")
            result_2c.checked += 1
            if not isinstance(resolution, Deterministic):
                result_2c.fail(
                    Counterexample(
                        "2c",
                        f"decision state {pair.efg_state} resolves to chance moves",
                        states=(pair.efg_state,),
                        path=pair.path,
                    )
                )
            elif len(resolution.choices) != len(node.children):
                result_2c.fail(
                    Counterexample(
                        "2c",
                        f"{len(resolution.choices)} legal moves for"
                        f" {len(node.children)} branches",
                        states=(pair.efg_state,),
                        path=pair.path,
                    )
                )

        descend = []
        for branch, child in enumerate(node.children):
            choices = _branch_choices(resolution, branch)
            if len(choices) != 1:
                continue  # already reported through 2c/2d above
            successor = apply_move(ast, state, choices[0])
            report.moves_applied += 1
            factor = (
                branch_probs[branch]
                if node.is_chance and branch < len(branch_probs)
                else Fraction(1)
            )
            descend.append(
                (
                    SyncPair(child, successor, pair.depth + 1, pair.path + (branch,)),
                    steps_taken + 1,
                    probability * factor,
                )
            )
        stack.extend(reversed(descend))

    expected_leaves = sorted(
        ((t.states[-1], t.probability) for t in enumerate_trajectories(game))
    )
    actual_leaves = sorted(ludii_leaves)
    bijection.checked = len(expected_leaves)
    if expected_leaves != actual_leaves:
        missing = [item for item in expected_leaves if item not in actual_leaves]
        extra = [item for item in actual_leaves if item not in expected_leaves]
        bijection.fail(
            Counterexample(
                "bijection",
                f"trajectory multisets differ; missing={missing[:3]} extra={extra[:3]}",
            )
        )
    return report


def check_indistinguishability(
    game: ExtensiveFormGame, ast: LudiiAst
) -> EquivalenceReport:
    """Criterion 3: equal views exactly characterize shared information sets.

    Checked per player over all reachable state pairs via equivalence
    classes: every information set must map into a single view class, and
    every view class must stay inside a single information set. Pairs at
    different depths are checked too; their counterexamples carry depths.
    """
    report = EquivalenceReport()
    result = report.result("3")
    # Snags (branches without a paired move) belong to criteria 2c/2d; here
    # they only shrink the reachable pair set the quantifier ranges over.
    pairs, _ = synchronized_pairs(game, ast)
    report.pairs_checked = len(pairs)
    by_state = {pair.efg_state: pair for pair in pairs}

    for player in range(1, game.num_players + 1):
        views = {
            state: observe(ast, pair.ludii_state, player)
            for state, pair in by_state.items()
        }
        result.checked += len(views)
        # Same information set must imply equal views.
        for part in game.information_sets[player - 1]:
            reached = [s for s in part if s in views]
            for other in reached[1:]:
                base = reached[0]
                if views[base] != views[other]:
                    vertex = views[base].first_difference(views[other])
                    result.fail(
                        Counterexample(
                            "3",
                            "states share an information set but views differ"
                            f" first at vertex {vertex}",
                            states=(base, other),
                            player=player,
                            path=by_state[base].path,
                            second_path=by_state[other].path,
                            depths=(by_state[base].depth, by_state[other].depth),
                        )
                    )
        # Equal views must imply the same information set.
        buckets: dict[ObservationKey, list[int]] = {}
        for state, view in views.items():
            buckets.setdefault(view, []).append(state)
        for bucket in buckets.values():
            base = bucket[0]
            base_part = game.infoset_index(player, base)
            for other in bucket[1:]:
                if game.infoset_index(player, other) != base_part:
                    result.fail(
                        Counterexample(
                            "3",
                            "states look identical but sit in different"
                            " information sets",
                            states=(base, other),
                            player=player,
                            path=by_state[base].path,
                            second_path=by_state[other].path,
                            depths=(by_state[base].depth, by_state[other].depth),
                        )
                    )
    result.counterexamples.sort(key=lambda c: (c.player or 0, c.states))
    return report


ObservationKey = object  # views are hashable frozen dataclasses


@dataclass(frozen=True)
class LeafStatistic:
    leaf_vertex: int
    exact: Fraction
    count: int
    frequency: float
    deviation: float
    bound: float


@dataclass(frozen=True)
class StatisticalReport:
    num_playouts: int
    seed: int
    sigma: float
    leaves: tuple[LeafStatistic, ...]
    max_deviation: float
    passed: bool

    def render(self) -> str:
        lines = [
            f"statistical_check n={self.num_playouts} seed={self.seed}"
            f" sigma={self.sigma} status={'pass' if self.passed else 'fail'}"
        ]
        for leaf in self.leaves:
            lines.append(
                f"leaf vertex={leaf.leaf_vertex} exact={leaf.exact}"
                f" count={leaf.count} deviation={leaf.deviation:.6f}"
                f" bound={leaf.bound:.6f}"
            )
        lines.append(f"max_deviation={self.max_deviation:.6f}")
        return "\n".join(lines)


def _uniform_leaf_distribution(game: ExtensiveFormGame) -> dict[int, Fraction]:
    """Exact leaf distribution: chance by weight, decisions uniformly."""
    distribution: dict[int, Fraction] = {}
    stack: list[tuple[int, Fraction]] = [(0, Fraction(1))]
    while stack:
        state, probability = stack.pop()
        node = game.nodes[state]
        if node.is_terminal:
            distribution[state] = distribution.get(state, Fraction(0)) + probability
            continue
        for index, child in enumerate(node.children):
            factor = (
                node.chance_probs[index]
                if node.is_chance
                else Fraction(1, len(node.children))
            )
            stack.append((child, probability * factor))
    return distribution


def statistical_playout_check(
    game: ExtensiveFormGame,
    ast: LudiiAst,
    num_playouts: int,
    seed: int,
    sigma: float = 3.0,
) -> StatisticalReport:
    """Sampled cross-check of the chance distributions.

    Runs seeded playouts with the uniform policy and compares each leaf's
    empirical frequency against the exact probability implied by the chance
    weights and uniform decisions. A leaf passes when its deviation is
    within ``sigma`` binomial standard deviations; the run is reproducible
    bit for bit from the seed.
    """
    if num_playouts < 1:
        raise ValueError("num_playouts must be at least 1")
    expected = _uniform_leaf_distribution(game)
    counts: dict[int, int] = {}
    master = SplitMix64(seed)
    playout_seeds = [master.next_uint64() for _ in range(num_playouts)]
    for playout_seed in playout_seeds:
        result = playout(ast, playout_seed)
        leaf = result.final_state.neutral_vertex()
        counts[leaf] = counts.get(leaf, 0) + 1

    leaves: list[LeafStatistic] = []
    passed = True
    max_deviation = 0.0
    observed = set(counts) | set(expected)
    for leaf in sorted(observed):
        exact = expected.get(leaf, Fraction(0))
        count = counts.get(leaf, 0)
        frequency = count / num_playouts
        deviation = abs(frequency - float(exact))
        bound = sigma * math.sqrt(float(exact) * (1 - float(exact)) / num_playouts)
        max_deviation = max(max_deviation, deviation)
        if deviation > bound:
            passed = False
        leaves.append(
            LeafStatistic(leaf, exact, count, frequency, deviation, bound)
        )
    return StatisticalReport(
        num_playouts, seed, sigma, tuple(leaves), max_deviation, passed
    )


def verify_description(game: ExtensiveFormGame, text: str) -> EquivalenceReport:
    """Parse a description and run both exact checks, merging the reports.

    If the text does not parse inside the subset, criterion 1 fails and the
    remaining criteria are reported as skipped rather than failed.
    """
    try:
        ast = parse_lgdl(text)
    except LgdlError as exc:
        report = EquivalenceReport()
        one = report.result("1")
        one.checked = 1
        one.fail(Counterexample("1", str(exc)))
        for name in CRITERIA[1:]:
            report.result(name).status = SKIPPED
        return report
    return check_equivalence(game, ast).merge(check_indistinguishability(game, ast))
