"""Scripted faults for compiled descriptions.

Each mutation breaks exactly one equivalence criterion while leaving the
description inside the parseable subset, so the checker's verdicts can be
validated against known-bad inputs: a checker that still reports a clean
pass after one of these is unsound. Mutations never modify their input;
they return a rebuilt term tree.
"""

from __future__ import annotations

from decimal import Decimal

from .ludemes import Array, Argument, LudemeTerm, Symbol, iter_terms


class MutationError(Exception):
    """The requested mutation target does not exist in the term tree."""


def _rebuild(root: LudemeTerm, replace) -> LudemeTerm:
    """Bottom-up copy of ``root`` with ``replace`` applied to each term.

    ``replace(term)`` returns a replacement term, or None to drop the term
    from its surrounding array. Iterative, so chained rule nests of any
    depth are safe.
    """
    order: list[Argument] = []
    stack: list[Argument] = [root]
    while stack:
        node = stack.pop()
        order.append(node)
        if isinstance(node, LudemeTerm):
            stack.extend(node.args)
            stack.extend(value for _, value in node.named)
        elif isinstance(node, Array):
            stack.extend(node.items)
    rebuilt: dict[int, Argument | None] = {}

    def lookup(node: Argument) -> Argument | None:
        if isinstance(node, (LudemeTerm, Array)):
            return rebuilt[id(node)]
        return node

    for node in reversed(order):
        if isinstance(node, LudemeTerm):
            args = tuple(lookup(a) for a in node.args)
            named = tuple((name, lookup(v)) for name, v in node.named)
            if any(a is None for a in args) or any(v is None for _, v in named):
                raise MutationError("cannot drop a positional or named argument")
            candidate = LudemeTerm(node.head, args, named, pos=node.pos)
            rebuilt[id(node)] = replace(candidate, node)
        elif isinstance(node, Array):
            items = tuple(
                item
                for item in (lookup(i) for i in node.items)
                if item is not None
            )
            rebuilt[id(node)] = Array(items)
    result = rebuilt[id(root)]
    if not isinstance(result, LudemeTerm):
        raise MutationError("mutation removed the top-level term")
    return result


def _nth_term(root: LudemeTerm, predicate, occurrence: int) -> LudemeTerm:
    index = 0
    for node in iter_terms(root):
        if predicate(node):
            if index == occurrence:
                return node
            index += 1
    raise MutationError(f"no occurrence {occurrence} of the mutation target")


def override_next_player(
    root: LudemeTerm, player: int, occurrence: int = 0
) -> LudemeTerm:
    """Point the n-th ``(set NextPlayer (player m))`` at a different player.

    Breaks the mover criterion at the state the mutated move enters.
    """
    target = _nth_term(
        root,
        lambda t: t.head == "set"
        and t.args
        and isinstance(t.args[0], Symbol)
        and t.args[0].name == "NextPlayer",
        occurrence,
    )

    def replace(candidate: LudemeTerm, original: LudemeTerm):
        if original is target:
            return LudemeTerm(
                "set", (Symbol("NextPlayer"), LudemeTerm("player", (player,))), ()
            )
        return candidate

    return _rebuild(root, replace)


def delete_move(root: LudemeTerm, or_occurrence: int = 0) -> LudemeTerm:
    """Drop the last alternative from the n-th ``(or { ... })`` move list.

    Breaks the branching-factor criterion at that state. Deleting the last
    alternative (not an earlier one) keeps the remaining moves paired with
    the same branches, so nothing else is disturbed.
    """
    target = _nth_term(
        root,
        lambda t: t.head == "or" and t.args and isinstance(t.args[0], Array) and t.args[0].items,
        occurrence=or_occurrence,
    )

    def replace(candidate: LudemeTerm, original: LudemeTerm):
        if original is target:
            items = candidate.args[0].items
            return LudemeTerm("or", (Array(items[:-1]),))
        return candidate

    return _rebuild(root, replace)


def perturb_chance_weight(
    root: LudemeTerm, occurrence: int = 0, index: int = 0, delta: int = 1
) -> LudemeTerm:
    """Nudge one weight of the n-th ``(random { ... } { ... })``.

    Breaks the chance-distribution criterion at that state.
    """
    target = _nth_term(root, lambda t: t.head == "random", occurrence)

    def replace(candidate: LudemeTerm, original: LudemeTerm):
        if original is target:
            weights = list(candidate.args[0].items)
            if index >= len(weights):
                raise MutationError(f"random has no weight index {index}")
            weights[index] += delta
            return LudemeTerm("random", (Array(tuple(weights)), candidate.args[1]))
        return candidate

    return _rebuild(root, replace)


def perturb_payoff(
    root: LudemeTerm, occurrence: int = 0, delta: Decimal = Decimal(1)
) -> LudemeTerm:
    """Shift the value of the n-th ``(payoff P<p> v)`` entry.

    Breaks the payoff criterion at the terminal whose clause was touched.
    """
    target = _nth_term(root, lambda t: t.head == "payoff", occurrence)

    def replace(candidate: LudemeTerm, original: LudemeTerm):
        if original is target:
            value = candidate.args[1]
            base = value if isinstance(value, Decimal) else Decimal(value)
            return LudemeTerm("payoff", (candidate.args[0], base + delta))
        return candidate

    return _rebuild(root, replace)


def strip_rehiding(root: LudemeTerm) -> LudemeTerm:
    """Remove every ``set Hidden`` effect from every move's effect list.

    Start-rule masks stay in place, so the game still begins correctly
    hidden; but vertices revealed by moves stay visible, which breaks
    indistinguishability for any game with shared information sets.
    """
    move_effect_arrays: set[int] = set()
    for node in iter_terms(root):
        if node.head == "and":
            move_effect_arrays.add(id(node))

    inside: set[int] = set()
    for node in iter_terms(root):
        if id(node) in move_effect_arrays and node.args:
            array = node.args[0]
            if isinstance(array, Array):
                for item in array.items:
                    if (
                        isinstance(item, LudemeTerm)
                        and item.head == "set"
                        and item.args
                        and isinstance(item.args[0], Symbol)
                        and item.args[0].name == "Hidden"
                    ):
                        inside.add(id(item))
    if not inside:
        raise MutationError("no re-hiding effects found inside moves")

    def replace(candidate: LudemeTerm, original: LudemeTerm):
        if id(original) in inside:
            return None
        return candidate

    return _rebuild(root, replace)


def redirect_marker_target(
    root: LudemeTerm, new_target: int, occurrence: int = 0
) -> LudemeTerm:
    """Point the n-th ``(fromTo ...)`` at a different destination vertex.

    With a destination that is a terminal vertex carrying identical
    payoffs, this breaks only the state-pairing criterion.
    """
    target = _nth_term(root, lambda t: t.head == "fromTo", occurrence)

    def replace(candidate: LudemeTerm, original: LudemeTerm):
        if original is target:
            return LudemeTerm(
                "fromTo", (candidate.args[0], LudemeTerm("to", (new_target,)))
            )
        return candidate

    return _rebuild(root, replace)


def rename_ludeme(root: LudemeTerm, old: str, new: str, occurrence: int = 0) -> LudemeTerm:
    """Rename one term head, typically pushing the description out of the subset."""
    target = _nth_term(root, lambda t: t.head == old, occurrence)

    def replace(candidate: LudemeTerm, original: LudemeTerm):
        if original is target:
            return LudemeTerm(new, candidate.args, candidate.named)
        return candidate

    return _rebuild(root, replace)
