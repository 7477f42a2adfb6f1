"""Structured ludeme terms and their canonical text rendering.

A term is ``(head arg ... name:value ...)``. Arguments are nested terms,
brace arrays, bare symbols (``Select``, ``Neutral``, ``P1``), quoted
strings, integers, or exact decimals. Rendering is a pure function of the
structure, so structurally equal terms always produce byte-identical text.

Layout rules: a term whose subtree contains no array-of-terms renders on
one line; otherwise leading simple arguments stay on the head line, each
remaining argument gets its own line, and term arrays hug their braces
(``(start {`` ... ``})``). Rendering and traversal are iterative, so deep
nesting (chained else branches in particular) never hits the recursion
limit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import Decimal
from typing import Iterator, Union

_INDENT = "  "
_MAX_INDENT_LEVELS = 24  # deep rule chains stop indenting here to bound line width


@dataclass(frozen=True)
class Symbol:
    """A bare identifier argument such as ``Select`` or ``P1``."""

    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Array:
    """A brace-delimited ordered argument list."""

    items: tuple["Argument", ...]

    def __len__(self) -> int:
        return len(self.items)


@dataclass(frozen=True)
class LudemeTerm:
    """One parenthesized term with positional and named arguments."""

    head: str
    args: tuple["Argument", ...] = ()
    named: tuple[tuple[str, "Argument"], ...] = ()
    pos: tuple[int, int] | None = field(default=None, compare=False, repr=False)


Argument = Union[LudemeTerm, Array, Symbol, str, int, Decimal]


def term(head: str, *args: Argument, **named: Argument) -> LudemeTerm:
    """Convenience constructor; keyword order becomes named-argument order."""
    return LudemeTerm(head, tuple(args), tuple(named.items()))


def array(*items: Argument) -> Array:
    return Array(tuple(items))


def iter_terms(root: LudemeTerm) -> Iterator[LudemeTerm]:
    """Pre-order iteration over every term in the tree (document order)."""
    stack: list[Argument] = [root]
    while stack:
        node = stack.pop()
        children: list[Argument] = []
        if isinstance(node, LudemeTerm):
            yield node
            children.extend(node.args)
            children.extend(value for _, value in node.named)
        elif isinstance(node, Array):
            children.extend(node.items)
        stack.extend(reversed(children))


def _scalar_token(value: Argument) -> str:
    if isinstance(value, Symbol):
        return value.name
    if isinstance(value, str):
        return f'"{value}"'
    if isinstance(value, bool):
        raise TypeError("booleans are not ludeme arguments")
    if isinstance(value, (int, Decimal)):
        return str(value)
    raise TypeError(f"not a scalar ludeme argument: {value!r}")


def _compute_simple(root: Argument) -> dict[int, bool]:
    """Bottom-up map id(node) -> 'renders inline' for terms and arrays.

    A node is simple unless its subtree contains an array holding a term.
    """
    simple: dict[int, bool] = {}
    stack: list[tuple[Argument, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if not isinstance(node, (LudemeTerm, Array)):
            continue
        if isinstance(node, LudemeTerm):
            children = list(node.args) + [value for _, value in node.named]
        else:
            children = list(node.items)
        if not expanded:
            stack.append((node, True))
            stack.extend((child, False) for child in children)
            continue
        ok = all(
            simple.get(id(child), True)
            for child in children
            if isinstance(child, (LudemeTerm, Array))
        )
        if isinstance(node, Array) and any(
            isinstance(item, LudemeTerm) for item in node.items
        ):
            ok = False
        simple[id(node)] = ok
    return simple


def _render_inline(root: Argument, out: list[str]) -> None:
    """Append a single-line rendering of ``root`` to ``out`` (iterative)."""
    stack: list[Argument | str] = [root]
    while stack:
        node = stack.pop()
        if isinstance(node, str) and not isinstance(node, Symbol):
            # Either a raw text fragment pushed by this function or a quoted
            # string argument; fragments are marked by starting with \x00.
            if node.startswith("\x00"):
                out.append(node[1:])
            else:
                out.append(f'"{node}"')
            continue
        if isinstance(node, LudemeTerm):
            out.append(f"({node.head}")
            stack.append("\x00)")
            pieces: list[Argument | str] = []
            for value in node.args:
                pieces.append("\x00 ")
                pieces.append(value)
            for name, value in node.named:
                pieces.append(f"\x00 {name}:")
                pieces.append(value)
            stack.extend(reversed(pieces))
        elif isinstance(node, Array):
            if not node.items:
                out.append("{}")
                continue
            out.append("{ ")
            stack.append("\x00 }")
            pieces = []
            for index, item in enumerate(node.items):
                if index:
                    pieces.append("\x00 ")
                pieces.append(item)
            stack.extend(reversed(pieces))
        else:
            out.append(_scalar_token(node))


def render(root: LudemeTerm) -> str:
    """Canonical multi-line rendering of a term tree."""
    simple = _compute_simple(root)
    out: list[str] = []
    # Work items: ("node", value, indent) renders a value at its own position;
    # ("text", fragment, _) appends raw text.
    stack: list[tuple[str, object, int]] = [("node", root, 0)]
    while stack:
        kind, payload, indent = stack.pop()
        if kind == "text":
            out.append(payload)  # type: ignore[arg-type]
            continue
        node = payload
        pad = _INDENT * min(indent, _MAX_INDENT_LEVELS)
        if not isinstance(node, (LudemeTerm, Array)) or simple.get(id(node), True):
            _render_inline(node, out)  # type: ignore[arg-type]
            continue
        if isinstance(node, Array):
            out.append("{")
            stack.append(("text", "\n" + pad + "}", 0))
            items: list[tuple[str, object, int]] = []
            child_pad = _INDENT * min(indent + 1, _MAX_INDENT_LEVELS)
            for item in node.items:
                items.append(("text", "\n" + child_pad, 0))
                items.append(("node", item, indent + 1))
            stack.extend(reversed(items))
            continue
        # Multi-line term: keep leading simple arguments on the head line.
        out.append(f"({node.head}")
        entries: list[tuple[str | None, Argument]] = [
            (None, value) for value in node.args
        ]
        entries.extend(node.named)
        split = 0
        while split < len(entries):
            name, value = entries[split]
            if isinstance(value, (LudemeTerm, Array)) and not simple.get(id(value), True):
                break
            prefix = f" {name}:" if name else " "
            out.append(prefix)
            _render_inline(value, out)
            split += 1
        tail: list[tuple[str, object, int]] = []
        child_pad = _INDENT * min(indent + 1, _MAX_INDENT_LEVELS)
        for name, value in entries[split:]:
            multiline = isinstance(value, (LudemeTerm, Array)) and not simple.get(
                id(value), True
            )
            if isinstance(value, Array) and multiline:
                # Brace hugs the current line; items indent one level.
                tail.append(("text", f" {name}:" if name else " ", 0))
                tail.append(("node", value, indent))
            elif multiline:
                tail.append(("text", "\n" + child_pad + (f"{name}:" if name else ""), 0))
                tail.append(("node", value, indent + 1))
            else:
                tail.append(("text", "\n" + child_pad + (f"{name}:" if name else ""), 0))
                tail.append(("node", value, indent + 1))
        tail.append(("text", ")", 0))
        stack.extend(reversed(tail))
    return "".join(out)
