"""Read and write the ``.efg-tree`` game file format.

The format is line-oriented and parenthesized, one declaration per node,
with ``;`` comments and insignificant whitespace between tokens::

    (efg 1 (players 2))
    (chance 0 (1/2 -> 1) (1/2 -> 2))
    (decision 1 (mover 1) (children 3 4))
    (terminal 3 (payoffs 1 -1))
    (infoset 1 (1 2))

Grammar (EBNF)::

    document  = header , { declaration } ;
    header    = "(" , "efg" , integer , "(" , "players" , integer , ")" , ")" ;
    declaration
              = decision | chance | terminal | infoset ;
    decision  = "(" , "decision" , integer ,
                "(" , "mover" , integer , ")" ,
                "(" , "children" , integer , { integer } , ")" , ")" ;
    chance    = "(" , "chance" , integer , branch , { branch } , ")" ;
    branch    = "(" , rational , "->" , integer , ")" ;
    terminal  = "(" , "terminal" , integer ,
                "(" , "payoffs" , { payoff } , ")" , ")" ;
    infoset   = "(" , "infoset" , integer , group , { group } , ")" ;
    group     = "(" , integer , integer , { integer } , ")" ;
    rational  = integer , [ "/" , integer ] ;
    payoff    = [ "-" ] , digits , [ "." , digits ] ;

State ids must be the dense range 0..N-1 with 0 the root. Chance
probabilities are exact rationals whose sum per node must be exactly 1;
an integer is shorthand for a rational with denominator 1. Payoffs are
exact decimal literals. States omitted from every ``infoset`` declaration
sit in singleton information sets.

Serialization is canonical: structurally equal games produce byte-equal
documents, and ``parse_efg(serialize_efg(g))`` is structurally equal to g.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction

from .game import (
    MAX_PLAYERS,
    MAX_STATES,
    NATURE,
    EfgNode,
    ExtensiveFormGame,
    complete_partitions,
    validate_game,
)

FILE_EXTENSION = ".efg-tree"
FORMAT_VERSION = 1

_PAYOFF_RE = re.compile(r"-?[0-9]+(\.[0-9]+)?\Z")


class EfgFormatError(Exception):
    """Parse or well-formedness error with a source position."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"line {line}, column {column}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class _Token:
    kind: str  # lparen | rparen | arrow | word
    text: str
    line: int
    column: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    for lineno, line in enumerate(text.split("\n"), start=1):
        comment = line.find(";")
        if comment >= 0:
            line = line[:comment]
        column = 0
        length = len(line)
        while column < length:
            ch = line[column]
            if ch.isspace():
                column += 1
                continue
            if ch == "(":
                tokens.append(_Token("lparen", "(", lineno, column + 1))
                column += 1
                continue
            if ch == ")":
                tokens.append(_Token("rparen", ")", lineno, column + 1))
                column += 1
                continue
            if line.startswith("->", column):
                tokens.append(_Token("arrow", "->", lineno, column + 1))
                column += 2
                continue
            match = re.match(r"[A-Za-z0-9_./-]+", line[column:])
            if not match:
                raise EfgFormatError(f"unexpected character {ch!r}", lineno, column + 1)
            word = match.group(0)
            tokens.append(_Token("word", word, lineno, column + 1))
            column += len(word)
    return tokens


class _Reader:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.index = 0

    @property
    def exhausted(self) -> bool:
        return self.index >= len(self.tokens)

    def peek(self) -> _Token | None:
        return None if self.exhausted else self.tokens[self.index]

    def next(self, expected: str | None = None) -> _Token:
        if self.exhausted:
            last = self.tokens[-1] if self.tokens else None
            raise EfgFormatError(
                "unexpected end of document",
                last.line if last else 1,
                last.column if last else 1,
            )
        token = self.tokens[self.index]
        self.index += 1
        if expected and token.kind != expected:
            raise EfgFormatError(
                f"expected {expected}, found {token.text!r}", token.line, token.column
            )
        return token

    def expect_word(self, literal: str | None = None) -> _Token:
        token = self.next("word")
        if literal is not None and token.text != literal:
            raise EfgFormatError(
                f"expected {literal!r}, found {token.text!r}", token.line, token.column
            )
        return token

    def read_int(self, what: str) -> int:
        token = self.next("word")
        if not re.fullmatch(r"-?[0-9]+", token.text):
            raise EfgFormatError(
                f"expected {what} (integer), found {token.text!r}",
                token.line,
                token.column,
            )
        return int(token.text)

    def read_rational(self) -> Fraction:
        token = self.next("word")
        match = re.fullmatch(r"(-?[0-9]+)(?:/([0-9]+))?", token.text)
        if not match:
            raise EfgFormatError(
                f"malformed probability {token.text!r}", token.line, token.column
            )
        num = int(match.group(1))
        den = int(match.group(2)) if match.group(2) else 1
        if den == 0:
            raise EfgFormatError("probability denominator is zero", token.line, token.column)
        return Fraction(num, den)

    def read_payoff(self) -> Decimal:
        token = self.next("word")
        if not _PAYOFF_RE.match(token.text):
            raise EfgFormatError(
                f"malformed payoff literal {token.text!r}", token.line, token.column
            )
        return Decimal(token.text)


@dataclass
class EfgDocument:
    """Parsed declarations before they are assembled into a game."""

    version: int
    num_players: int
    nodes: dict[int, EfgNode] = field(default_factory=dict)
    infoset_groups: dict[int, list[tuple[int, ...]]] = field(default_factory=dict)


def _read_document(
    reader: _Reader, max_players: int, max_states: int
) -> EfgDocument:
    opening = reader.next("lparen")
    reader.expect_word("efg")
    version = reader.read_int("format version")
    if version != FORMAT_VERSION:
        raise EfgFormatError(
            f"unsupported format version {version}", opening.line, opening.column
        )
    reader.next("lparen")
    reader.expect_word("players")
    num_players = reader.read_int("player count")
    reader.next("rparen")
    reader.next("rparen")
    if num_players < 1:
        raise EfgFormatError("player count must be at least 1", opening.line, opening.column)
    if num_players > max_players:
        raise EfgFormatError(
            f"player count {num_players} exceeds cap {max_players}",
            opening.line,
            opening.column,
        )

    doc = EfgDocument(version, num_players)

    def declare(node: EfgNode, token: _Token) -> None:
        if node.id < 0:
            raise EfgFormatError(f"negative state id {node.id}", token.line, token.column)
        if node.id in doc.nodes:
            raise EfgFormatError(f"duplicate state id {node.id}", token.line, token.column)
        doc.nodes[node.id] = node
        if len(doc.nodes) > max_states:
            raise EfgFormatError(
                f"state count exceeds cap {max_states}", token.line, token.column
            )

    while not reader.exhausted:
        reader.next("lparen")
        keyword = reader.next("word")
        if keyword.text == "decision":
            state = reader.read_int("state id")
            reader.next("lparen")
            reader.expect_word("mover")
            mover = reader.read_int("mover")
            reader.next("rparen")
            if not 1 <= mover <= num_players:
                raise EfgFormatError(
                    f"state {state}: mover {mover} out of range 1..{num_players}"
                    " (use a chance declaration for nature)",
                    keyword.line,
                    keyword.column,
                )
            reader.next("lparen")
            reader.expect_word("children")
            children: list[int] = []
            while reader.peek() and reader.peek().kind == "word":
                children.append(reader.read_int("child id"))
            reader.next("rparen")
            reader.next("rparen")
            if not children:
                raise EfgFormatError(
                    f"state {state}: decision node needs at least one child",
                    keyword.line,
                    keyword.column,
                )
            declare(EfgNode(state, mover, tuple(children)), keyword)
        elif keyword.text == "chance":
            state = reader.read_int("state id")
            children = []
            probs: list[Fraction] = []
            while reader.peek() and reader.peek().kind == "lparen":
                reader.next("lparen")
                probs.append(reader.read_rational())
                reader.next("arrow")
                children.append(reader.read_int("child id"))
                reader.next("rparen")
            reader.next("rparen")
            if not children:
                raise EfgFormatError(
                    f"state {state}: chance node needs at least one branch",
                    keyword.line,
                    keyword.column,
                )
            if any(p <= 0 for p in probs):
                raise EfgFormatError(
                    f"state {state}: chance probabilities must be positive",
                    keyword.line,
                    keyword.column,
                )
            total = sum(probs, Fraction(0))
            if total != 1:
                raise EfgFormatError(
                    f"state {state}: distribution sums to {total} != 1",
                    keyword.line,
                    keyword.column,
                )
            declare(EfgNode(state, NATURE, tuple(children), tuple(probs)), keyword)
        elif keyword.text == "terminal":
            state = reader.read_int("state id")
            reader.next("lparen")
            reader.expect_word("payoffs")
            payoffs: list[Decimal] = []
            while reader.peek() and reader.peek().kind == "word":
                payoffs.append(reader.read_payoff())
            reader.next("rparen")
            reader.next("rparen")
            if len(payoffs) != num_players:
                raise EfgFormatError(
                    f"state {state}: expected {num_players} payoffs, found {len(payoffs)}",
                    keyword.line,
                    keyword.column,
                )
            declare(EfgNode(state, payoffs=tuple(payoffs)), keyword)
        elif keyword.text == "infoset":
            player = reader.read_int("player")
            if not 1 <= player <= num_players:
                raise EfgFormatError(
                    f"infoset player {player} out of range 1..{num_players}",
                    keyword.line,
                    keyword.column,
                )
            groups = doc.infoset_groups.setdefault(player, [])
            saw_group = False
            while reader.peek() and reader.peek().kind == "lparen":
                reader.next("lparen")
                members: list[int] = []
                while reader.peek() and reader.peek().kind == "word":
                    members.append(reader.read_int("state id"))
                reader.next("rparen")
                groups.append(tuple(members))
                saw_group = True
            reader.next("rparen")
            if not saw_group:
                raise EfgFormatError(
                    "infoset declaration needs at least one group",
                    keyword.line,
                    keyword.column,
                )
        else:
            raise EfgFormatError(
                f"unknown keyword {keyword.text!r}", keyword.line, keyword.column
            )
    return doc


def _assemble(doc: EfgDocument) -> ExtensiveFormGame:
    n = len(doc.nodes)
    if 0 not in doc.nodes:
        raise EfgFormatError("no state with id 0 (the root) is declared")
    missing = [i for i in range(n) if i not in doc.nodes]
    if missing:
        raise EfgFormatError(
            f"state ids must be dense 0..{n - 1}; missing {missing[:5]}"
        )
    for node in doc.nodes.values():
        for child in node.children:
            if child not in doc.nodes:
                raise EfgFormatError(
                    f"state {node.id} references undeclared state {child}"
                )
    try:
        partitions = complete_partitions(n, doc.num_players, doc.infoset_groups)
    except ValueError as exc:
        raise EfgFormatError(str(exc)) from exc
    game = ExtensiveFormGame(
        doc.num_players,
        tuple(doc.nodes[i] for i in range(n)),
        partitions,
    )
    report = validate_game(game)
    if not report.ok:
        raise EfgFormatError("; ".join(report.violations))
    return game


def parse_efg(
    text: str,
    *,
    max_players: int = MAX_PLAYERS,
    max_states: int = MAX_STATES,
) -> ExtensiveFormGame:
    """Parse an ``.efg-tree`` document into a validated game.

    Errors carry line and column of the offending token where available.
    The caps exist to fail fast on pathological inputs; the defaults are
    the format limits (100 players, 1,000,000 states).
    """
    tokens = _tokenize(text)
    if not tokens:
        raise EfgFormatError("empty document", 1, 1)
    reader = _Reader(tokens)
    doc = _read_document(reader, max_players, max_states)
    return _assemble(doc)


def _format_fraction(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def serialize_efg(game: ExtensiveFormGame) -> str:
    """Render a game as its canonical ``.efg-tree`` document.

    Nodes appear in ascending id order; only non-singleton information sets
    are written, per player, ordered by smallest member. Structural equality
    of games implies byte equality of documents.
    """
    lines = [f"(efg {FORMAT_VERSION} (players {game.num_players}))"]
    for node in game.nodes:
        if node.is_terminal:
            payoffs = " ".join(str(p) for p in node.payoffs)
            lines.append(f"(terminal {node.id} (payoffs {payoffs}))")
        elif node.is_chance:
            branches = " ".join(
                f"({_format_fraction(prob)} -> {child})"
                for prob, child in zip(node.chance_probs, node.children)
            )
            lines.append(f"(chance {node.id} {branches})")
        else:
            children = " ".join(str(c) for c in node.children)
            lines.append(
                f"(decision {node.id} (mover {node.mover}) (children {children}))"
            )
    for player in range(1, game.num_players + 1):
        for part in game.information_sets[player - 1]:
            if len(part) > 1:
                members = " ".join(str(s) for s in part)
                lines.append(f"(infoset {player} ({members}))")
    return "\n".join(lines) + "\n"
