"""Lexer, parser, and subset validation for compiled game descriptions.

Only the closed construction subset is accepted; anything else is rejected
with a diagnostic naming the offending ludeme. Keeping the language this
small is deliberate: "does it parse" then means "does it stay inside the
constructs whose semantics the interpreter defines".

Grammar (EBNF)::

    description = term ;
    term        = "(" , identifier , { argument } , ")" ;
    argument    = term | arrayval | scalar | named ;
    named       = identifier , ":" , ( term | arrayval | scalar ) ;
    arrayval    = "{" , { argument } , "}" ;
    scalar      = integer | decimal | string | identifier ;
    integer     = [ "-" ] , digits ;
    decimal     = [ "-" ] , digits , "." , digits ;
    string      = '"' , { any character except '"' } , '"' ;
    identifier  = letter , { letter | digit | "_" } ;

Accepted term shapes (head keywords are a closed set)::

    (game "Name" (players k) (equipment { ... }) (rules ...))
    (piece "Marker" Neutral) | (piece "Marker" Each) | (piece <int>)
    (board (graph vertices:{ <int> ... } edges:{ {<int> <int>} ... }))
    (regions "Name" { <int> ... })
    (rules (start { ... }) (play ...) (end { ... }))
    (place "Marker<p>" <vertex>)
    (set Hidden (sites "Name") to:All)
    (set Hidden (sites "Name") to:(player <p>))
    (set NextPlayer (player <p>))
    (if (= (where "Marker" Neutral) <vertex>) <moves> [<moves>])   in play
    (or { <move> ... }) | (random { <weight> ... } { <move> ... })
    (move Select (from <int>) (then (and { <effect> ... })))
    (fromTo (from <vertex>) (to <vertex>))
    (remove (sites Occupied by:P<p>))
    (add (piece <p>) (to (sites "Name")))
    (if <condition> (payoffs { (payoff P<p> <number>) ... }))      in end
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from decimal import Decimal

from .ludemes import Array, Argument, LudemeTerm, Symbol

KEYWORDS = frozenset(
    {
        "game",
        "players",
        "equipment",
        "piece",
        "board",
        "graph",
        "regions",
        "rules",
        "start",
        "place",
        "set",
        "play",
        "if",
        "=",
        "where",
        "or",
        "random",
        "move",
        "from",
        "to",
        "then",
        "and",
        "fromTo",
        "remove",
        "add",
        "sites",
        "end",
        "payoffs",
        "payoff",
        "player",
    }
)


class LgdlError(Exception):
    """Parse or subset violation; carries a source position when known."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"line {line}, column {column}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class _Token:
    kind: str  # lparen rparen lbrace rbrace string int decimal ident name eq
    text: str
    line: int
    column: int


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<lparen>\()
  | (?P<rparen>\))
  | (?P<lbrace>\{)
  | (?P<rbrace>\})
  | (?P<string>"[^"\n]*")
  | (?P<decimal>-?[0-9]+\.[0-9]+)
  | (?P<int>-?[0-9]+)
  | (?P<name>[A-Za-z][A-Za-z0-9_]*:)
  | (?P<ident>[A-Za-z][A-Za-z0-9_]*)
  | (?P<eq>=)
    """,
    re.VERBOSE,
)


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    line = 1
    line_start = 0
    index = 0
    length = len(text)
    while index < length:
        match = _TOKEN_RE.match(text, index)
        if not match:
            raise LgdlError(
                f"unexpected character {text[index]!r}", line, index - line_start + 1
            )
        kind = match.lastgroup
        lexeme = match.group(0)
        if kind != "ws":
            tokens.append(_Token(kind, lexeme, line, index - line_start + 1))
        newlines = lexeme.count("\n")
        if newlines:
            line += newlines
            line_start = index + lexeme.rfind("\n") + 1
        index = match.end()
    return tokens


def parse_term_text(text: str) -> LudemeTerm:
    """Parse one top-level term; purely structural, no subset checks."""
    tokens = _tokenize(text)
    if not tokens:
        raise LgdlError("empty description", 1, 1)

    # Builders on the stack: [is_array, payload...]. Term builders carry
    # (head, pos, args, named, pending_name); array builders carry items.
    term_stack: list[dict] = []
    root: LudemeTerm | None = None

    def attach(value: Argument, token: _Token) -> None:
        nonlocal root
        if not term_stack:
            if root is not None:
                raise LgdlError("content after the top-level term", token.line, token.column)
            if not isinstance(value, LudemeTerm):
                raise LgdlError("description must be a single term", token.line, token.column)
            root = value
            return
        top = term_stack[-1]
        if top["kind"] == "array":
            top["items"].append(value)
        else:
            pending = top.pop("pending_name", None)
            if pending is not None:
                top["named"].append((pending, value))
            else:
                top["args"].append(value)

    index = 0
    while index < len(tokens):
        token = tokens[index]
        index += 1
        if token.kind == "lparen":
            if index >= len(tokens) or tokens[index].kind not in ("ident", "eq"):
                raise LgdlError("expected a ludeme name after '('", token.line, token.column)
            head = tokens[index]
            index += 1
            term_stack.append(
                {
                    "kind": "term",
                    "head": head.text,
                    "pos": (head.line, head.column),
                    "args": [],
                    "named": [],
                }
            )
        elif token.kind == "rparen":
            if not term_stack or term_stack[-1]["kind"] != "term":
                raise LgdlError("unmatched ')'", token.line, token.column)
            top = term_stack.pop()
            if top.get("pending_name"):
                raise LgdlError(
                    f"named argument {top['pending_name']}: has no value",
                    token.line,
                    token.column,
                )
            value = LudemeTerm(
                top["head"], tuple(top["args"]), tuple(top["named"]), pos=top["pos"]
            )
            attach(value, token)
        elif token.kind == "lbrace":
            if not term_stack:
                raise LgdlError("array outside any term", token.line, token.column)
            term_stack.append({"kind": "array", "items": []})
        elif token.kind == "rbrace":
            if not term_stack or term_stack[-1]["kind"] != "array":
                raise LgdlError("unmatched '}'", token.line, token.column)
            top = term_stack.pop()
            attach(Array(tuple(top["items"])), token)
        elif token.kind == "name":
            if not term_stack or term_stack[-1]["kind"] != "term":
                raise LgdlError(
                    "named arguments are only allowed inside terms",
                    token.line,
                    token.column,
                )
            if term_stack[-1].get("pending_name"):
                raise LgdlError("two named-argument markers in a row", token.line, token.column)
            term_stack[-1]["pending_name"] = token.text[:-1]
        elif token.kind == "string":
            attach(token.text[1:-1], token)
        elif token.kind == "int":
            attach(int(token.text), token)
        elif token.kind == "decimal":
            attach(Decimal(token.text), token)
        elif token.kind in ("ident", "eq"):
            attach(Symbol(token.text), token)
        else:  # pragma: no cover - the tokenizer emits no other kinds
            raise LgdlError(f"unhandled token {token.text!r}", token.line, token.column)

    if term_stack:
        last = tokens[-1]
        raise LgdlError("unexpected end of input: unclosed term", last.line, last.column)
    if root is None:
        raise LgdlError("no term found", 1, 1)
    return root


def _pos(node: LudemeTerm) -> str:
    if node.pos:
        return f" (line {node.pos[0]}, column {node.pos[1]})"
    return ""


class _SubsetChecker:
    """Collects every subset violation in one walk of the term tree."""

    def __init__(self) -> None:
        self.problems: list[str] = []

    def fail(self, node: LudemeTerm, message: str) -> None:
        self.problems.append(message + _pos(node))

    def unsupported(self, node: LudemeTerm) -> None:
        self.fail(node, f"unsupported ludeme: {node.head}")

    # -- helpers -------------------------------------------------------

    def _args(self, node: LudemeTerm, count: int, allow_named: bool = False) -> bool:
        if len(node.args) != count or (node.named and not allow_named):
            self.fail(node, f"malformed ({node.head} ...): wrong argument shape")
            return False
        return True

    def _int_array(self, node: LudemeTerm, value: Argument, what: str) -> bool:
        if not isinstance(value, Array) or not all(
            isinstance(item, int) for item in value.items
        ):
            self.fail(node, f"{what} must be a brace list of integers")
            return False
        return True

    def _expect_term(self, node: LudemeTerm, value: Argument, head: str) -> LudemeTerm | None:
        if isinstance(value, LudemeTerm) and value.head == head:
            return value
        self.fail(node, f"({node.head} ...) expects a ({head} ...) argument")
        return None

    # -- constructs ----------------------------------------------------

    def check_game(self, node: LudemeTerm) -> None:
        if node.head != "game":
            self.fail(node, f"top-level term must be (game ...), found ({node.head} ...)")
            return
        if len(node.args) != 4 or node.named:
            self.fail(node, "(game ...) needs a name, players, equipment, and rules")
            return
        name, players, equipment, rules = node.args
        if not isinstance(name, str):
            self.fail(node, "game name must be a quoted string")
        if isinstance(players, LudemeTerm) and players.head == "players":
            if not (
                self._args(players, 1)
                and isinstance(players.args[0], int)
                and players.args[0] >= 1
            ):
                self.fail(players, "(players ...) takes one positive integer")
        else:
            self.fail(node, "(game ...) second argument must be (players k)")
        if isinstance(equipment, LudemeTerm) and equipment.head == "equipment":
            self.check_equipment(equipment)
        else:
            self.fail(node, "(game ...) third argument must be (equipment { ... })")
        if isinstance(rules, LudemeTerm) and rules.head == "rules":
            self.check_rules(rules)
        else:
            self.fail(node, "(game ...) fourth argument must be (rules ...)")

    def check_equipment(self, node: LudemeTerm) -> None:
        if not self._args(node, 1) or not isinstance(node.args[0], Array):
            self.fail(node, "(equipment ...) takes a single brace list")
            return
        for item in node.args[0].items:
            if not isinstance(item, LudemeTerm):
                self.fail(node, "equipment entries must be terms")
                continue
            if item.head == "piece":
                self.check_piece_declaration(item)
            elif item.head == "board":
                self.check_board(item)
            elif item.head == "regions":
                if not (
                    self._args(item, 2)
                    and isinstance(item.args[0], str)
                    and self._int_array(item, item.args[1], "region membership")
                ):
                    self.fail(item, '(regions "Name" { ... }) is malformed')
            else:
                self.unsupported(item)

    def check_piece_declaration(self, node: LudemeTerm) -> None:
        ok = (
            len(node.args) == 2
            and not node.named
            and isinstance(node.args[0], str)
            and isinstance(node.args[1], Symbol)
            and node.args[1].name in ("Neutral", "Each")
        )
        if not ok:
            self.fail(node, '(piece ...) must be (piece "Marker" Neutral|Each)')

    def check_board(self, node: LudemeTerm) -> None:
        if not self._args(node, 1):
            return
        graph = node.args[0]
        if not isinstance(graph, LudemeTerm) or graph.head != "graph":
            if isinstance(graph, LudemeTerm):
                self.unsupported(graph)
            else:
                self.fail(node, "(board ...) expects a (graph ...) argument")
            return
        named = dict(graph.named)
        if graph.args or set(named) != {"vertices", "edges"}:
            self.fail(graph, "(graph ...) needs vertices:{...} and edges:{...}")
            return
        self._int_array(graph, named["vertices"], "graph vertices")
        edges = named["edges"]
        if not isinstance(edges, Array):
            self.fail(graph, "graph edges must be a brace list of vertex pairs")
            return
        for edge in edges.items:
            if not (
                isinstance(edge, Array)
                and len(edge.items) == 2
                and all(isinstance(v, int) for v in edge.items)
            ):
                self.fail(graph, "each graph edge must be a pair {a b}")
                break

    def check_rules(self, node: LudemeTerm) -> None:
        if len(node.args) != 3 or node.named:
            self.fail(node, "(rules ...) needs start, play, and end sections")
            return
        start, play, end = node.args
        if isinstance(start, LudemeTerm) and start.head == "start":
            self.check_start(start)
        else:
            self.fail(node, "(rules ...) first section must be (start { ... })")
        if isinstance(play, LudemeTerm) and play.head == "play":
            if self._args(play, 1):
                self.check_move_generator(play, play.args[0], top=True)
        else:
            self.fail(node, "(rules ...) second section must be (play ...)")
        if isinstance(end, LudemeTerm) and end.head == "end":
            self.check_end(end)
        else:
            self.fail(node, "(rules ...) third section must be (end { ... })")

    def check_start(self, node: LudemeTerm) -> None:
        if not self._args(node, 1) or not isinstance(node.args[0], Array):
            self.fail(node, "(start ...) takes a single brace list")
            return
        for item in node.args[0].items:
            if not isinstance(item, LudemeTerm):
                self.fail(node, "start statements must be terms")
            elif item.head == "place":
                if not (
                    self._args(item, 2)
                    and isinstance(item.args[0], str)
                    and re.fullmatch(r"Marker[0-9]+", item.args[0])
                    and isinstance(item.args[1], int)
                ):
                    self.fail(item, '(place ...) must be (place "Marker<p>" <vertex>)')
            elif item.head == "set":
                self.check_set_hidden(item)
            else:
                self.unsupported(item)

    def check_set_hidden(self, node: LudemeTerm) -> None:
        named = dict(node.named)
        ok = (
            len(node.args) == 2
            and isinstance(node.args[0], Symbol)
            and node.args[0].name == "Hidden"
            and set(named) == {"to"}
        )
        if ok:
            sites = node.args[1]
            ok = (
                isinstance(sites, LudemeTerm)
                and sites.head == "sites"
                and len(sites.args) == 1
                and not sites.named
                and isinstance(sites.args[0], str)
            )
        if ok:
            target = named["to"]
            if isinstance(target, Symbol):
                ok = target.name == "All"
            else:
                ok = self._is_player_term(target)
        if not ok:
            self.fail(node, '(set Hidden (sites "Name") to:All|(player p)) is malformed')

    def _is_player_term(self, value: Argument) -> bool:
        return (
            isinstance(value, LudemeTerm)
            and value.head == "player"
            and len(value.args) == 1
            and not value.named
            and isinstance(value.args[0], int)
        )

    def check_condition(self, node: LudemeTerm, value: Argument) -> None:
        cond = self._expect_term(node, value, "=")
        if cond is None:
            return
        ok = len(cond.args) == 2 and not cond.named and isinstance(cond.args[1], int)
        if ok:
            where = cond.args[0]
            ok = (
                isinstance(where, LudemeTerm)
                and where.head == "where"
                and len(where.args) == 2
                and not where.named
                and where.args[0] == "Marker"
                and isinstance(where.args[1], Symbol)
                and where.args[1].name == "Neutral"
            )
        if not ok:
            self.fail(node, 'condition must be (= (where "Marker" Neutral) <vertex>)')

    def check_move_generator(self, parent: LudemeTerm, value: Argument, top: bool) -> None:
        """A play-side generator: an if chain, (or { ... }), or (random ...)."""
        stack: list[Argument] = [value]
        while stack:
            gen = stack.pop()
            if not isinstance(gen, LudemeTerm):
                self.fail(parent, "move generator must be a term")
                continue
            if gen.head == "if":
                if len(gen.args) not in (2, 3) or gen.named:
                    self.fail(gen, "(if ...) in play takes a condition and 1 or 2 branches")
                    continue
                self.check_condition(gen, gen.args[0])
                stack.extend(gen.args[1:])
            elif gen.head == "or":
                if self._args(gen, 1) and isinstance(gen.args[0], Array):
                    for move in gen.args[0].items:
                        self.check_move(gen, move)
                else:
                    self.fail(gen, "(or ...) takes a single brace list of moves")
            elif gen.head == "random":
                self.check_random(gen)
            else:
                self.unsupported(gen)

    def check_random(self, node: LudemeTerm) -> None:
        if len(node.args) != 2 or node.named:
            self.fail(node, "(random ...) takes a weight list and a move list")
            return
        weights, moves = node.args
        if not self._int_array(node, weights, "random weights"):
            return
        if not isinstance(moves, Array):
            self.fail(node, "(random ...) second argument must be a brace list")
            return
        if not weights.items:
            self.fail(node, "(random ...) needs at least one branch")
        if any(w <= 0 for w in weights.items):
            self.fail(node, "random weights must be positive integers")
        if len(weights.items) != len(moves.items):
            self.fail(node, "(random ...) weight and move counts differ")
        for move in moves.items:
            self.check_move(node, move)

    def check_move(self, parent: LudemeTerm, value: Argument) -> None:
        if not isinstance(value, LudemeTerm) or value.head != "move":
            self.fail(parent, "expected a (move ...) term")
            return
        node = value
        if len(node.args) != 3 or node.named:
            self.fail(node, "(move ...) must be (move Select (from n) (then ...))")
            return
        kind, source, then = node.args
        if not isinstance(kind, Symbol) or kind.name != "Select":
            label = kind.name if isinstance(kind, Symbol) else repr(kind)
            self.fail(node, f"unsupported ludeme: {label}")
            return
        if not (
            isinstance(source, LudemeTerm)
            and source.head == "from"
            and len(source.args) == 1
            and isinstance(source.args[0], int)
        ):
            self.fail(node, "(move Select ...) needs (from <int>)")
        if not (
            isinstance(then, LudemeTerm)
            and then.head == "then"
            and len(then.args) == 1
            and isinstance(then.args[0], LudemeTerm)
            and then.args[0].head == "and"
        ):
            self.fail(node, "(move Select ...) needs (then (and { ... }))")
            return
        and_node = then.args[0]
        if not (self._args(and_node, 1) and isinstance(and_node.args[0], Array)):
            self.fail(and_node, "(and ...) takes a single brace list of effects")
            return
        for effect in and_node.args[0].items:
            self.check_effect(and_node, effect)

    def check_effect(self, parent: LudemeTerm, value: Argument) -> None:
        if not isinstance(value, LudemeTerm):
            self.fail(parent, "move effects must be terms")
            return
        node = value
        if node.head == "fromTo":
            ok = (
                len(node.args) == 2
                and not node.named
                and all(
                    isinstance(part, LudemeTerm)
                    and part.head == expected
                    and len(part.args) == 1
                    and not part.named
                    and isinstance(part.args[0], int)
                    for part, expected in zip(node.args, ("from", "to"))
                )
            )
            if not ok:
                self.fail(node, "(fromTo ...) must be (fromTo (from i) (to j))")
        elif node.head == "remove":
            ok = len(node.args) == 1 and not node.named
            if ok:
                sites = node.args[0]
                named = dict(sites.named) if isinstance(sites, LudemeTerm) else {}
                ok = (
                    isinstance(sites, LudemeTerm)
                    and sites.head == "sites"
                    and len(sites.args) == 1
                    and isinstance(sites.args[0], Symbol)
                    and sites.args[0].name == "Occupied"
                    and set(named) == {"by"}
                    and isinstance(named["by"], Symbol)
                    and re.fullmatch(r"P[0-9]+", named["by"].name)
                )
            if not ok:
                self.fail(node, "(remove ...) must be (remove (sites Occupied by:P<p>))")
        elif node.head == "add":
            ok = len(node.args) == 2 and not node.named
            if ok:
                piece, target = node.args
                ok = (
                    isinstance(piece, LudemeTerm)
                    and piece.head == "piece"
                    and len(piece.args) == 1
                    and not piece.named
                    and isinstance(piece.args[0], int)
                )
                ok = ok and (
                    isinstance(target, LudemeTerm)
                    and target.head == "to"
                    and len(target.args) == 1
                    and not target.named
                    and isinstance(target.args[0], LudemeTerm)
                    and target.args[0].head == "sites"
                    and len(target.args[0].args) == 1
                    and isinstance(target.args[0].args[0], str)
                )
            if not ok:
                self.fail(node, '(add ...) must be (add (piece p) (to (sites "Name")))')
        elif node.head == "set":
            if node.args and isinstance(node.args[0], Symbol) and node.args[0].name == "NextPlayer":
                ok = (
                    len(node.args) == 2
                    and not node.named
                    and self._is_player_term(node.args[1])
                )
                if not ok:
                    self.fail(node, "(set NextPlayer ...) must be (set NextPlayer (player p))")
            else:
                self.check_set_hidden(node)
        else:
            self.unsupported(node)

    def check_end(self, node: LudemeTerm) -> None:
        if not self._args(node, 1) or not isinstance(node.args[0], Array):
            self.fail(node, "(end ...) takes a single brace list of clauses")
            return
        for clause in node.args[0].items:
            if not isinstance(clause, LudemeTerm) or clause.head != "if":
                self.fail(node, "end clauses must be (if <condition> (payoffs { ... }))")
                continue
            if len(clause.args) != 2 or clause.named:
                self.fail(clause, "end (if ...) takes a condition and a payoffs term")
                continue
            self.check_condition(clause, clause.args[0])
            payoffs = clause.args[1]
            if not (
                isinstance(payoffs, LudemeTerm)
                and payoffs.head == "payoffs"
                and len(payoffs.args) == 1
                and not payoffs.named
                and isinstance(payoffs.args[0], Array)
            ):
                if isinstance(payoffs, LudemeTerm) and payoffs.head not in KEYWORDS:
                    self.unsupported(payoffs)
                else:
                    self.fail(clause, "end clause needs (payoffs { ... })")
                continue
            for entry in payoffs.args[0].items:
                ok = (
                    isinstance(entry, LudemeTerm)
                    and entry.head == "payoff"
                    and len(entry.args) == 2
                    and not entry.named
                    and isinstance(entry.args[0], Symbol)
                    and re.fullmatch(r"P[0-9]+", entry.args[0].name)
                    and isinstance(entry.args[1], (int, Decimal))
                )
                if not ok:
                    self.fail(payoffs, "payoff entries must be (payoff P<p> <number>)")


def subset_violations(root: LudemeTerm) -> list[str]:
    """Every way ``root`` steps outside the construction subset.

    Shape problems are reported by the structured walk; any term whose head
    is not in the closed keyword set is reported as an unsupported ludeme,
    wherever it appears.
    """
    checker = _SubsetChecker()
    checker.check_game(root)
    from .ludemes import iter_terms

    seen = set(checker.problems)
    for node in iter_terms(root):
        if node.head not in KEYWORDS:
            message = f"unsupported ludeme: {node.head}" + _pos(node)
            if message not in seen:
                checker.problems.append(message)
                seen.add(message)
    return checker.problems
