"""Command-line pipeline: compile, verify, simulate, info, and gen.

Exit codes: 0 success, 1 verification failure, 2 input or parse error,
3 internal invariant violation. All randomness flows from --seed (or the
EFG2LUDII_SEED environment variable; default 0), so repeated runs with the
same inputs produce byte-identical output.
"""

from __future__ import annotations

import argparse
import os
import sys
from fractions import Fraction
from pathlib import Path

from .checker import (
    check_equivalence,
    check_indistinguishability,
    statistical_playout_check,
)
from .efg_text import EfgFormatError, parse_efg, serialize_efg
from .emitter import CompileError, compile_game, sanitize_name
from .game import (
    NATURE,
    ExtensiveFormGame,
    enumerate_trajectories,
    relabel_first_mover,
)
from .generator import GeneratorConfig, generate_game
from .interpreter import InterpreterError, parse_lgdl, playout
from .lgdl import LgdlError
from .rng import SplitMix64

EXIT_OK = 0
EXIT_VERIFICATION_FAILED = 1
EXIT_INPUT_ERROR = 2
EXIT_INTERNAL_ERROR = 3

DEFAULT_SEED = 0
SEED_ENV_VAR = "EFG2LUDII_SEED"


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="efg2ludii",
        description=(
            "Compile extensive-form game trees (.efg-tree) into a Ludii-style"
            " description subset (.lud), verify the equivalence criteria, and"
            " run reproducible playouts."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, *, infile=False, outfile=False) -> None:
        if infile:
            p.add_argument("--in", dest="input", required=True, help="input file")
        if outfile:
            p.add_argument("--out", dest="output", help="output file")
        p.add_argument(
            "--seed",
            type=int,
            default=None,
            help=f"random seed (default: ${SEED_ENV_VAR} or {DEFAULT_SEED})",
        )
        p.add_argument("--quiet", action="store_true", help="suppress progress chatter")

    p = sub.add_parser("compile", help="compile an .efg-tree file to a .lud file")
    common(p, infile=True, outfile=True)

    p = sub.add_parser(
        "verify",
        help="compile (or read --out) and check every equivalence criterion",
    )
    common(p, infile=True, outfile=True)
    p.add_argument(
        "--n",
        dest="playouts",
        type=int,
        default=0,
        help="additionally run this many playouts as a statistical cross-check",
    )
    p.add_argument(
        "--tolerance",
        type=float,
        default=3.0,
        help="statistical tolerance in binomial standard deviations (default 3)",
    )

    p = sub.add_parser("simulate", help="run seeded playouts of a game")
    common(p, infile=True, outfile=True)
    p.add_argument("--n", dest="playouts", type=int, default=100, help="playout count")

    p = sub.add_parser("info", help="print summary statistics of a game")
    common(p, infile=True)

    p = sub.add_parser("gen", help="emit a random valid .efg-tree document")
    common(p, outfile=True)
    p.add_argument("--max-nodes", type=int, default=400)
    p.add_argument("--branching", type=int, default=4)
    p.add_argument("--chance-rate", type=float, default=0.3)
    p.add_argument("--merge-rate", type=float, default=0.25)
    return parser


def _resolve_seed(args: argparse.Namespace) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV_VAR)
    if env is not None:
        return int(env)
    return DEFAULT_SEED


def _load_game(path: str) -> ExtensiveFormGame:
    return parse_efg(Path(path).read_text(encoding="utf-8"))


def _prepare(game: ExtensiveFormGame, out, quiet: bool) -> ExtensiveFormGame:
    relabeled = relabel_first_mover(game)
    if not quiet:
        if relabeled is not game:
            swapped = game.nodes[0].mover
            print(f"applied: relabeled players 1 and {swapped}", file=out)
        else:
            print("applied: no transforms needed", file=out)
    return relabeled


def _cmd_compile(args, out) -> int:
    game = _load_game(args.input)
    game = _prepare(game, out, args.quiet)
    name = sanitize_name(Path(args.input).stem)
    description = compile_game(game, name)
    target = args.output or str(Path(args.input).with_suffix(".lud"))
    Path(target).write_text(description.text, encoding="utf-8")
    if not args.quiet:
        print(f"wrote {target}", file=out)
    return EXIT_OK


def _cmd_verify(args, out) -> int:
    game = _load_game(args.input)
    game = _prepare(game, out, args.quiet)
    if args.output:
        text = Path(args.output).read_text(encoding="utf-8")
    else:
        text = compile_game(game, sanitize_name(Path(args.input).stem)).text
    try:
        ast = parse_lgdl(text)
    except LgdlError as exc:
        print(f"criterion=1 status=fail detail={str(exc)!r}", file=out)
        print("summary status=FAIL", file=out)
        return EXIT_VERIFICATION_FAILED
    report = check_equivalence(game, ast).merge(check_indistinguishability(game, ast))
    print(report.render(), file=out)
    ok = report.all_pass
    if args.playouts > 0:
        stats = statistical_playout_check(
            game, ast, args.playouts, _resolve_seed(args), args.tolerance
        )
        print(stats.render(), file=out)
        ok = ok and stats.passed
    return EXIT_OK if ok else EXIT_VERIFICATION_FAILED


def _cmd_simulate(args, out) -> int:
    path = Path(args.input)
    if path.suffix == ".lud":
        ast = parse_lgdl(path.read_text(encoding="utf-8"))
    else:
        game = _load_game(args.input)
        game = _prepare(game, out, quiet=True)
        ast = parse_lgdl(compile_game(game, sanitize_name(path.stem)).text)
    seed = _resolve_seed(args)
    master = SplitMix64(seed)
    totals: list[Fraction] | None = None
    lines: list[str] = []
    for index in range(args.playouts):
        result = playout(ast, master.next_uint64())
        lines.append(f"playout index={index} seed={seed}")
        for step in result.steps:
            lines.append(
                f"move {step.before_vertex} {step.select_vertex} {step.after_vertex}"
            )
        lines.append("payoffs " + " ".join(str(p) for p in result.payoffs))
        values = [Fraction(p) for p in result.payoffs]
        totals = values if totals is None else [a + b for a, b in zip(totals, values)]
    body = "\n".join(lines) + "\n"
    if args.output:
        Path(args.output).write_text(body, encoding="utf-8")
    else:
        out.write(body)
    if totals is not None and not args.quiet:
        means = " ".join(f"{float(t / args.playouts):.4f}" for t in totals)
        print(f"mean payoffs over {args.playouts} playouts: {means}", file=out)
    return EXIT_OK


def _cmd_info(args, out) -> int:
    game = _load_game(args.input)
    trajectories = enumerate_trajectories(game)
    depth = max(len(t.states) for t in trajectories) - 1
    chance = sum(1 for n in game.nodes if n.is_chance)
    decision = sum(1 for n in game.nodes if not n.is_terminal and not n.is_chance)
    terminal = sum(1 for n in game.nodes if n.is_terminal)
    print(f"states {game.num_states}", file=out)
    print(f"players {game.num_players}", file=out)
    print(f"depth {depth}", file=out)
    print(f"decision_nodes {decision}", file=out)
    print(f"chance_nodes {chance}", file=out)
    print(f"terminal_nodes {terminal}", file=out)
    print(f"trajectories {len(trajectories)}", file=out)
    for player in range(1, game.num_players + 1):
        parts = game.information_sets[player - 1]
        shared = [p for p in parts if len(p) > 1]
        largest = max((len(p) for p in parts), default=1)
        print(
            f"infosets player={player} total={len(parts)}"
            f" shared={len(shared)} largest={largest}",
            file=out,
        )
    return EXIT_OK


def _cmd_gen(args, out) -> int:
    config = GeneratorConfig(
        max_nodes=args.max_nodes,
        max_branching=args.branching,
        chance_rate=args.chance_rate,
        merge_rate=args.merge_rate,
    )
    game = generate_game(_resolve_seed(args), config)
    text = serialize_efg(game)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
        if not args.quiet:
            print(f"wrote {args.output}", file=out)
    else:
        out.write(text)
    return EXIT_OK


_COMMANDS = {
    "compile": _cmd_compile,
    "verify": _cmd_verify,
    "simulate": _cmd_simulate,
    "info": _cmd_info,
    "gen": _cmd_gen,
}


def main(argv: list[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args, out)
    except (EfgFormatError, LgdlError, CompileError, InterpreterError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except Exception as exc:  # internal invariant violation
        print(f"internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL_ERROR


if __name__ == "__main__":
    sys.exit(main())
