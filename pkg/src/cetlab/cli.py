"""Command-line interface: ``cetlab <subcommand> ...``.

Network arguments are paths to edge-list or extended Newick files; ``-``
reads standard input.  Commands that write a network print its canonical
edge-list document.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .errors import CapExceeded, CetError, NoPath, Unreachable
from .explorer import (
    MOVE_KINDS,
    Tier,
    build_space_graph,
    check_caps,
    connectivity_report,
    report_json,
    shortest_path,
)
from .io import (
    canonical_tokens,
    export_dot,
    format_move,
    parse_edge_list_document,
    parse_enewick,
    parse_move,
    serialize_edge_list,
    serialize_enewick,
    short_hash,
)
from .moves import (
    apply_move,
    cet_minus_neighbors,
    cet_neighbors,
    cet_plus_neighbors,
    is_cet1,
)
from .network import Network, RootedNetwork, SemiDirectedNetwork, deroot, rooted_partners
from .standard_form import (
    build_standard_form,
    class_bound,
    connect_rooted,
    connect_semidirected,
    to_standard_form,
    to_standard_shape,
)

EXIT_OK, EXIT_INVALID, EXIT_CAP, EXIT_UNREACHABLE = 0, 1, 2, 3


class UsageError(CetError):
    pass


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _load(path: str) -> tuple[Network, dict[str, int]]:
    """Parse a document; also return the token -> vertex map that move specs use."""
    text = _read(path)
    if "(" in text or ";" in text:
        # extended Newick; '#' introduces hybrid tags there, so only whole-line comments are dropped
        body = "".join(line for line in text.splitlines() if not line.lstrip().startswith("#"))
        net = parse_enewick(body)
        return net, {t: v for v, t in canonical_tokens(net).items()}
    doc = parse_edge_list_document(text)
    return doc.network, doc.tokens


def _emit(net: Network, fmt: str = "edgelist") -> str:
    if fmt == "enewick":
        if not isinstance(net, RootedNetwork):
            raise UsageError("extended Newick needs a rooted network")
        return serialize_enewick(net) + "\n"
    if fmt == "dot":
        return export_dot(net)
    return serialize_edge_list(net)


def _transcript(seqs) -> str:
    lines = []
    for seq in seqs:
        nets = seq.networks
        for st, before in zip(seq.steps, nets):
            lines.append(f"# step {len(lines) + 1}: {format_move(before, st.move)}")
    return "".join(line + "\n" for line in lines)


# ------------------------------------------------------------------ commands


def cmd_validate(args) -> str:
    net, _ = _load(args.file)
    return (
        f"kind: {net.kind}\n"
        f"leaves: {net.n}\n"
        f"k: {net.k}\n"
        f"class: {net.level_class.value}\n"
        f"code: {short_hash(net.code)}\n"
    )


def cmd_format(args) -> str:
    net, _ = _load(args.file)
    return _emit(net, args.to)


def cmd_moves(args) -> str:
    net, tokens = _load(args.file)
    names = {v: t for t, v in tokens.items()}
    if args.kind in ("cet", "cet1"):
        pairs = cet_neighbors(net)
        if args.kind == "cet1":
            if not isinstance(net, SemiDirectedNetwork):
                raise UsageError("CET1 is defined for semi-directed networks")
            pairs = [(m, r) for m, r in pairs if is_cet1(net, m)]
    else:
        if not isinstance(net, SemiDirectedNetwork):
            raise UsageError(f"{args.kind} acts on semi-directed networks")
        pairs = cet_plus_neighbors(net) if args.kind == "cet+" else cet_minus_neighbors(net)
    return "".join(f"{format_move(net, m, names)}\t{short_hash(r.code)}\n" for m, r in pairs)


def cmd_apply(args) -> str:
    net, tokens = _load(args.file)
    res = apply_move(net, parse_move(net, args.move, tokens))
    return _emit(res.network, args.to)


def cmd_partners(args) -> str:
    net, _ = _load(args.file)
    if not isinstance(net, SemiDirectedNetwork):
        raise UsageError("partners needs a semi-directed network")
    out = []
    for i, r in enumerate(rooted_partners(net), 1):
        if args.to == "enewick":
            out.append(serialize_enewick(r) + "\n")
        else:
            out.append(f"# partner {i}\n" + _emit(r, args.to))
    return "".join(out)


def cmd_deroot(args) -> str:
    net, _ = _load(args.file)
    if not isinstance(net, RootedNetwork):
        raise UsageError("deroot needs a rooted network")
    return _emit(deroot(net))


def cmd_standard_form(args) -> str:
    net = build_standard_form([f"x{i}" for i in range(1, args.n + 1)], args.k)
    if args.semidirected:
        return _emit(deroot(net))
    return _emit(net, args.to)


def cmd_to_standard(args) -> str:
    net, _ = _load(args.file)
    if not isinstance(net, RootedNetwork):
        raise UsageError("to-standard needs a rooted network")
    shape = to_standard_shape(net)
    form = to_standard_form(shape.final)
    return _transcript([shape, form]) + _emit(form.final)


def cmd_connect(args) -> str:
    a, _ = _load(args.file_a)
    b, _ = _load(args.file_b)
    if args.optimal:
        moves = "extended" if a.k != b.k else "cet"
        seq = shortest_path(a, b, moves, class_bound(a.n, max(a.k, b.k)))
    elif isinstance(a, RootedNetwork) and isinstance(b, RootedNetwork):
        seq = connect_rooted(a, b)
    elif isinstance(a, SemiDirectedNetwork) and isinstance(b, SemiDirectedNetwork):
        seq = connect_semidirected(a, b)
    else:
        raise UsageError("both networks must be of the same kind")
    return f"# length {len(seq)}\n" + _transcript([seq]) + _emit(seq.final)


def cmd_explore(args) -> str:
    ks = range(args.n) if args.k == "all" else [int(args.k)]
    if args.moves == "extended":
        ks = [0]
    out = []
    for k in ks:
        tier = Tier.of(args.n, k, args.cls, args.kind)
        check_caps(tier)
        sg = build_space_graph(tier, args.moves, workers=args.threads)
        rep = connectivity_report(sg)
        if args.json:
            out.append(report_json(rep) + "\n")
        else:
            out.append("".join(f"{key}: {val}\n" for key, val in rep.items()))
        if args.dot:
            out.append(export_dot(sg))
    return ("" if args.json else "\n").join(out)


# -------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cetlab", description="Cut edge transfers on phylogenetic networks.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)
    formats = ("edgelist", "enewick", "dot")

    s = sub.add_parser("validate", help="check a network and report its class")
    s.add_argument("file")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("format", help="rewrite a network as a canonical document")
    s.add_argument("file")
    s.add_argument("--to", choices=formats, default="edgelist")
    s.set_defaults(func=cmd_format)

    s = sub.add_parser("moves", help="list valid moves and the code of each result")
    s.add_argument("file")
    s.add_argument("--kind", choices=("cet", "cet1", "cet+", "cet-"), default="cet")
    s.set_defaults(func=cmd_moves)

    s = sub.add_parser("apply", help="apply one move")
    s.add_argument("file")
    s.add_argument("--move", required=True, help='e.g. "cet cut=@3-@5 keep=@5 to=@1-x2/1"')
    s.add_argument("--to", choices=formats, default="edgelist")
    s.set_defaults(func=cmd_apply)

    s = sub.add_parser("partners", help="rooted partners of a semi-directed network")
    s.add_argument("file")
    s.add_argument("--to", choices=formats, default="edgelist")
    s.set_defaults(func=cmd_partners)

    s = sub.add_parser("deroot", help="semi-directed network of a rooted one")
    s.add_argument("file")
    s.set_defaults(func=cmd_deroot)

    s = sub.add_parser("standard-form", help="the standard form on x1..xn with k reticulations")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--semidirected", action="store_true", help="emit the deroot instead")
    s.add_argument("--to", choices=formats, default="edgelist")
    s.set_defaults(func=cmd_standard_form)

    s = sub.add_parser("to-standard", help="move transcript to the standard form")
    s.add_argument("file")
    s.set_defaults(func=cmd_to_standard)

    s = sub.add_parser("connect", help="move sequence between two networks")
    s.add_argument("file_a")
    s.add_argument("file_b")
    s.add_argument("--optimal", action="store_true", help="shortest sequence by breadth-first search")
    s.set_defaults(func=cmd_connect)

    s = sub.add_parser("explore", help="connectivity and diameter of a tier's move graph")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--k", default="0", help="reticulation number or 'all'")
    s.add_argument("--class", dest="cls", choices=("level1", "almost", "all"), default="level1")
    s.add_argument("--moves", choices=MOVE_KINDS, default="cet")
    s.add_argument("--kind", choices=("semidirected", "rooted"), default="semidirected")
    s.add_argument("--threads", type=int, default=None, help="worker processes (default: CETLAB_THREADS or 1)")
    s.add_argument("--json", action="store_true")
    s.add_argument("--dot", action="store_true", help="also print the move graph as DOT")
    s.set_defaults(func=cmd_explore)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR, format="%(levelname)s %(message)s")
    if args.command == "explore" and args.k != "all":
        try:
            int(args.k)
        except ValueError:
            print("error: --k must be an integer or 'all'", file=sys.stderr)
            return EXIT_INVALID
    try:
        out = args.func(args)
    except CapExceeded as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CAP
    except (Unreachable, NoPath) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_UNREACHABLE
    except (CetError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    sys.stdout.write(out)
    sys.stdout.flush()
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
