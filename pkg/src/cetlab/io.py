"""Interchange formats: edge lists, extended Newick, DOT, and move specs.

Edge-list documents look like::

    semidirected
    @1 -- @2
    @1 -> @3
    x1 -- @2

or start with ``rooted @1`` for rooted networks.  Leaves are written as their
labels, internal vertices as ``@<int>``.  Text after ``#`` is a comment.

Move specs name edges by the tokens of a document: ``A-B`` for an undirected
edge, ``A>B`` for a directed one, with an optional ``/i`` suffix (1-based)
picking among parallel copies.  The accepted forms are::

    cet cut=U-V keep=V to=A-B/1
    cet- edge=A>B/1
    cet+ loop at=A-B/1
    cet+ two at=A-B/1 second=C-D/1 head=first
    cet+ two at=A-B/1 second=half-a head=second

``half-a``/``half-b`` and ``head=first|second`` refer to the two halves of the
``at`` edge, on the side of its first and second written token respectively.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass

from .errors import ParseError, UnsupportedFeature
from .graph import MixedGraph
from .moves import Cet, CetMinus, CetPlus, Move
from .network import (
    LABEL_RE,
    Network,
    RootedNetwork,
    SemiDirectedNetwork,
    validate_rooted,
    validate_semidirected,
)

_INTERNAL_RE = re.compile(r"^@(\d+)$")


@dataclass
class EdgeListDocument:
    """A parsed edge list together with the token each vertex was written as."""

    network: Network
    tokens: dict[str, int]

    @property
    def names(self) -> dict[int, str]:
        return {v: t for t, v in self.tokens.items()}


# ---------------------------------------------------------------- edge lists


def canonical_tokens(n: Network) -> dict[int, str]:
    """Vertex -> token, numbering internal vertices in canonical order."""
    lab = n.canonical_labeling
    out: dict[int, str] = {}
    internal = sorted((v for v in n.vertices if v not in n.labels), key=lambda v: lab[v])
    for i, v in enumerate(internal, 1):
        out[v] = f"@{i}"
    for v, name in n.labels.items():
        out[v] = name
    return out


def serialize_edge_list(n: Network) -> str:
    lab = n.canonical_labeling
    tok = canonical_tokens(n)
    rows = []
    for e in n.edges.values():
        a, b = e.a, e.b
        if not e.directed and lab[a] > lab[b]:
            a, b = b, a
        rows.append(((lab[a], lab[b], e.directed), f"{tok[a]} {'->' if e.directed else '--'} {tok[b]}"))
    rows.sort()
    if isinstance(n, RootedNetwork):
        header = f"rooted {tok[n.root]}"
    else:
        header = "semidirected"
    return "\n".join([header] + [r for _, r in rows]) + "\n"


def _check_token(tok: str, lineno: int) -> None:
    if _INTERNAL_RE.match(tok) or LABEL_RE.match(tok):
        return
    raise ParseError(f"bad vertex token {tok!r}", lineno)


def parse_edge_list_document(text: str) -> EdgeListDocument:
    header = None
    root_tok = None
    edges: list[tuple[str, str, bool, int]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if header is None:
            if parts == ["semidirected"]:
                header = "semidirected"
            elif len(parts) == 2 and parts[0] == "rooted":
                header = "rooted"
                root_tok = parts[1]
                _check_token(root_tok, lineno)
            else:
                raise ParseError("expected header 'semidirected' or 'rooted <root>'", lineno)
            continue
        if len(parts) != 3 or parts[1] not in ("--", "->"):
            raise ParseError("expected '<u> -- <v>' or '<u> -> <v>'", lineno)
        _check_token(parts[0], lineno)
        _check_token(parts[2], lineno)
        edges.append((parts[0], parts[2], parts[1] == "->", lineno))
    if header is None:
        raise ParseError("empty document", 1)
    g = MixedGraph()
    tokens: dict[str, int] = {}

    def vid(t: str) -> int:
        if t not in tokens:
            tokens[t] = g.add_vertex(None if t.startswith("@") else t)
        return tokens[t]

    for a, b, d, _ in edges:
        g.add_edge(vid(a), vid(b), d)
    if header == "rooted":
        if root_tok not in tokens:
            raise ParseError(f"root {root_tok!r} does not occur in any edge")
        net: Network = validate_rooted(g, tokens[root_tok])
    else:
        net = validate_semidirected(g)
    return EdgeListDocument(net, tokens)


def parse_edge_list(text: str) -> Network:
    return parse_edge_list_document(text).network


# ----------------------------------------------------------- extended Newick


def serialize_enewick(n: RootedNetwork) -> str:
    """Extended Newick with ``#H<i>`` tags numbered in order of first appearance.

    A reticulation is written in full under whichever parent the traversal
    reaches first and as a bare ``#H<i>`` under the other.  A parallel pair
    needs no special treatment: the shared parent lists the hybrid twice.
    """
    lab = n.canonical_labeling
    rets = n.reticulations
    tags: dict[int, int] = {}

    def walk(v: int) -> str:
        if v in rets and v in tags:
            return f"#H{tags[v]}"
        if v in rets:
            tags[v] = len(tags) + 1
        if v in n.labels:
            return n.labels[v]
        kids = sorted(n.children(v), key=lambda c: lab[c])
        body = "(" + ",".join(walk(c) for c in kids) + ")"
        return body + (f"#H{tags[v]}" if v in rets else "")

    return walk(n.root) + ";"


class _NewickParser:
    def __init__(self, text: str):
        self.s = "".join(text.split())
        self.i = 0
        self.g = MixedGraph()
        self.hybrids: dict[str, int] = {}
        self.defined: set[str] = set()
        self.uses: dict[str, int] = {}

    def error(self, msg: str):
        return ParseError(f"{msg} at offset {self.i}")

    def peek(self) -> str:
        return self.s[self.i] if self.i < len(self.s) else ""

    def name(self) -> str:
        j = self.i
        while self.i < len(self.s) and self.s[self.i] not in "(),;#:[":
            self.i += 1
        return self.s[j:self.i]

    def tag(self) -> str | None:
        if self.peek() != "#":
            return None
        self.i += 1
        t = self.name()
        if not re.fullmatch(r"H\d+", t):
            raise self.error(f"bad hybrid tag #{t}")
        if self.peek() in (":", "["):
            raise UnsupportedFeature("branch lengths and comments are not supported")
        self.uses[t] = self.uses.get(t, 0) + 1
        return t

    def hybrid_vertex(self, t: str) -> int:
        if t not in self.hybrids:
            self.hybrids[t] = self.g.add_vertex()
        return self.hybrids[t]

    def node(self) -> int:
        c = self.peek()
        if c in (":", "["):
            raise UnsupportedFeature("branch lengths and comments are not supported")
        if c == "(":
            self.i += 1
            kids = [self.node()]
            while self.peek() == ",":
                self.i += 1
                kids.append(self.node())
            if self.peek() != ")":
                raise self.error("expected ')'")
            self.i += 1
            label = self.name()
            if label:
                raise UnsupportedFeature("internal node labels are not supported")
            if self.peek() in (":", "["):
                raise UnsupportedFeature("branch lengths and comments are not supported")
            t = self.tag()
            if t is not None:
                if t in self.defined:
                    raise self.error(f"#{t} has two subtrees")
                self.defined.add(t)
                v = self.hybrid_vertex(t)
            else:
                v = self.g.add_vertex()
            for k in kids:
                self.g.add_edge(v, k, True)
            return v
        label = self.name()
        if self.peek() in (":", "["):
            raise UnsupportedFeature("branch lengths and comments are not supported")
        t = self.tag()
        if t is not None:
            if label:
                raise self.error("labelled hybrid leaves are not supported")
            return self.hybrid_vertex(t)
        if not label:
            raise self.error("empty leaf label")
        if not LABEL_RE.match(label):
            raise self.error(f"bad leaf label {label!r}")
        return self.g.add_vertex(label)

    def parse(self) -> tuple[MixedGraph, int]:
        top = self.node()
        if self.peek() != ";":
            raise self.error("expected ';'")
        self.i += 1
        if self.i != len(self.s):
            raise self.error("trailing text after ';'")
        for t, count in self.uses.items():
            if count != 2:
                raise ParseError(f"#{t} must appear exactly twice, found {count}")
            if t not in self.defined:
                raise ParseError(f"#{t} has no subtree")
        return self.g, top


def parse_enewick(text: str) -> RootedNetwork:
    """Parse a rooted network.

    The outermost node is the root.  When it has two children (``(x1,x2);``)
    a new root is added above it, so both ``(x1,x2);`` and ``((x1,x2));``
    give the rooted cherry.
    """
    g, top = _NewickParser(text.strip()).parse()
    if g.out_degree(top) == 2:
        rho = g.add_vertex()
        g.add_edge(rho, top, True)
        top = rho
    return validate_rooted(g, top)


# ---------------------------------------------------------------------- DOT


def short_hash(code: bytes) -> str:
    return hashlib.sha1(code).hexdigest()[:10]


def export_dot(obj) -> str:
    """DOT for a network, or for a space graph (any object with ``adjacency``)."""
    if isinstance(obj, Network):
        return _network_dot(obj)
    return _space_dot(obj)


def _network_dot(n: Network) -> str:
    lab = n.canonical_labeling
    tok = canonical_tokens(n)
    lines = ["digraph network {"]
    for v in sorted(n.vertices, key=lambda v: lab[v]):
        shape = "plaintext" if v in n.labels else "point"
        lines.append(f'  "{tok[v]}" [label="{tok[v] if v in n.labels else ""}", shape={shape}];')
    rows = []
    for e in n.edges.values():
        a, b = e.a, e.b
        if not e.directed and lab[a] > lab[b]:
            a, b = b, a
        attr = "" if e.directed else " [dir=none]"
        rows.append(((lab[a], lab[b], e.directed), f'  "{tok[a]}" -> "{tok[b]}"{attr};'))
    lines += [r for _, r in sorted(rows)]
    lines.append("}")
    return "\n".join(lines) + "\n"


def _space_dot(sg) -> str:
    lines = ["graph space {"]
    for c in sorted(sg.adjacency):
        lines.append(f'  "{short_hash(c)}";')
    for c in sorted(sg.adjacency):
        for d in sorted(sg.adjacency[c]):
            if c < d:
                lines.append(f'  "{short_hash(c)}" -- "{short_hash(d)}";')
    lines.append("}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- move specs


def _edge_name(n: Network, eid: int, tok: dict[int, str]) -> str:
    e = n.edges[eid]
    sep = ">" if e.directed else "-"
    same = sorted(
        f.id for f in n.edges.values()
        if f.directed == e.directed
        and ((f.a, f.b) == (e.a, e.b) or (not e.directed and (f.b, f.a) == (e.a, e.b)))
    )
    return f"{tok[e.a]}{sep}{tok[e.b]}/{same.index(eid) + 1}"


def format_move(n: Network, m: Move, tokens: dict[int, str] | None = None) -> str:
    """Render ``m`` against the canonical document of ``n`` (or the given tokens)."""
    tok = tokens if tokens is not None else canonical_tokens(n)
    if isinstance(m, Cet):
        return f"cet cut={_edge_name(n, m.cut_edge, tok)} keep={tok[m.kept_end]} to={_edge_name(n, m.recipient, tok)}"
    if isinstance(m, CetMinus):
        return f"cet- edge={_edge_name(n, m.ret_edge, tok)}"
    if m.variant == "loop":
        return f"cet+ loop at={_edge_name(n, m.first_edge, tok)}"
    second = _edge_name(n, m.second_edge, tok) if m.second_edge is not None else ("half-a", "half-b")[m.second_half]
    return f"cet+ two at={_edge_name(n, m.first_edge, tok)} second={second} head={m.head_choice}"


_EDGE_RE = re.compile(r"^(?P<body>[^\s/]+?)(?:/(?P<i>\d+))?$")


def _split_edge(body: str, tokens: dict[str, int]) -> tuple[str, str, bool]:
    # labels may contain '-', so try every separator position
    hits = [
        (body[:j], body[j + 1:], body[j] == ">")
        for j in range(1, len(body) - 1)
        if body[j] in "->" and body[:j] in tokens and body[j + 1:] in tokens
    ]
    if len(hits) != 1:
        raise ParseError(f"cannot read edge {body!r}")
    return hits[0]


def _resolve_edge(n: Network, tokens: dict[str, int], spec: str) -> tuple[int, bool]:
    """Edge id named by ``spec`` and whether it was written against its stored direction."""
    mt = _EDGE_RE.match(spec)
    if not mt:
        raise ParseError(f"bad edge reference {spec!r}")
    a, b, directed = _split_edge(mt["body"], tokens)
    va, vb = tokens[a], tokens[b]
    idx = int(mt["i"] or 1)
    cands = sorted(
        e.id for e in n.edges.values()
        if e.directed == directed
        and ((e.a, e.b) == (va, vb) or (not directed and (e.b, e.a) == (va, vb)))
    )
    if not 1 <= idx <= len(cands):
        raise ParseError(f"no edge {spec!r}")
    eid = cands[idx - 1]
    e = n.edges[eid]
    return eid, (e.a, e.b) != (va, vb)


def _fields(parts: list[str]) -> dict[str, str]:
    out = {}
    for p in parts:
        if "=" not in p:
            raise ParseError(f"expected key=value, got {p!r}")
        k, v = p.split("=", 1)
        out[k] = v
    return out


def parse_move(n: Network, spec: str, tokens: dict[str, int] | None = None) -> Move:
    """Parse a move spec against ``tokens`` (default: the canonical document of ``n``)."""
    if tokens is None:
        tokens = {t: v for v, t in canonical_tokens(n).items()}
    parts = spec.split()
    if not parts:
        raise ParseError("empty move spec")
    kind, rest = parts[0], parts[1:]
    if kind == "cet":
        f = _fields(rest)
        if set(f) != {"cut", "keep", "to"}:
            raise ParseError("cet needs cut=, keep= and to=")
        if f["keep"] not in tokens:
            raise ParseError(f"unknown vertex {f['keep']!r}")
        cut, _ = _resolve_edge(n, tokens, f["cut"])
        rec, _ = _resolve_edge(n, tokens, f["to"])
        return Cet(cut, tokens[f["keep"]], rec)
    if kind == "cet-":
        f = _fields(rest)
        if set(f) != {"edge"}:
            raise ParseError("cet- needs edge=")
        return CetMinus(_resolve_edge(n, tokens, f["edge"])[0])
    if kind == "cet+":
        if not rest or rest[0] not in ("loop", "two"):
            raise ParseError("cet+ needs variant 'loop' or 'two'")
        f = _fields(rest[1:])
        if rest[0] == "loop":
            if set(f) != {"at"}:
                raise ParseError("cet+ loop needs at=")
            return CetPlus("loop", _resolve_edge(n, tokens, f["at"])[0])
        if set(f) != {"at", "second", "head"}:
            raise ParseError("cet+ two needs at=, second= and head=")
        first, flipped = _resolve_edge(n, tokens, f["at"])
        if f["head"] not in ("first", "second"):
            raise ParseError("head must be 'first' or 'second'")
        head = f["head"]
        if flipped:
            head = "second" if head == "first" else "first"
        if f["second"] in ("half-a", "half-b"):
            half = 0 if f["second"] == "half-a" else 1
            return CetPlus("two_edge", first, None, 1 - half if flipped else half, head)
        second, _ = _resolve_edge(n, tokens, f["second"])
        return CetPlus("two_edge", first, second, None, head)
    raise ParseError(f"unknown move kind {kind!r}")


def format_transcript(seq) -> str:
    """One comment line per step of a ``MoveSequence``.

    Each spec is written against the canonical document of the network it
    applies to, so the steps replay with ``apply`` starting from the
    canonical document of the start network.
    """
    nets = seq.networks
    lines = [f"# step {i}: {format_move(nets[i - 1], st.move)}" for i, st in enumerate(seq.steps, 1)]
    return "".join(line + "\n" for line in lines)


__all__ = [
    "EdgeListDocument",
    "canonical_tokens",
    "serialize_edge_list",
    "parse_edge_list",
    "parse_edge_list_document",
    "serialize_enewick",
    "parse_enewick",
    "export_dot",
    "short_hash",
    "format_move",
    "parse_move",
    "format_transcript",
]
