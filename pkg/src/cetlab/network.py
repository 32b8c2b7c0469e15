"""Rooted and semi-directed binary phylogenetic networks.

Network objects wrap a private :class:`MixedGraph` and are treated as
immutable once constructed; every rewrite works on a copy.  Derived data
(canonical code, cut edges, cycle structure, root placements) is computed on
demand and cached on the instance.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

from .canonical import canonical_form
from .errors import ValidationError
from .graph import Edge, MixedGraph

LABEL_RE = re.compile(r"^[A-Za-z0-9_.\-]+$")


class LevelClass(enum.Enum):
    LEVEL1 = "level1"
    ALMOST_LEVEL1 = "almost"
    NEITHER = "neither"

    def within(self, bound: "LevelClass") -> bool:
        """True when a network of this class belongs to the class ``bound``."""
        order = {LevelClass.LEVEL1: 0, LevelClass.ALMOST_LEVEL1: 1, LevelClass.NEITHER: 2}
        return order[self] <= order[bound]


@dataclass(frozen=True)
class Counts:
    vertices: int
    edges: int
    reticulations: int
    tree_vertices: int
    leaves: int


@dataclass(frozen=True)
class Cycle:
    vertices: tuple[int, ...]
    edges: frozenset[int]

    def __len__(self) -> int:
        return len(self.vertices)


@dataclass(frozen=True)
class Placement:
    """A root position on a semi-directed network that yields a rooted partner.

    The partner subdivides ``edge`` with a new vertex ``t`` (the root child),
    hangs the root above it and orients every edge as recorded.
    """

    edge: int
    source: MixedGraph
    orientation: dict  # original edge id -> (tail, head); placement edge excluded
    halves: tuple  # orientations of the (a-side, b-side) halves of the placement edge

    @property
    def root_child(self) -> int:
        return self.source._next_vertex

    @property
    def root(self) -> int:
        return self.source._next_vertex + 1

    def rooted_graph(self) -> MixedGraph:
        h = self.source.copy()
        t, first, second = h.subdivide(self.edge, rooted=False)
        rho = h.add_vertex()
        h.add_edge(rho, t, True)
        for i, (a, b) in self.orientation.items():
            h.set_directed(i, a, b)
        h.set_directed(first, *self.halves[0])
        h.set_directed(second, *self.halves[1])
        return h


class Network:
    kind = ""

    def __init__(self, g: MixedGraph):
        self._g = g

    # basic accessors ------------------------------------------------------

    @property
    def vertices(self) -> frozenset[int]:
        return frozenset(self._g.vertices)

    @property
    def edges(self) -> dict[int, Edge]:
        return dict(self._g.edges)

    def edge(self, eid: int) -> Edge:
        return self._g.edges[eid]

    @property
    def labels(self) -> dict[int, str]:
        return dict(self._g.labels)

    @cached_property
    def taxa(self) -> frozenset[str]:
        return frozenset(self._g.labels.values())

    @cached_property
    def leaf_of(self) -> dict[str, int]:
        return {lab: v for v, lab in self._g.labels.items()}

    def is_leaf(self, v: int) -> bool:
        return v in self._g.labels

    def to_graph(self) -> MixedGraph:
        return self._g.copy()

    def incident(self, v: int) -> list[Edge]:
        return [self._g.edges[i] for i in self._g._inc[v]]

    @cached_property
    def reticulations(self) -> frozenset[int]:
        return frozenset(v for v in self._g.vertices if self._g.in_degree(v) == 2)

    @property
    def k(self) -> int:
        return len(self.reticulations)

    @property
    def n(self) -> int:
        return len(self._g.labels)

    # canonical form -------------------------------------------------------

    @cached_property
    def _canon(self) -> tuple[bytes, dict[int, int]]:
        return canonical_form(self._g, self.kind)

    @property
    def code(self) -> bytes:
        return self._canon[0]

    @property
    def canonical_labeling(self) -> dict[int, int]:
        return self._canon[1]

    @cached_property
    def shape_code(self) -> bytes:
        """Canonical code with all leaf labels erased."""
        return canonical_form(self._g, self.kind, ignore_labels=True)[0]

    def __repr__(self) -> str:
        return f"<{type(self).__name__} n={self.n} k={self.k} |V|={len(self._g.vertices)}>"

    # structure -------------------------------------------------------------

    @cached_property
    def blocks(self) -> list[list[int]]:
        return _blocks(self._g)

    @cached_property
    def cut_edges(self) -> frozenset[int]:
        out = set()
        for b in self.blocks:
            if len(b) == 1 and not self._g.edges[b[0]].is_loop:
                out.add(b[0])
        return frozenset(out)

    @cached_property
    def _cycle_structure(self) -> tuple[bool, list[Cycle]]:
        """(level-like, cycles): level-like means every non-bridge block is one cycle and blocks are vertex-disjoint."""
        cycles: list[Cycle] = []
        simple = True
        seen: set[int] = set()
        for b in self.blocks:
            if len(b) == 1 and not self._g.edges[b[0]].is_loop:
                continue
            vs = set()
            for i in b:
                e = self._g.edges[i]
                vs.update((e.a, e.b))
            if len(vs) != len(b):
                simple = False
                continue
            if vs & seen:
                simple = False
            seen |= vs
            cycles.append(Cycle(_walk_cycle(self._g, b), frozenset(b)))
        return simple, cycles

    @property
    def simple_cycles(self) -> list[Cycle]:
        """Cycles of the blocks that are themselves single cycles."""
        return self._cycle_structure[1]

    def cycle_of_vertex(self) -> dict[int, Cycle]:
        out = {}
        for c in self.simple_cycles:
            for v in c.vertices:
                out[v] = c
        return out


class RootedNetwork(Network):
    kind = "rooted"

    def __init__(self, g: MixedGraph, root: int):
        super().__init__(g)
        self.root = root

    @property
    def root_child(self) -> int:
        (eid,) = self._g._inc[self.root]
        return self._g.edges[eid].b

    @property
    def root_edge(self) -> int:
        return self._g._inc[self.root][0]

    def children(self, v: int) -> list[int]:
        return [e.b for e in self.incident(v) if e.a == v]

    def parents(self, v: int) -> list[int]:
        return [e.a for e in self.incident(v) if e.b == v]

    def out_edges(self, v: int) -> list[Edge]:
        return [e for e in self.incident(v) if e.a == v]

    def in_edges(self, v: int) -> list[Edge]:
        return [e for e in self.incident(v) if e.b == v]

    @cached_property
    def tree_vertices(self) -> frozenset[int]:
        return frozenset(
            v for v in self._g.vertices
            if v != self.root and v not in self._g.labels and v not in self.reticulations
        )

    @cached_property
    def descendants(self) -> dict[int, frozenset[int]]:
        """Strict descendants of every vertex."""
        out: dict[int, frozenset[int]] = {}

        def go(v: int) -> frozenset[int]:
            if v in out:
                return out[v]
            acc: set[int] = set()
            for c in self.children(v):
                acc.add(c)
                acc |= go(c)
            out[v] = frozenset(acc)
            return out[v]

        for v in self._g.vertices:
            go(v)
        return out

    def is_ancestor(self, a: int, b: int) -> bool:
        return b in self.descendants[a]

    @cached_property
    def level_class(self) -> LevelClass:
        simple, cycles = self._cycle_structure
        if not simple:
            return LevelClass.NEITHER
        twos = sum(1 for c in cycles if len(c) == 2)
        if twos == 0:
            return LevelClass.LEVEL1
        if twos == 1:
            return LevelClass.ALMOST_LEVEL1
        return LevelClass.NEITHER


class SemiDirectedNetwork(Network):
    kind = "semidirected"

    @cached_property
    def placements(self) -> dict[int, Placement]:
        out = {}
        for eid in _placement_candidates(self._g):
            p = _place_root(self._g, eid)
            if p is not None:
                out[eid] = p
        return out

    @cached_property
    def level_class(self) -> LevelClass:
        simple, cycles = self._cycle_structure
        if not simple:
            return LevelClass.NEITHER
        loops = [c for c in cycles if len(c) == 1]
        twos = [c for c in cycles if len(c) == 2]
        best = LevelClass.NEITHER
        for eid in self.placements:
            e = self._g.edges[eid]
            if loops and not (e.is_loop and len(loops) == 1):
                continue
            r2 = len(twos) - sum(1 for c in twos if eid in c.edges) + (1 if e.is_loop else 0)
            if r2 == 0:
                return LevelClass.LEVEL1
            if r2 == 1:
                best = LevelClass.ALMOST_LEVEL1
        return best


# ---------------------------------------------------------------------------
# validation


def _check_labels(g: MixedGraph) -> None:
    if not g.labels:
        raise ValidationError("EmptyLeafSet")
    seen: dict[str, int] = {}
    for v in sorted(g.labels):
        lab = g.labels[v]
        if not LABEL_RE.match(lab):
            raise ValidationError("BadLabel", v, repr(lab))
        if lab in seen:
            raise ValidationError("DuplicateLabel", v, lab)
        seen[lab] = v


def validate_rooted(g: MixedGraph, root: int) -> RootedNetwork:
    g = g.copy()
    for eid in sorted(g.edges):
        e = g.edges[eid]
        if e.is_loop:
            raise ValidationError("HasLoop", eid)
        if not e.directed:
            raise ValidationError("UndirectedEdge", eid)
    if root not in g.vertices:
        raise ValidationError("BadRootDegree", root, "root not in graph")
    if g.in_degree(root) != 0 or g.out_degree(root) != 1:
        raise ValidationError("BadRootDegree", root)
    for v in sorted(g.vertices):
        if v == root:
            continue
        ind, outd = g.in_degree(v), g.out_degree(v)
        if (ind, outd) == (1, 0):
            if v not in g.labels:
                raise ValidationError("UnlabeledLeaf", v)
        elif (ind, outd) not in ((1, 2), (2, 1)):
            raise ValidationError("BadVertexDegree", v, f"in={ind} out={outd}")
        elif v in g.labels:
            raise ValidationError("BadVertexDegree", v, "labelled vertex is not a leaf")
    if root in g.labels:
        raise ValidationError("BadRootDegree", root, "root carries a label")
    _check_labels(g)
    if not _acyclic(g):
        raise ValidationError("NotAcyclic")
    return RootedNetwork(g, root)


def validate_semidirected(g: MixedGraph) -> SemiDirectedNetwork:
    g = g.copy()
    for eid in sorted(g.edges):
        e = g.edges[eid]
        if e.is_loop and not e.directed:
            raise ValidationError("UndirectedLoop", eid)
    for v in sorted(g.vertices):
        d = g.degree(v)
        if v in g.labels:
            if d != 1:
                raise ValidationError("BadDegree", v, f"leaf of degree {d}")
        elif d == 1:
            raise ValidationError("UnlabeledLeaf", v)
        elif d != 3:
            raise ValidationError("BadDegree", v, f"degree {d}")
    _check_labels(g)
    if len(g.labels) < 2:
        raise ValidationError("TooFewLeaves")
    for eid in sorted(g.edges):
        e = g.edges[eid]
        if e.directed and e.b in g.labels:
            raise ValidationError("StrayDirectedEdge", eid)
    for v in sorted(g.vertices):
        if g.in_degree(v) not in (0, 2):
            raise ValidationError("BadReticulationInDegree", v)
    # one placement suffices here; the full set is computed lazily when asked for
    if first_placement(g) is None:
        raise ValidationError("NoRootedPartner")
    return SemiDirectedNetwork(g)


def _acyclic(g: MixedGraph) -> bool:
    indeg = {v: 0 for v in g.vertices}
    for e in g.edges.values():
        indeg[e.b] += 1
    stack = [v for v, d in indeg.items() if d == 0]
    seen = 0
    while stack:
        v = stack.pop()
        seen += 1
        for i in g._inc[v]:
            e = g.edges[i]
            if e.a == v:
                indeg[e.b] -= 1
                if indeg[e.b] == 0:
                    stack.append(e.b)
    return seen == len(g.vertices)


# ---------------------------------------------------------------------------
# rooted partners


def _placement_candidates(g: MixedGraph) -> list[int]:
    """Edges that can carry the root; every valid placement is among them.

    Undirected edges split a partner into out-trees, each topped by a
    reticulation except the one holding the root, so the root sits in the
    only reticulation-free undirected component (or on a loop, whose vertex
    is then a reticulation fed twice by the root child).
    """
    loops = sorted(e.id for e in g.edges.values() if e.is_loop)
    if loops:
        return loops[:1] if len(loops) == 1 else []
    comp = {v: v for v in g.vertices}

    def find(v: int) -> int:
        while comp[v] != v:
            comp[v] = comp[comp[v]]
            v = comp[v]
        return v

    for e in g.edges.values():
        if not e.directed:
            comp[find(e.a)] = find(e.b)
    tops = {find(v) for v in g.vertices} - {find(v) for v in g.vertices if g.in_degree(v) == 2}
    if len(tops) != 1:
        return []
    (top,) = tops
    return sorted(e.id for e in g.edges.values() if find(e.a) == top)


def _place_root(g: MixedGraph, eid: int) -> Placement | None:
    """Root ``g`` on edge ``eid`` and orient every undirected edge away from the root.

    Works on plain dictionaries: this runs for every edge of every network
    the explorer touches, so it avoids copying the graph.
    """
    T = g._next_vertex  # the root child that subdivides eid
    e0 = g.edges[eid]
    cnt = dict.fromkeys(g.vertices, 0)
    cnt[T] = 1
    und: dict[int, list] = {v: [] for v in g.vertices}
    und[T] = []
    arcs: list[tuple[int, int]] = []
    for e in g.edges.values():
        if e.id == eid:
            continue
        if e.directed:
            cnt[e.b] += 2 if e.is_loop else 1
            if not e.is_loop:
                arcs.append((e.a, e.b))
        else:
            und[e.a].append((e.id, e.b))
            und[e.b].append((e.id, e.a))
    h1, h2 = ("h", 0), ("h", 1)
    if not e0.directed:
        und[T] += [(h1, e0.a), (h2, e0.b)]
        und[e0.a].append((h1, T))
        und[e0.b].append((h2, T))
    elif e0.is_loop:
        cnt[e0.a] += 2
    else:
        und[T].append((h1, e0.a))
        und[e0.a].append((h1, T))
        cnt[e0.b] += 1
    need = {v: (2 if c >= 2 else 1) for v, c in cnt.items()}
    orient: dict = {}
    queue = [v for v in cnt if cnt[v] == need[v]]
    while queue:
        v = queue.pop()
        for key, x in und[v]:
            if key in orient:
                continue
            orient[key] = (v, x)
            cnt[x] += 1
            if cnt[x] > need[x]:
                return None
            if cnt[x] == need[x]:
                queue.append(x)
    n_und = sum(len(x) for x in und.values()) // 2
    if len(orient) != n_und or any(cnt[v] != need[v] for v in cnt):
        return None
    arcs.extend(orient.values())
    if e0.directed and not e0.is_loop:
        arcs.append((T, e0.b))
    # Kahn on the oriented graph (the root only feeds T, so it cannot close a cycle)
    indeg = dict.fromkeys(cnt, 0)
    out: dict[int, list[int]] = {v: [] for v in cnt}
    for a, b in arcs:
        indeg[b] += 1
        out[a].append(b)
    stack = [v for v, d in indeg.items() if d == 0]
    seen = 0
    while stack:
        v = stack.pop()
        seen += 1
        for w in out[v]:
            indeg[w] -= 1
            if indeg[w] == 0:
                stack.append(w)
    if seen != len(indeg):
        return None
    if e0.is_loop:
        halves = ((T, e0.a), (T, e0.a))
    elif e0.directed:
        halves = (orient[h1], (T, e0.b))
    else:
        halves = (orient[h1], orient[h2])
    orientation = {i: orient[i] for i in orient if not isinstance(i, tuple)}
    for e in g.edges.values():
        if e.directed and e.id != eid:
            orientation[e.id] = (e.a, e.b)
    return Placement(eid, g, orientation, halves)


def first_placement(g: MixedGraph) -> Placement | None:
    """Any one valid root placement of ``g``, or None."""
    for eid in _placement_candidates(g):
        p = _place_root(g, eid)
        if p is not None:
            return p
    return None


def partner_from_placement(p: Placement) -> RootedNetwork:
    return RootedNetwork(p.rooted_graph(), p.root)


def rooted_partners(n: SemiDirectedNetwork) -> list[RootedNetwork]:
    """All rooted partners up to isomorphism, ordered by canonical code."""
    found: dict[bytes, RootedNetwork] = {}
    for p in n.placements.values():
        r = partner_from_placement(p)
        found.setdefault(r.code, r)
    return [found[c] for c in sorted(found)]


def deroot(n: RootedNetwork) -> SemiDirectedNetwork:
    g = n.to_graph()
    rets = n.reticulations
    for i in list(g.edges):
        e = g.edges[i]
        if e.b not in rets:
            g.set_undirected(i)
    t = n.root_child
    g.remove_edge(n.root_edge)
    g.remove_vertex(n.root)
    if t in g.labels:
        raise ValidationError("TooFewLeaves", t)
    try:
        g.suppress(t, rooted=False)
    except Exception as exc:  # two reticulation edges leaving the root child
        raise ValidationError("NotDerootable", t, str(exc)) from None
    return SemiDirectedNetwork(g)


# ---------------------------------------------------------------------------
# cycles, bridges, classes


def _blocks(g: MixedGraph) -> list[list[int]]:
    """Edge partition into biconnected blocks; each loop is its own block."""
    disc: dict[int, int] = {}
    low: dict[int, int] = {}
    stack: list[int] = []
    out: list[list[int]] = []
    timer = [0]

    def dfs(v: int, via: int | None) -> None:
        disc[v] = low[v] = timer[0]
        timer[0] += 1
        for i in g._inc[v]:
            if i == via:
                continue
            e = g.edges[i]
            if e.is_loop:
                continue
            w = e.other(v)
            if w not in disc:
                stack.append(i)
                dfs(w, i)
                low[v] = min(low[v], low[w])
                if low[w] >= disc[v]:
                    block = []
                    while True:
                        j = stack.pop()
                        block.append(j)
                        if j == i:
                            break
                    out.append(sorted(block))
            elif disc[w] < disc[v]:
                stack.append(i)
                low[v] = min(low[v], disc[w])

    for v in sorted(g.vertices):
        if v not in disc:
            dfs(v, None)
    for i, e in g.edges.items():
        if e.is_loop:
            out.append([i])
    out.sort()
    return out


def _walk_cycle(g: MixedGraph, block: list[int]) -> tuple[int, ...]:
    es = [g.edges[i] for i in sorted(block)]
    if len(es) == 1:
        return (es[0].a,)
    start = min(min(e.a, e.b) for e in es)
    seq = [start]
    used: set[int] = set()
    cur = start
    while True:
        nxt = next(e for e in es if e.id not in used and cur in (e.a, e.b))
        used.add(nxt.id)
        cur = nxt.other(cur)
        if cur == start:
            return tuple(seq)
        seq.append(cur)


def underlying_cycles(n: Network) -> list[tuple[int, ...]]:
    """Every simple cycle of the underlying multigraph as a vertex sequence."""
    g = n._g
    out: list[tuple[int, ...]] = []
    for b in n.blocks:
        if len(b) == 1 and not g.edges[b[0]].is_loop:
            continue
        vs = set()
        for i in b:
            vs.update(g.edges[i].ends())
        if len(vs) == len(b):
            out.append(_walk_cycle(g, b))
            continue
        out.extend(_enumerate_cycles(g, b))
    return out


def _enumerate_cycles(g: MixedGraph, block: list[int]) -> list[tuple[int, ...]]:
    adj: dict[int, set[int]] = {}
    mult: dict[tuple[int, int], int] = {}
    for i in block:
        e = g.edges[i]
        adj.setdefault(e.a, set()).add(e.b)
        adj.setdefault(e.b, set()).add(e.a)
        key = (min(e.a, e.b), max(e.a, e.b))
        mult[key] = mult.get(key, 0) + 1
    out = [key for key, m in sorted(mult.items()) if m >= 2]
    for s in sorted(adj):
        path = [s]

        def extend(v: int) -> None:
            for w in sorted(adj[v]):
                if w == s and len(path) >= 3 and path[1] < path[-1]:
                    out.append(tuple(path))
                elif w > s and w not in path:
                    path.append(w)
                    extend(w)
                    path.pop()

        extend(s)
    return out


def level_class(n: Network) -> LevelClass:
    return n.level_class


def cut_edges(n: Network) -> frozenset[int]:
    out = n.cut_edges
    if isinstance(n, SemiDirectedNetwork):
        assert not any(n.edge(i).directed for i in out), "reticulation edge reported as cut edge"
    return out


def count_invariants(n: Network) -> Counts:
    g = n._g
    rets = len(n.reticulations)
    leaves = len(g.labels)
    extra = 1 if isinstance(n, RootedNetwork) else 0
    return Counts(
        vertices=len(g.vertices),
        edges=len(g.edges),
        reticulations=rets,
        tree_vertices=len(g.vertices) - rets - leaves - extra,
        leaves=leaves,
    )


def canonical_code(n: Network) -> bytes:
    return n.code


def isomorphic(a: Network, b: Network) -> bool:
    return a.kind == b.kind and a.code == b.code


def isomorphism(src: Network, dst: Network) -> dict[int, int]:
    """A leaf-fixing vertex map from ``src`` onto ``dst``; raises if none exists."""
    if src.code != dst.code:
        raise ValueError("networks are not isomorphic")
    inv = {i: v for v, i in dst.canonical_labeling.items()}
    return {v: inv[i] for v, i in src.canonical_labeling.items()}


def edge_map(src: Network, dst: Network, vmap: dict[int, int]) -> dict[int, int]:
    """Extend a vertex isomorphism to edges, pairing parallel edges in id order."""
    pools: dict[tuple, list[int]] = {}
    for i in sorted(dst._g.edges):
        e = dst._g.edges[i]
        key = (e.a, e.b, True) if e.directed else (min(e.a, e.b), max(e.a, e.b), False)
        pools.setdefault(key, []).append(i)
    out = {}
    for i in sorted(src._g.edges):
        e = src._g.edges[i]
        a, b = vmap[e.a], vmap[e.b]
        key = (a, b, True) if e.directed else (min(a, b), max(a, b), False)
        out[i] = pools[key].pop(0)
    return out


# ---------------------------------------------------------------------------
# convenience builders


def build_graph(edges: Iterable[tuple], labels: dict) -> MixedGraph:
    """Build a graph from ``(a, b, directed)`` triples over arbitrary hashable names.

    Names present in ``labels`` become leaves carrying that label.
    """
    g = MixedGraph()
    ids: dict = {}

    def vid(x):
        if x not in ids:
            ids[x] = g.add_vertex(labels.get(x))
        return ids[x]

    for name in labels:
        vid(name)
    for a, b, d in edges:
        g.add_edge(vid(a), vid(b), d)
    g.names = ids  # type: ignore[attr-defined]
    return g


def rooted(edges: Iterable[tuple[str, str]], root: str = "rho") -> RootedNetwork:
    """Build a rooted network from directed ``(tail, head)`` pairs.

    Vertices whose names start with ``x`` are leaves labelled by their name.
    """
    edges = list(edges)
    names = {a for a, _ in edges} | {b for _, b in edges}
    labels = {v: v for v in names if v.startswith("x")}
    g = build_graph(((a, b, True) for a, b in edges), labels)
    return validate_rooted(g, g.names[root])  # type: ignore[attr-defined]


def semidirected(edges: Iterable[tuple[str, str, bool]]) -> SemiDirectedNetwork:
    """Build a semi-directed network from ``(a, b, directed)`` triples; ``x*`` names are leaves."""
    edges = list(edges)
    names = {e[0] for e in edges} | {e[1] for e in edges}
    labels = {v: v for v in names if v.startswith("x")}
    return validate_semidirected(build_graph(edges, labels))
