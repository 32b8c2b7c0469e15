"""Exhaustive enumeration of small network tiers and their move graphs.

A tier is every network on a leaf set with a given reticulation number and
level class, up to isomorphism.  Tiers are produced two ways that share no
code beyond validation: by closing trees under CET+ and by matching degree
stubs into multigraphs and orienting them.  Space graphs join tier members
one move apart; distances and diameters come from breadth-first search.
"""

from __future__ import annotations

import json
import logging
import os
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Iterable

from .errors import CapExceeded, PreconditionViolated, Unreachable, ValidationError
from .graph import MixedGraph
from .moves import (
    Cet,
    CetMinus,
    Move,
    MoveSequence,
    apply_cet_minus,
    cet_minus_neighbors,
    cet_neighbors,
    cet_plus_neighbors,
    is_cet1,
)
from .network import (
    LevelClass,
    Network,
    RootedNetwork,
    SemiDirectedNetwork,
    _blocks,
    first_placement,
    partner_from_placement,
    rooted_partners,
    validate_rooted,
    validate_semidirected,
)
from .standard_form import length_bound_connect, natural_key

log = logging.getLogger(__name__)

MAX_LEAVES = 5
MAX_RETICULATIONS = 4
MAX_NODES = 200_000

CLASSES = {"level1": LevelClass.LEVEL1, "almost": LevelClass.ALMOST_LEVEL1, "all": LevelClass.NEITHER}
MOVE_KINDS = ("cet", "cet1", "extended")


@dataclass(frozen=True)
class Tier:
    leaves: tuple[str, ...]
    k: int
    cls: str = "level1"  # "level1" | "almost" | "all"
    kind: str = "semidirected"  # "semidirected" | "rooted"

    def __post_init__(self) -> None:
        object.__setattr__(self, "leaves", tuple(sorted(self.leaves, key=natural_key)))
        if self.cls not in CLASSES:
            raise ValueError(f"unknown class {self.cls!r}")
        if self.kind not in ("semidirected", "rooted"):
            raise ValueError(f"unknown network kind {self.kind!r}")

    @classmethod
    def of(cls, n: int, k: int, klass: str = "level1", kind: str = "semidirected") -> "Tier":
        return cls(tuple(f"x{i}" for i in range(1, n + 1)), k, klass, kind)

    @property
    def n(self) -> int:
        return len(self.leaves)

    @property
    def bound(self) -> LevelClass:
        return CLASSES[self.cls]

    def admits(self, net: Network) -> bool:
        return net.k == self.k and net.taxa == frozenset(self.leaves) and net.level_class.within(self.bound)

    def label(self) -> str:
        return f"{self.kind}:n={self.n}:k={self.k}:{self.cls}"


def check_caps(t: Tier, max_leaves: int = MAX_LEAVES, max_k: int = MAX_RETICULATIONS) -> None:
    if t.n > max_leaves or t.k > max_k:
        raise CapExceeded(f"tier {t.label()} exceeds caps (|X| <= {max_leaves}, k <= {max_k})")
    if t.n < 2:
        raise PreconditionViolated("at least two leaves are needed")
    if t.cls != "all" and t.k > t.n - 1:
        raise PreconditionViolated("level-1 tiers need k <= |X| - 1")


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("CETLAB_THREADS", "1")))
    except ValueError:
        return 1


# ---------------------------------------------------------------------------
# trees


def unrooted_trees(leaves: Iterable[str]) -> dict[bytes, SemiDirectedNetwork]:
    """All unrooted binary trees on ``leaves`` by stepwise leaf insertion."""
    leaves = sorted(leaves, key=natural_key)
    g = MixedGraph()
    a, b = g.add_vertex(leaves[0]), g.add_vertex(leaves[1])
    g.add_edge(a, b, False)
    level = {None: g}
    for lab in leaves[2:]:
        nxt: dict[bytes, MixedGraph] = {}
        for h in level.values():
            for eid in sorted(h.edges):
                h2 = h.copy()
                w, _, _ = h2.subdivide(eid, rooted=False)
                h2.add_edge(w, h2.add_vertex(lab), False)
                net = validate_semidirected(h2)
                nxt.setdefault(net.code, h2)
        level = nxt  # type: ignore[assignment]
    out = {}
    for h in level.values():
        net = validate_semidirected(h)
        out[net.code] = net
    return out


def rooted_trees(leaves: Iterable[str]) -> dict[bytes, RootedNetwork]:
    leaves = sorted(leaves, key=natural_key)
    g = MixedGraph()
    rho, t = g.add_vertex(), g.add_vertex()
    g.add_edge(rho, t, True)
    g.add_edge(t, g.add_vertex(leaves[0]), True)
    g.add_edge(t, g.add_vertex(leaves[1]), True)
    level: dict = {None: g}
    for lab in leaves[2:]:
        nxt: dict = {}
        for h in level.values():
            for eid in sorted(h.edges):
                h2 = h.copy()
                w, _, _ = h2.subdivide(eid, rooted=True)
                h2.add_edge(w, h2.add_vertex(lab), True)
                nxt.setdefault(validate_rooted(h2, rho).code, h2)
        level = nxt
    out = {}
    for h in level.values():
        net = validate_rooted(h, rho)
        out[net.code] = net
    return out


# ---------------------------------------------------------------------------
# method A: closure under reticulation-adding moves


def _cactus_ok(g: MixedGraph) -> bool:
    """Non-bridge blocks are single cycles and no two cycles share a vertex."""
    seen: set[int] = set()
    for b in _blocks(g):
        if len(b) == 1 and not g.edges[b[0]].is_loop:
            continue
        vs = set()
        for i in b:
            e = g.edges[i]
            vs.update((e.a, e.b))
        if len(vs) != len(b) or vs & seen:
            return False
        seen |= vs
    return True


def _closure_semidirected(t: Tier) -> dict[bytes, SemiDirectedNetwork]:
    level: dict[bytes, SemiDirectedNetwork] = unrooted_trees(t.leaves)
    pre = None if t.cls == "all" else _cactus_ok
    for _ in range(t.k):
        nxt: dict[bytes, SemiDirectedNetwork] = {}
        for net in level.values():
            for _, r in cet_plus_neighbors(net, prefilter=pre):
                if r.code not in nxt and r.level_class.within(t.bound):
                    nxt[r.code] = r
        level = nxt
        if len(level) > MAX_NODES:
            raise CapExceeded("tier too large")
    return level


def _cactus_extensions(net: Network) -> tuple[set[int], dict[int, set[int]]]:
    """For a cactus ``net``: its bridges, and for each bridge the vertices a new cycle through it may reach.

    Joining bridges e1 and e2 by a new edge keeps the graph a cactus exactly
    when some endpoint of e2 is reachable from e1 along bridges, off every
    existing cycle.
    """
    g = net._g
    bridges = set(net.cut_edges)
    on_cycle = {v for c in net.simple_cycles for v in c.vertices}
    adj: dict[int, list[tuple[int, int]]] = {}
    for i in bridges:
        e = g.edges[i]
        if e.a not in on_cycle and e.b not in on_cycle:
            adj.setdefault(e.a, []).append((i, e.b))
            adj.setdefault(e.b, []).append((i, e.a))
    reach: dict[int, set[int]] = {}
    for i in bridges:
        e = g.edges[i]
        seen = {v for v in (e.a, e.b) if v not in on_cycle}
        stack = list(seen)
        while stack:
            v = stack.pop()
            for j, w in adj.get(v, ()):
                if j != i and w not in seen:
                    seen.add(w)
                    stack.append(w)
        reach[i] = seen
    return bridges, reach


def _closure_rooted(t: Tier) -> dict[bytes, RootedNetwork]:
    level: dict[bytes, RootedNetwork] = rooted_trees(t.leaves)
    for _ in range(t.k):
        nxt: dict[bytes, RootedNetwork] = {}
        rejected: set[bytes] = set()
        for net in level.values():
            ids = sorted(net.edges)
            cactus = t.cls != "all"
            if cactus:
                bridges, reach = _cactus_extensions(net)
            for e1 in ids:
                if cactus and e1 not in bridges:
                    continue
                for e2 in [None, *ids]:
                    if e2 == e1:
                        continue
                    if cactus and e2 is not None:
                        f = net.edges[e2]
                        if e2 not in bridges or not ({f.a, f.b} & reach[e1]):
                            continue
                    for half in ((0, 1) if e2 is None else (None,)):
                        g = net.to_graph()
                        v, h1, h2 = g.subdivide(e1, rooted=True)
                        target = e2 if e2 is not None else (h1 if half == 0 else h2)
                        u, _, _ = g.subdivide(target, rooted=True)
                        g.add_edge(u, v, True)
                        try:
                            r = validate_rooted(g, net.root)
                        except ValidationError:
                            continue
                        if r.code in nxt or r.code in rejected:
                            continue
                        if r.level_class.within(t.bound):
                            nxt[r.code] = r
                        else:
                            rejected.add(r.code)
        level = nxt
    return level


# ---------------------------------------------------------------------------
# method B: stub matching into multigraphs, then orientation


class _UF:
    def __init__(self, n: int):
        self.p = list(range(n))

    def find(self, x: int) -> int:
        while self.p[x] != x:
            self.p[x] = self.p[self.p[x]]
            x = self.p[x]
        return x


def _underlying_graphs(n: int, m: int, cactus: bool, max_cycles: int):
    """Connected multigraphs with ``n`` labelled degree-1 and ``m`` unlabelled degree-3 vertices.

    Stubs are matched vertex by vertex with non-decreasing partners, and an
    untouched internal vertex may only be used in index order, which removes
    most relabelled duplicates; the caller deduplicates the rest.
    """
    total = n + m
    stubs = [1] * n + [3] * m
    edges: list[tuple[int, int]] = []

    def cycles_ok() -> bool:
        g = MixedGraph()
        for v in range(total):
            g.add_vertex(vid=v)
        for a, b in edges:
            g.add_edge(a, b, False)
        if cactus and not _cactus_ok(g):
            return False
        cyc = sum(1 for b in _blocks(g) if len(b) > 1 or g.edges[b[0]].is_loop)
        return cyc <= max_cycles

    def connected() -> bool:
        uf = _UF(total)
        for a, b in edges:
            uf.p[uf.find(a)] = uf.find(b)
        return len({uf.find(v) for v in range(total)}) == 1

    def rec(touched: int, v: int, last: int):
        while v < total and stubs[v] == 0:
            v, last = v + 1, -1
        if v == total:
            if connected():
                yield list(edges)
            return
        if v >= n + touched and v >= n:
            return  # an internal vertex nobody reaches: the graph would be disconnected
        limit = min(total - 1, n + touched)  # first untouched internal vertex
        for w in range(max(v, last), limit + 1):
            if w < n and (m > 0 or w == v):
                continue
            if w == v:
                if v < n or stubs[v] < 2:
                    continue
            elif stubs[w] == 0:
                continue
            stubs[v] -= 1
            stubs[w] -= 1
            edges.append((v, w))
            nt = touched + (1 if w == n + touched else 0)
            closes = w == v or _same_component(edges[:-1], v, w, total)
            if not closes or cycles_ok():
                yield from rec(nt, v, w)
            edges.pop()
            stubs[v] += 1
            stubs[w] += 1

    yield from rec(0, 0, -1)


def _same_component(edges, a: int, b: int, total: int) -> bool:
    uf = _UF(total)
    for x, y in edges:
        uf.p[uf.find(x)] = uf.find(y)
    return uf.find(a) == uf.find(b)


def _orientations(g: MixedGraph, k: int, cactus: bool):
    """Yield lists of (edge id, head) choosing which edges become reticulation edges."""
    internal = sorted(v for v in g.vertices if v not in g.labels)
    if cactus:
        cyc = [b for b in _blocks(g) if len(b) > 1 or g.edges[b[0]].is_loop]
        if len(cyc) != k:
            return
        options = []
        for b in cyc:
            opts = []
            vs = sorted({x for i in b for x in g.edges[i].ends()})
            for r in vs:
                opts.append([(i, r) for i in b if r in g.edges[i].ends()])
            options.append(opts)
        for combo in product(*options):
            yield [x for part in combo for x in part]
        return
    bridges = {b[0] for b in _blocks(g) if len(b) == 1 and not g.edges[b[0]].is_loop}
    for rets in combinations(internal, k):
        per = []
        for r in rets:
            inc = [i for i in g._inc[r] if i not in bridges]
            loops = [i for i in inc if g.edges[i].is_loop]
            if loops:
                per.append([[(loops[0], r)]])
                continue
            per.append([[(i, r), (j, r)] for i, j in combinations(inc, 2)])
        for combo in product(*per):
            chosen = [x for part in combo for x in part]
            ids = [i for i, _ in chosen]
            if len(ids) == len(set(ids)):
                yield chosen


def _direct_semidirected(t: Tier) -> dict[bytes, SemiDirectedNetwork]:
    n, k = t.n, t.k
    m = n - 2 + 2 * k
    cactus = t.cls != "all"
    out: dict[bytes, SemiDirectedNetwork] = {}
    seen_under: set[bytes] = set()
    rejected: set[bytes] = set()
    for edges in _underlying_graphs(n, m, cactus, k):
        g = MixedGraph()
        for v in range(n + m):
            g.add_vertex(t.leaves[v] if v < n else None, vid=v)
        for a, b in edges:
            g.add_edge(a, b, False)
        key = SemiDirectedNetwork(g).code  # drop relabelled duplicates of the same multigraph
        if key in seen_under:
            continue
        seen_under.add(key)
        for orient in _orientations(g, k, cactus):
            h = g.copy()
            for eid, head in orient:
                e = h.edges[eid]
                h.set_directed(eid, e.other(head) if not e.is_loop else head, head)
            try:
                net = validate_semidirected(h)
            except ValidationError:
                continue
            # the class is an isomorphism invariant, so each code is judged once
            code = net.code
            if code in out or code in rejected:
                continue
            if t.cls == "all" or net.level_class.within(t.bound):
                out[code] = net
            else:
                rejected.add(code)
        if len(out) > MAX_NODES:
            raise CapExceeded("tier too large")
    return out


# ---------------------------------------------------------------------------
# tiers


_TIER_CACHE: dict[tuple[Tier, str], dict[bytes, Network]] = {}


def enumerate_tier_by(t: Tier, method: str) -> dict[bytes, Network]:
    """Tier members keyed by canonical code, using method ``"closure"`` or ``"direct"``.

    Rooted tiers use ``"closure"`` (trees plus reticulation edges) or
    ``"partners"`` (rooted partners of the matching semi-directed tier).
    """
    check_caps(t)
    key = (t, method)
    if key in _TIER_CACHE:
        return _TIER_CACHE[key]
    if t.kind == "semidirected":
        if method == "closure":
            res: dict = _closure_semidirected(t)
        elif method == "direct":
            res = _direct_semidirected(t)
        else:
            raise ValueError(method)
    else:
        if method == "closure":
            res = _closure_rooted(t)
        elif method == "partners":
            semi = enumerate_tier(Tier(t.leaves, t.k, t.cls, "semidirected"))
            res = {}
            for s in semi.values():
                for p in rooted_partners(s):  # type: ignore[arg-type]
                    if p.level_class.within(t.bound):
                        res.setdefault(p.code, p)
        else:
            raise ValueError(method)
    res = {c: res[c] for c in sorted(res)}
    _TIER_CACHE[key] = res
    return res


def enumerate_tier(t: Tier) -> dict[bytes, Network]:
    return enumerate_tier_by(t, "direct" if t.kind == "semidirected" else "partners")


def cross_check_tier(t: Tier) -> dict:
    """Run both enumeration methods and report whether they agree."""
    if t.kind == "semidirected":
        a, b = enumerate_tier_by(t, "closure"), enumerate_tier_by(t, "direct")
    else:
        a, b = enumerate_tier_by(t, "closure"), enumerate_tier_by(t, "partners")
    return {"tier": t.label(), "count_a": len(a), "count_b": len(b), "agree": set(a) == set(b)}


# ---------------------------------------------------------------------------
# space graphs


def _neighbors(net: Network, move_kind: str, bound: LevelClass, max_k: int | None) -> list[tuple[bytes, Move, Network]]:
    out = []
    for m, r in cet_neighbors(net):
        if move_kind == "cet1" and not is_cet1(net, m):
            continue
        if r.level_class.within(bound):
            out.append((r.code, m, r))
    if move_kind == "extended":
        pre = None if bound is LevelClass.NEITHER else _cactus_ok
        if max_k is None or net.k < max_k:
            for m, r in cet_plus_neighbors(net, prefilter=pre):  # type: ignore[arg-type]
                if r.level_class.within(bound):
                    out.append((r.code, m, r))
        for m, r in cet_minus_neighbors(net):  # type: ignore[arg-type]
            if r.level_class.within(bound):
                out.append((r.code, m, r))
    return out


# CET neighbourhoods by canonical code, shared by the cet and cet1 graphs
_CET_CACHE: dict[bytes, list[tuple[bytes, Move, LevelClass, bool]]] = {}


def _cet_summary(net: Network) -> list[tuple[bytes, Move, LevelClass, bool]]:
    if net.code not in _CET_CACHE:
        semi = isinstance(net, SemiDirectedNetwork)
        _CET_CACHE[net.code] = [
            (r.code, m, r.level_class, semi and is_cet1(net, m)) for m, r in cet_neighbors(net)
        ]
    return _CET_CACHE[net.code]


def _neighbor_job(args):
    net, move_kind, bound, max_k = args
    if move_kind == "extended":
        return [(c, m) for c, m, _ in _neighbors(net, move_kind, bound, max_k)]
    return [
        (c, m) for c, m, cls, local in _cet_summary(net)
        if cls.within(bound) and (move_kind == "cet" or local)
    ]


@dataclass
class SpaceGraph:
    tier: Tier
    move_kind: str
    nodes: dict[bytes, Network]
    adjacency: dict[bytes, dict[bytes, Move]] = field(default_factory=dict)

    @property
    def edge_count(self) -> int:
        return sum(len(v) for v in self.adjacency.values()) // 2

    def is_symmetric(self) -> bool:
        return all(a in self.adjacency[b] for a, nb in self.adjacency.items() for b in nb)


_GRAPH_CACHE: dict[tuple[Tier, str], SpaceGraph] = {}


def build_space_graph(t: Tier, move_kind: str = "cet", workers: int | None = None) -> SpaceGraph:
    """The move graph on a tier; results are cached, so treat them as read-only."""
    if move_kind not in MOVE_KINDS:
        raise ValueError(f"unknown move kind {move_kind!r}")
    if (t, move_kind) in _GRAPH_CACHE:
        return _GRAPH_CACHE[(t, move_kind)]
    if move_kind == "extended":
        if t.kind != "semidirected":
            raise PreconditionViolated("extended moves act on semi-directed networks")
        top = t.n - 1
        nodes: dict[bytes, Network] = {}
        for k in range(top + 1):
            nodes.update(enumerate_tier(Tier(t.leaves, k, t.cls, t.kind)))
        max_k: int | None = top
    else:
        if t.kind == "rooted" and move_kind == "cet1":
            raise PreconditionViolated("CET1 is defined for semi-directed networks")
        nodes = dict(enumerate_tier(t))
        max_k = None
    sg = SpaceGraph(t, move_kind, nodes, {c: {} for c in nodes})
    jobs = [(nodes[c], move_kind, t.bound, max_k) for c in nodes]
    workers = workers or _workers()
    if workers > 1 and len(jobs) > 32:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_neighbor_job, jobs, chunksize=8))
    else:
        results = [_neighbor_job(j) for j in jobs]
    for c, res in zip(nodes, results):
        for d, m in res:
            if d in nodes and d != c and d not in sg.adjacency[c]:
                sg.adjacency[c][d] = m
    _GRAPH_CACHE[(t, move_kind)] = sg
    return sg


def _bfs(adj: dict[bytes, dict[bytes, Move]], src: bytes) -> dict[bytes, int]:
    dist = {src: 0}
    q = deque([src])
    while q:
        x = q.popleft()
        for y in adj[x]:
            if y not in dist:
                dist[y] = dist[x] + 1
                q.append(y)
    return dist


def components(sg: SpaceGraph) -> list[list[bytes]]:
    seen: set[bytes] = set()
    out = []
    for c in sorted(sg.nodes):
        if c in seen:
            continue
        comp = sorted(_bfs(sg.adjacency, c))
        seen.update(comp)
        out.append(comp)
    return out


def connectivity_report(sg: SpaceGraph) -> dict:
    comps = components(sg)
    diameter = None
    if len(comps) == 1:
        diameter = max(max(_bfs(sg.adjacency, c).values()) for c in sg.nodes)
    bound = length_bound_connect(sg.tier.n, sg.tier.k) if sg.move_kind != "extended" else None
    return {
        "tier": sg.tier.label() if sg.move_kind != "extended" else sg.tier.label().replace(f":k={sg.tier.k}:", f":k=0..{sg.tier.n - 1}:"),
        "move_kind": sg.move_kind,
        "node_count": len(sg.nodes),
        "edge_count": sg.edge_count,
        "component_count": len(comps),
        "component_sizes": [len(c) for c in comps],
        "max_component_fraction": max((len(c) for c in comps), default=0) / max(1, len(sg.nodes)),
        "diameter": diameter,
        "bound": bound,
        "bound_satisfied": None if (bound is None or diameter is None) else diameter <= bound,
    }


def report_json(report: dict) -> str:
    keys = ("tier", "move_kind", "node_count", "component_count", "diameter", "bound", "bound_satisfied")
    return json.dumps({k: report[k] for k in keys}, sort_keys=True)


# ---------------------------------------------------------------------------
# distances


def move_distance(
    a: Network,
    b: Network,
    move_kind: str = "cet",
    class_constraint: LevelClass | str = LevelClass.ALMOST_LEVEL1,
    max_nodes: int = MAX_NODES,
) -> int:
    """Exact shortest move distance by bidirectional breadth-first search."""
    bound = CLASSES[class_constraint] if isinstance(class_constraint, str) else class_constraint
    if a.kind != b.kind or a.taxa != b.taxa:
        raise PreconditionViolated("networks must share kind and leaf set")
    if move_kind != "extended" and a.k != b.k:
        raise PreconditionViolated("plain CET keeps the reticulation number")
    if a.code == b.code:
        return 0
    max_k = a.n - 1 if bound is not LevelClass.NEITHER else max(a.k, b.k, a.n - 1)
    nets = {a.code: a, b.code: b}
    cache: dict[bytes, list[bytes]] = {}

    def nbrs(c: bytes) -> list[bytes]:
        if c not in cache:
            res = _neighbors(nets[c], move_kind, bound, max_k if move_kind == "extended" else None)
            for d, _, r in res:
                nets.setdefault(d, r)
            cache[c] = sorted({d for d, _, _ in res})
        return cache[c]

    da, db = {a.code: 0}, {b.code: 0}
    qa, qb = [a.code], [b.code]
    while qa and qb:
        if len(da) + len(db) > max_nodes:
            raise CapExceeded("distance search exceeded node cap")
        # expand the smaller frontier by one full layer
        if len(qa) <= len(qb):
            qa, hit = _layer(qa, da, db, nbrs)
        else:
            qb, hit = _layer(qb, db, da, nbrs)
        if hit is not None:
            return hit
    raise Unreachable("networks are in different components")


def _layer(frontier, dist, other, nbrs):
    nxt = []
    best = None
    for x in frontier:
        for y in nbrs(x):
            if y in other:
                cand = dist[x] + 1 + other[y]
                best = cand if best is None else min(best, cand)
            if y not in dist:
                dist[y] = dist[x] + 1
                nxt.append(y)
    return nxt, best


def shortest_path(
    a: Network,
    b: Network,
    move_kind: str = "cet",
    class_constraint: LevelClass | str = LevelClass.ALMOST_LEVEL1,
    max_nodes: int = MAX_NODES,
) -> MoveSequence:
    """A minimum-length move sequence from ``a`` to ``b`` (plain breadth-first search)."""
    bound = CLASSES[class_constraint] if isinstance(class_constraint, str) else class_constraint
    if a.kind != b.kind or a.taxa != b.taxa:
        raise PreconditionViolated("networks must share kind and leaf set")
    if move_kind != "extended" and a.k != b.k:
        raise PreconditionViolated("plain CET keeps the reticulation number")
    max_k = a.n - 1 if bound is not LevelClass.NEITHER else max(a.k, b.k, a.n - 1)
    parent: dict[bytes, tuple[bytes, Move] | None] = {a.code: None}
    nets = {a.code: a}
    q = deque([a.code])
    while q and b.code not in parent:
        c = q.popleft()
        for d, m, r in _neighbors(nets[c], move_kind, bound, max_k if move_kind == "extended" else None):
            if d not in parent:
                parent[d] = (c, m)
                nets[d] = r
                q.append(d)
        if len(parent) > max_nodes:
            raise CapExceeded("path search exceeded node cap")
    if b.code not in parent:
        raise Unreachable("networks are in different components")
    moves = []
    c = b.code
    while parent[c] is not None:
        c, m = parent[c]
        moves.append(m)
    seq = MoveSequence(a, [], bound)
    for m in reversed(moves):
        seq.push(m)
    return seq


def all_pairs_distances(sg: SpaceGraph) -> dict[bytes, dict[bytes, int]]:
    return {c: _bfs(sg.adjacency, c) for c in sorted(sg.nodes)}


def verify_metric_axioms(leaves: Iterable[str], cls: str = "level1", move_kind: str = "extended") -> dict:
    t = Tier(tuple(leaves), 0, cls)
    sg = build_space_graph(t, move_kind)
    d = all_pairs_distances(sg)
    codes = sorted(sg.nodes)
    inf = float("inf")

    def dist(x, y):
        return d[x].get(y, inf)

    identity = all(dist(x, x) == 0 for x in codes) and all(
        dist(x, y) > 0 for x in codes for y in codes if x != y
    )
    symmetric = all(dist(x, y) == dist(y, x) for x in codes for y in codes)
    triangle = all(dist(x, z) <= dist(x, y) + dist(y, z) for x in codes for y in codes for z in codes)
    finite = all(dist(x, y) < inf for x in codes for y in codes)
    return {
        "tier": t.label(),
        "node_count": len(codes),
        "identity": identity,
        "symmetry": symmetric,
        "triangle": triangle,
        "connected": finite,
    }


# ---------------------------------------------------------------------------
# across tiers


def reduce_to_tree(net: SemiDirectedNetwork, general: bool = False) -> list[SemiDirectedNetwork]:
    """Remove reticulations one CET- at a time, in the order the connectivity argument uses.

    Level-1 networks take the reticulations in id order.  With ``general``
    the order comes from a rooted partner: a reticulation is removed only
    after every reticulation above it.
    """
    if general:
        partner = partner_from_placement(first_placement(net._g))
        depth = {r: sum(1 for s in partner.reticulations if partner.is_ancestor(s, r)) for r in net.reticulations}
        order = sorted(net.reticulations, key=lambda r: (depth[r], r))
    else:
        order = sorted(net.reticulations)
    path = [net]
    cur = net
    for r in order:
        ins = sorted(e.id for e in cur.incident(r) if e.directed and e.b == r)
        loops = [i for i in ins if cur.edge(i).is_loop]
        options = loops or [i for i in ins if cur.edge(i).a not in cur.reticulations]
        if not options:
            raise PreconditionViolated(f"no removable reticulation edge at {r}")
        cur = apply_cet_minus(cur, CetMinus(options[0]))
        path.append(cur)
    return path


def verify_across_tiers(leaves: Iterable[str], cls: str = "level1", full_graph: bool = True) -> dict:
    """Check that every network reduces to a tree by CET- and that trees are CET-connected.

    Those two facts already make the extended move graph connected.  With
    ``full_graph`` the extended graph is also built and its components
    counted directly; skip that for tiers too large to build.
    """
    leaves = tuple(leaves)
    top = len(leaves) - 1
    bound = CLASSES[cls]
    replay_ok = True
    checked = 0
    failures: list[str] = []
    for k in range(1, top + 1):
        for net in enumerate_tier(Tier(leaves, k, cls)).values():
            checked += 1
            try:
                path = reduce_to_tree(net, general=(cls == "all"))  # type: ignore[arg-type]
            except Exception as exc:  # report, do not abort the sweep
                replay_ok = False
                failures.append(f"k={k}: {exc}")
                continue
            in_class = cls == "all" or all(p.level_class.within(bound) for p in path)
            if len(path) != k + 1 or path[-1].k != 0 or not in_class:
                replay_ok = False
                failures.append(f"k={k}: bad reduction")
    trees = build_space_graph(Tier(leaves, 0, cls), "cet")
    trees_connected = len(components(trees)) == 1
    if full_graph:
        ext_components: int | None = len(components(build_space_graph(Tier(leaves, 0, cls), "extended")))
        ext_connected = ext_components == 1
    else:
        ext_components = None
        ext_connected = replay_ok and trees_connected
    return {
        "leaves": list(leaves),
        "class": cls,
        "networks_checked": checked,
        "reductions_ok": replay_ok,
        "failures": failures[:10],
        "trees_connected": trees_connected,
        "extended_components": ext_components,
        "extended_connected": ext_connected,
    }
