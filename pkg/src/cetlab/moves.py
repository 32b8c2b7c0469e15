"""CET, CET1, CET+ and CET- on rooted and semi-directed networks.

Moves name edges and vertices by their ids in the network they are applied
to.  Application never mutates the input; it returns a freshly validated
network together with the ids of the edges it created, which is what
:func:`inverse_move` and the sequence builders rely on.
"""

from __future__ import annotations

import enum
import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Iterator, Union

from .errors import InvalidMove, NoPath, PreconditionViolated, ValidationError
from .graph import MixedGraph
from .network import (
    LevelClass,
    Network,
    RootedNetwork,
    SemiDirectedNetwork,
    validate_rooted,
    validate_semidirected,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Cet:
    cut_edge: int
    kept_end: int
    recipient: int


@dataclass(frozen=True)
class CetPlus:
    variant: str  # "loop" or "two_edge"
    first_edge: int
    second_edge: int | None = None
    second_half: int | None = None  # 0/1: a-side/b-side half of the subdivided first edge
    head_choice: str | None = None  # "first" (a-side) or "second" (b-side)


@dataclass(frozen=True)
class CetMinus:
    ret_edge: int


Move = Union[Cet, CetPlus, CetMinus]


@dataclass(frozen=True)
class Applied:
    network: Network
    created: int | None = None  # new cut edge (CET) or new reticulation edge (CET+)
    merged: int | None = None  # edge produced by suppressing the freed end (CET)
    identity: bool = False


class ParallelEffect(enum.Enum):
    NONE = "none"
    RELOCATES_PARALLEL_PAIR = "relocates"
    EXCHANGES_LOOP_AND_PAIRS = "exchanges"


# ---------------------------------------------------------------------------
# helpers


def _side(n: Network, cut: int, start: int) -> tuple[set[int], set[int]]:
    """Vertices and edges reachable from ``start`` without crossing edge ``cut``."""
    g = n._g
    seen = {start}
    edges: set[int] = set()
    todo = [start]
    while todo:
        x = todo.pop()
        for i in g._inc[x]:
            if i == cut:
                continue
            edges.add(i)
            y = g.edges[i].other(x)
            if y not in seen:
                seen.add(y)
                todo.append(y)
    return seen, edges


def donors(n: Network, m: Cet) -> list[int]:
    e = n.edge(m.cut_edge)
    u = e.other(m.kept_end)
    return [i for i in n._g._inc[u] if i != m.cut_edge]


def _revalidate(n: Network, g: MixedGraph) -> Network:
    try:
        if isinstance(n, RootedNetwork):
            return validate_rooted(g, n.root)
        return validate_semidirected(g)
    except ValidationError as exc:
        raise InvalidMove(f"result is not a valid network: {exc}") from None


# ---------------------------------------------------------------------------
# CET


def _check_cet(n: Network, m: Cet) -> tuple[int, int, set[int]]:
    g = n._g
    if m.cut_edge not in g.edges:
        raise InvalidMove(f"no edge {m.cut_edge}")
    if m.cut_edge not in n.cut_edges:
        raise InvalidMove(f"edge {m.cut_edge} is not a cut edge")
    e = g.edges[m.cut_edge]
    v = m.kept_end
    if v not in (e.a, e.b):
        raise InvalidMove(f"vertex {v} is not an end of edge {m.cut_edge}")
    u = e.other(v)
    if u in g.labels:
        raise InvalidMove("the suppressed end is a leaf")
    if u in n.reticulations:
        raise InvalidMove("the suppressed end is a reticulation")
    rooted = isinstance(n, RootedNetwork)
    if rooted:
        if e.a != u:
            raise InvalidMove("the suppressed end must be the tail of the cut edge")
        if u == n.root:
            raise InvalidMove("the cut edge is incident with the root")
    _, side_edges = _side(n, m.cut_edge, u)
    if not rooted:
        placements = n.placements  # type: ignore[attr-defined]
        if m.cut_edge not in placements and not (side_edges & placements.keys()):
            raise InvalidMove("no rooted partner has the suppressed end as parent or root-child sibling")
    dons = [i for i in g._inc[u] if i != m.cut_edge]
    if m.recipient not in side_edges or m.recipient in dons:
        raise InvalidMove(f"edge {m.recipient} is not a recipient for this cut")
    return u, v, side_edges


def _apply_cet(n: Network, m: Cet) -> Applied:
    u, v, _ = _check_cet(n, m)
    rooted = isinstance(n, RootedNetwork)
    g = n.to_graph()
    g.remove_edge(m.cut_edge)
    merged = g.suppress(u, rooted)
    w, _, _ = g.subdivide(m.recipient, rooted)
    created = g.add_edge(w, v, rooted)
    out = _revalidate(n, g)
    return Applied(out, created, merged, out.code == n.code)


def apply_cet_rooted(n: RootedNetwork, m: Cet) -> RootedNetwork:
    res = _apply_cet(n, m)
    if res.identity:
        log.warning("CET %s produced an isomorphic network", m)
    return res.network  # type: ignore[return-value]


def apply_cet_semidirected(n: SemiDirectedNetwork, m: Cet) -> SemiDirectedNetwork:
    res = _apply_cet(n, m)
    if res.identity:
        log.warning("CET %s produced an isomorphic network", m)
    return res.network  # type: ignore[return-value]


def _cet_candidates(n: Network) -> Iterator[Cet]:
    g = n._g
    rooted = isinstance(n, RootedNetwork)
    placements = None if rooted else n.placements  # type: ignore[attr-defined]
    for cut in sorted(n.cut_edges):
        e = g.edges[cut]
        for u, v in ((e.a, e.b), (e.b, e.a)):
            if u in g.labels or u in n.reticulations:
                continue
            if rooted and (u != e.a or u == n.root):
                continue
            _, side_edges = _side(n, cut, u)
            if not rooted and cut not in placements and not (side_edges & placements.keys()):
                continue
            dons = set(g._inc[u]) - {cut}
            for f in sorted(side_edges - dons):
                yield Cet(cut, v, f)


def _valid_cets(n: Network) -> list[tuple[Cet, Network]]:
    out = []
    for m in _cet_candidates(n):
        try:
            res = _apply_cet(n, m)
        except InvalidMove:
            continue
        if not res.identity:
            out.append((m, res.network))
    return out


def valid_cets_rooted(n: RootedNetwork) -> list[Cet]:
    return [m for m, _ in _valid_cets(n)]


def valid_cets_semidirected(n: SemiDirectedNetwork) -> list[Cet]:
    return [m for m, _ in _valid_cets(n)]


def cet_neighbors(n: Network) -> list[tuple[Cet, Network]]:
    """Valid CETs together with their results."""
    return _valid_cets(n)


def is_cet1(n: Network, m: Cet) -> bool:
    e = n.edge(m.cut_edge)
    u = e.other(m.kept_end)
    ends = set()
    for i in donors(n, m):
        ends.add(n.edge(i).other(u))
    f = n.edge(m.recipient)
    return bool({f.a, f.b} & ends)


def cet_parallel_effect(n: Network, m: Cet) -> ParallelEffect:
    cycles = n.simple_cycles
    loops = [c for c in cycles if len(c) == 1]
    twos = [c for c in cycles if len(c) == 2]
    threes = [c for c in cycles if len(c) == 3]
    d1, d2 = donors(n, m)
    f = m.recipient

    def host(edge: int):
        for c in cycles:
            if edge in c.edges:
                return c
        return None

    dc = host(d1)
    donors_on = dc if dc is not None and dc is host(d2) else None
    fc = host(f)
    if donors_on is not None and len(donors_on) == 3:
        if twos and fc is not None and len(fc) == 2:
            return ParallelEffect.RELOCATES_PARALLEL_PAIR
        if len(loops) == 1 and fc is loops[0] and threes:
            return ParallelEffect.EXCHANGES_LOOP_AND_PAIRS
    if donors_on is not None and len(donors_on) == 2 and len(twos) == 2:
        if fc is not None and len(fc) == 2 and fc is not donors_on:
            return ParallelEffect.EXCHANGES_LOOP_AND_PAIRS
    return ParallelEffect.NONE


# ---------------------------------------------------------------------------
# CET- / CET+


def _apply_cet_minus(n: SemiDirectedNetwork, m: CetMinus) -> Applied:
    g = n.to_graph()
    if m.ret_edge not in g.edges:
        raise InvalidMove(f"no edge {m.ret_edge}")
    e = g.edges[m.ret_edge]
    if not e.directed:
        raise InvalidMove("CET- needs a reticulation edge")
    try:
        if e.is_loop:
            u = e.a
            g.remove_edge(e.id)
            (other,) = g.incident(u)
            w = g.edges[other].other(u)
            g.remove_edge(other)
            g.remove_vertex(u)
            g.suppress(w, rooted=False)
        else:
            u, v = e.a, e.b
            if u in n.reticulations:
                raise InvalidMove("tail of the reticulation edge is a reticulation")
            sib = [i for i in g._inc[v] if i != e.id and g.edges[i].directed and g.edges[i].b == v]
            if len(sib) != 1:
                raise InvalidMove("reticulation has no sibling edge")
            g.set_undirected(sib[0])
            g.remove_edge(e.id)
            g.suppress(u, rooted=False)
            g.suppress(v, rooted=False)
    except (KeyError, ValueError) as exc:
        raise InvalidMove(str(exc)) from None
    out = _revalidate(n, g)
    return Applied(out)


def apply_cet_minus(n: SemiDirectedNetwork, m: CetMinus) -> SemiDirectedNetwork:
    return _apply_cet_minus(n, m).network  # type: ignore[return-value]


def valid_cet_minus(n: SemiDirectedNetwork) -> list[CetMinus]:
    return [m for m, _ in cet_minus_neighbors(n)]


def cet_minus_neighbors(n: SemiDirectedNetwork) -> list[tuple[CetMinus, Network]]:
    out = []
    for i in sorted(n._g.edges):
        e = n._g.edges[i]
        if not e.directed:
            continue
        if not e.is_loop and e.a in n.reticulations:
            continue
        m = CetMinus(i)
        try:
            out.append((m, _apply_cet_minus(n, m).network))
        except InvalidMove:
            pass
    return out


def _cet_plus_graph(n: SemiDirectedNetwork, m: CetPlus) -> tuple[MixedGraph, int]:
    g = n.to_graph()
    if m.first_edge not in g.edges:
        raise InvalidMove(f"no edge {m.first_edge}")
    v, h1, h2 = g.subdivide(m.first_edge, rooted=False)
    if m.variant == "loop":
        u = g.add_vertex()
        g.add_edge(u, v, False)
        return g, g.add_edge(u, u, True)
    if m.variant != "two_edge":
        raise InvalidMove(f"unknown CET+ variant {m.variant!r}")
    if m.second_edge is None:
        if m.second_half not in (0, 1):
            raise InvalidMove("second_half must be 0 or 1")
        target = h1 if m.second_half == 0 else h2
    else:
        if m.second_edge == m.first_edge or m.second_edge not in g.edges:
            raise InvalidMove(f"bad second edge {m.second_edge}")
        target = m.second_edge
    u, s1, s2 = g.subdivide(target, rooted=False)
    created = g.add_edge(u, v, True)
    a_side = s2 if target == h1 else h1
    b_side = s1 if target == h2 else h2
    if m.head_choice == "first":
        chosen = a_side
    elif m.head_choice == "second":
        chosen = b_side
    else:
        raise InvalidMove("head_choice must be 'first' or 'second'")
    ce = g.edges[chosen]
    g.set_directed(chosen, ce.other(v), v)
    return g, created


def _apply_cet_plus(n: SemiDirectedNetwork, m: CetPlus) -> Applied:
    g, created = _cet_plus_graph(n, m)
    return Applied(_revalidate(n, g), created=created)


def apply_cet_plus(n: SemiDirectedNetwork, m: CetPlus) -> SemiDirectedNetwork:
    return _apply_cet_plus(n, m).network  # type: ignore[return-value]


def _cet_plus_candidates(n: SemiDirectedNetwork) -> Iterator[CetPlus]:
    g = n._g
    ids = sorted(g.edges)
    for f in ids:
        yield CetPlus("loop", f)
    for f in ids:
        fe = g.edges[f]
        if fe.is_loop:
            continue  # both halves leave the new vertex directed; no head choice survives
        for head in ("first", "second"):
            for half in (0, 1):
                yield CetPlus("two_edge", f, None, half, head)
            for s in ids:
                if s != f:
                    yield CetPlus("two_edge", f, s, None, head)


def cet_plus_neighbors(n: SemiDirectedNetwork, prefilter=None) -> list[tuple[CetPlus, Network]]:
    """Valid CET+ moves with results; ``prefilter(graph)`` may reject a result before validation."""
    out = []
    for m in _cet_plus_candidates(n):
        try:
            g, _ = _cet_plus_graph(n, m)
            if prefilter is not None and not prefilter(g):
                continue
            out.append((m, _revalidate(n, g)))
        except InvalidMove:
            pass
    return out


def valid_cet_plus(n: SemiDirectedNetwork) -> list[CetPlus]:
    return [m for m, _ in cet_plus_neighbors(n)]


# ---------------------------------------------------------------------------
# dispatch and inversion


def apply_move(n: Network, m: Move) -> Applied:
    if isinstance(m, Cet):
        return _apply_cet(n, m)
    if not isinstance(n, SemiDirectedNetwork):
        raise InvalidMove("CET+/CET- apply to semi-directed networks only")
    if isinstance(m, CetPlus):
        return _apply_cet_plus(n, m)
    if isinstance(m, CetMinus):
        return _apply_cet_minus(n, m)
    raise InvalidMove(f"unknown move {m!r}")


def apply(n: Network, m: Move) -> Network:
    return apply_move(n, m).network


def inverse_move(n: Network, m: Move, n_after: Network) -> Move:
    """A move taking ``n_after`` back to (a network isomorphic to) ``n``."""
    target = n.code
    res = apply_move(n, m)
    if res.network.code != n_after.code:
        raise InvalidMove("n_after is not the result of applying m to n")
    # n_after may be labelled differently from the recomputed result
    from .network import edge_map, isomorphism

    vmap = isomorphism(res.network, n_after)
    emap = edge_map(res.network, n_after, vmap)
    candidate: Move | None = None
    if isinstance(m, Cet):
        candidate = Cet(emap[res.created], vmap[m.kept_end], emap[res.merged])
    elif isinstance(m, CetPlus):
        candidate = CetMinus(emap[res.created])
    if candidate is not None:
        try:
            if apply_move(n_after, candidate).network.code == target:
                return candidate
        except InvalidMove:
            pass
    pool: list[tuple[Move, Network]]
    if isinstance(m, Cet):
        pool = list(_valid_cets(n_after))  # type: ignore[arg-type]
    elif isinstance(m, CetPlus):
        pool = cet_minus_neighbors(n_after)  # type: ignore[arg-type,assignment]
    else:
        pool = cet_plus_neighbors(n_after)  # type: ignore[arg-type,assignment]
    for cand, result in pool:
        if result.code == target:
            return cand
    raise InvalidMove("no inverse move found")


# ---------------------------------------------------------------------------
# sequences


@dataclass
class Step:
    move: Move
    before: bytes
    after: bytes
    identity: bool = False


@dataclass
class MoveSequence:
    """An audited list of moves starting from ``start``.

    Each step records the canonical codes before and after, so a replayer can
    check the sequence without trusting whoever produced it.
    """

    start: Network
    steps: list[Step] = field(default_factory=list)
    class_constraint: LevelClass = LevelClass.NEITHER
    _networks: list[Network] = field(default_factory=list, repr=False)

    @property
    def start_code(self) -> bytes:
        return self.start.code

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def networks(self) -> list[Network]:
        if len(self._networks) != len(self.steps) + 1:
            self._networks = self.replay()
        return self._networks

    @property
    def final(self) -> Network:
        return self.networks[-1]

    def push(self, move: Move) -> Applied:
        if not self._networks:
            self._networks = [self.start]
        cur = self._networks[-1]
        res = apply_move(cur, move)
        self.steps.append(Step(move, cur.code, res.network.code, res.identity))
        self._networks.append(res.network)
        return res

    def replay(self) -> list[Network]:
        cur = self.start
        out = [cur]
        for i, st in enumerate(self.steps):
            if cur.code != st.before:
                raise InvalidMove(f"step {i}: start code mismatch")
            cur = apply_move(cur, st.move).network
            if cur.code != st.after:
                raise InvalidMove(f"step {i}: result code mismatch")
            out.append(cur)
        return out

    def respects_class(self) -> bool:
        return all(x.level_class.within(self.class_constraint) for x in self.networks)


def cet1_decompose(n: SemiDirectedNetwork, m: Cet) -> MoveSequence:
    k, nx = n.k, n.n
    if k <= nx - 2:
        bound = LevelClass.LEVEL1
    elif k == nx - 1:
        bound = LevelClass.ALMOST_LEVEL1
    else:
        raise PreconditionViolated("more reticulations than leaves allow")
    if not n.level_class.within(bound):
        raise PreconditionViolated(f"input network is not {bound.value}")
    if cet_parallel_effect(n, m) is not ParallelEffect.NONE:
        raise PreconditionViolated("the CET moves or exchanges parallel edges")
    u, v, _ = _check_cet(n, m)
    if not apply_move(n, m).network.level_class.within(bound):
        raise PreconditionViolated(f"the CET leaves the {bound.value} class")
    seq = MoveSequence(n, class_constraint=bound)
    if is_cet1(n, m):
        seq.push(m)
        return seq
    path = _path_to_recipient(n, m.cut_edge, u, m.recipient)
    cut = m.cut_edge
    for rec in path[1:]:
        cut = seq.push(Cet(cut, v, rec)).created
    return seq


def _path_to_recipient(n: Network, cut: int, u: int, recipient: int) -> list[int]:
    """Edge ids of a shortest path from ``u`` ending with the recipient edge."""
    g = n._g
    f = g.edges[recipient]
    order = n.canonical_labeling
    prev: dict[int, tuple[int, int] | None] = {u: None}
    dq = deque([u])
    while dq:
        x = dq.popleft()
        if x in (f.a, f.b):
            edges = [recipient]
            while prev[x] is not None:
                y, eid = prev[x]  # type: ignore[misc]
                edges.append(eid)
                x = y
            return edges[::-1]
        nbrs = sorted(
            ((g.edges[i].other(x), i) for i in g._inc[x] if i not in (cut, recipient)),
            key=lambda t: (order[t[0]], t[1]),
        )
        for y, i in nbrs:
            if y not in prev:
                prev[y] = (x, i)
                dq.append(y)
    raise NoPath(f"no path from {u} to edge {recipient}")
