"""The standard-form network and CET sequences that reach it.

``to_standard_shape`` shrinks every cycle to a triangle, strings the triangles
into a chain below the root and tidies the remaining leaves into a
caterpillar.  ``to_standard_form`` then swaps leaves into place.  Together
they connect any two rooted level-1 networks with the same leaf set and
reticulation number, and the connection is lifted to semi-directed networks by
derooting every intermediate network.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import (
    BadSpec,
    IncompatibleInputs,
    NoLevel1Partner,
    NotLevel1,
    NotStandardShape,
)
from .graph import MixedGraph
from .moves import Applied, Cet, Move, MoveSequence, apply_move, inverse_move
from .network import (
    LevelClass,
    Network,
    RootedNetwork,
    SemiDirectedNetwork,
    deroot,
    edge_map,
    isomorphism,
    rooted_partners,
    validate_rooted,
)


def natural_key(label: str) -> list:
    return [int(p) if p.isdigit() else p for p in re.split(r"(\d+)", label)]


def class_bound(n_leaves: int, k: int) -> LevelClass:
    """Class every intermediate network must stay in for the given tier."""
    return LevelClass.LEVEL1 if k <= n_leaves - 2 else LevelClass.ALMOST_LEVEL1


def length_bound_shape(n: int, k: int) -> int:
    return 2 * n + 2 * k


def length_bound_form(n: int, k: int) -> int:
    return 3 * n


def length_bound_connect(n: int, k: int) -> int:
    return 10 * n + 4 * k


@dataclass(frozen=True)
class StandardFormSpec:
    leaves: tuple[str, ...]
    k: int


@dataclass(frozen=True)
class CorrectPositionReport:
    leaf: str
    in_position: bool
    witness: int | None


# ---------------------------------------------------------------------------
# construction


def build_standard_form(leaves, k: int | None = None) -> RootedNetwork:
    """The unique standard-form network on ``leaves`` (in order) with ``k`` triangles."""
    if isinstance(leaves, StandardFormSpec):
        leaves, k = leaves.leaves, leaves.k
    leaves = list(leaves)
    n = len(leaves)
    if k is None or k < 0 or n < 1 or len(set(leaves)) != n:
        raise BadSpec(f"bad leaf list or reticulation count: n={n}, k={k}")
    if k > n - 1 or (k == 0 and n < 2):
        raise BadSpec(f"need 0 <= k <= n-1 and n >= 2 (n={n}, k={k})")
    g = MixedGraph()
    rho = g.add_vertex()
    top = rho
    for i in range(k):
        u, p, v = g.add_vertex(), g.add_vertex(), g.add_vertex()
        g.add_edge(top, u, True)
        g.add_edge(u, p, True)
        g.add_edge(u, v, True)
        g.add_edge(p, v, True)
        g.add_edge(p, g.add_vertex(leaves[i]), True)
        top = v
    rest = leaves[k:]
    if len(rest) == 1:
        g.add_edge(top, g.add_vertex(rest[0]), True)
    else:
        # spine from the top: parent of x_n first, down to the cherry (x_{k+1}, x_{k+2})
        for j in range(len(rest) - 1, 1, -1):
            w = g.add_vertex()
            g.add_edge(top, w, True)
            g.add_edge(w, g.add_vertex(rest[j]), True)
            top = w
        w = g.add_vertex()
        g.add_edge(top, w, True)
        g.add_edge(w, g.add_vertex(rest[0]), True)
        g.add_edge(w, g.add_vertex(rest[1]), True)
    return validate_rooted(g, rho)


def _ordered_leaves(n: Network, leaves=None) -> list[str]:
    if leaves is None:
        return sorted(n.taxa, key=natural_key)
    leaves = list(leaves)
    if sorted(leaves) != sorted(n.taxa):
        raise BadSpec("leaf order does not match the network's leaf set")
    return leaves


def is_standard_shape(n: RootedNetwork) -> bool:
    if not isinstance(n, RootedNetwork) or n.k > n.n - 1:
        return False
    ref = build_standard_form(sorted(n.taxa), n.k)
    return n.shape_code == ref.shape_code


# ---------------------------------------------------------------------------
# rooted cycle helpers


@dataclass(frozen=True)
class _RCycle:
    source: int
    sink: int
    vertices: frozenset[int]
    edges: frozenset[int]

    @property
    def middle(self) -> list[int]:
        return sorted(self.vertices - {self.source, self.sink})

    def __len__(self) -> int:
        return len(self.vertices)


def _rcycles(n: RootedNetwork) -> list[_RCycle]:
    out = []
    for c in n.simple_cycles:
        vs = frozenset(c.vertices)
        sink = next(v for v in vs if v in n.reticulations)
        source = next(v for v in vs if not any(p in vs for p in n.parents(v)))
        out.append(_RCycle(source, sink, vs, c.edges))
    out.sort(key=lambda c: -len(n.descendants[c.sink]))
    return out


def _edge(n: RootedNetwork, a: int, b: int) -> int:
    ids = [e.id for e in n.out_edges(a) if e.b == b]
    if not ids:
        raise KeyError((a, b))
    return min(ids)


def _parent(n: RootedNetwork, v: int) -> int:
    return n.parents(v)[0]


def _leaf_edge(n: RootedNetwork, x: int) -> int:
    return n.in_edges(x)[0].id


def _direct_edge(n: RootedNetwork, c: _RCycle) -> int:
    return min(i for i in c.edges if n.edge(i).a == c.source and n.edge(i).b == c.sink)


def _order(n: Network):
    lab = n.canonical_labeling
    return lambda v: lab[v]


class _Builder:
    """Applies rooted CETs, checking the tier's class after every step."""

    def __init__(self, start: RootedNetwork, bound: LevelClass):
        self.seq = MoveSequence(start, class_constraint=bound)
        self.bound = bound

    @property
    def cur(self) -> RootedNetwork:
        return self.seq.networks[-1]  # type: ignore[return-value]

    def cet(self, cut: int, kept: int, recipient: int) -> Applied:
        res = self.seq.push(Cet(cut, kept, recipient))
        if not res.network.level_class.within(self.bound):
            raise AssertionError(f"step left the {self.bound.value} class")
        return res

    def move_leaf(self, x: int, recipient: int) -> Applied:
        return self.cet(_leaf_edge(self.cur, x), x, recipient)


# ---------------------------------------------------------------------------
# standard shape


def _shrink_cycles(b: _Builder) -> None:
    while True:
        cur = b.cur
        long = [c for c in _rcycles(cur) if len(c) > 3]
        if not long:
            return
        sources = {c.source for c in long}
        deepest = [c for c in long if not (cur.descendants[c.source] & (sources - {c.source}))]
        c = min(deepest, key=lambda c: _order(cur)(c.sink))
        s = min(c.middle, key=_order(cur))
        (out,) = [e for e in cur.out_edges(s) if e.id not in c.edges]
        b.cet(out.id, out.b, cur.root_edge)


def _prefix_chain(cur: RootedNetwork, cycles: list[_RCycle]) -> list[_RCycle]:
    """Longest chain of cycles from the top whose sinks dominate every later cycle."""
    remaining = list(cycles)
    prefix: list[_RCycle] = []
    while remaining:
        cand = [
            c for c in remaining
            if all(cur.is_ancestor(c.sink, d.source) for d in remaining if d is not c)
        ]
        if len(cand) != 1:
            break
        prefix.append(cand[0])
        remaining.remove(cand[0])
    return prefix


def _gadget(b: _Builder, sink: int, handle: tuple[int, int] | None = None) -> None:
    """Lift the cycle with sink ``sink`` to the top and hang everything else below it."""

    def cycle() -> _RCycle:
        return next(c for c in _rcycles(b.cur) if c.sink == sink)

    u = cycle().source
    if handle is not None:
        t, c = handle
        cur = b.cur
        b.cet(_edge(cur, t, c), c, _edge(cur, _parent(cur, u), u))
    cur = b.cur
    tp = _parent(cur, u)
    if tp != cur.root_child:
        b.cet(_edge(cur, tp, u), u, cur.root_edge)
    cur = b.cur
    top = cur.root_child
    assert _parent(cur, u) == top
    (w,) = [x for x in cur.children(top) if x != u]
    (out,) = cur.out_edges(sink)
    b.cet(_edge(cur, top, w), w, out.id)


def _chain_cycles(b: _Builder, n_leaves: int, k: int) -> None:
    for _ in range(4 * k + 8):
        cur = b.cur
        cycles = _rcycles(cur)
        prefix = _prefix_chain(cur, cycles)
        if len(prefix) == len(cycles):
            return
        key = _order(cur)
        in_cycle = set().union(*(c.vertices for c in cycles))
        free = sorted((v for v in cur.tree_vertices if v not in in_cycle), key=key)
        sources = {c.source for c in cycles}
        lowest = sorted(
            (c for c in cycles if c not in prefix and not (cur.descendants[c.source] & sources)),
            key=lambda c: key(c.sink),
        )
        direct = [c for c in lowest if _parent(cur, c.source) in free]
        if direct:
            _gadget(b, direct[0].sink)
            continue

        def acyclic(v: int) -> bool:
            return v not in cur.reticulations and not (cur.descendants[v] & cur.reticulations)

        handles = [(t, c) for t in free for c in sorted(cur.children(t), key=key) if acyclic(c)]
        if handles:
            _gadget(b, lowest[0].sink, handles[0])
            continue
        if free:
            # no tree vertex outside cycles has a cycle-free side: graft one side onto a leaf edge
            t = next(t for t in free if not (cur.descendants[t] & set(free)))
            c, other = sorted(cur.children(t), key=key)
            x = min((v for v in cur.descendants[other] if cur.is_leaf(v)), key=key)
            b.cet(_edge(cur, t, c), c, _leaf_edge(cur, x))
            continue
        # every tree vertex sits on a cycle: pull a cycle hanging below a triangle to the top,
        # which turns that triangle into the one permitted 2-cycle
        middles = {m for c in cycles if len(c) == 3 for m in c.middle}
        cands = [c for c in cycles if c not in prefix and _parent(cur, c.source) in middles]
        if not cands:
            raise AssertionError("no cycle below a triangle")
        cands.sort(key=lambda c: (len(cur.descendants[c.source] & sources), key(c.sink)))
        _gadget(b, cands[0].sink)
    raise AssertionError("cycle chaining did not terminate")


def _caterpillar_below(b: _Builder, top: int) -> None:
    while True:
        cur = b.cur
        key = _order(cur)
        (w,) = cur.children(top)
        moved = False
        while not cur.is_leaf(w):
            ch = cur.children(w)
            leaves = [c for c in ch if cur.is_leaf(c)]
            if len(leaves) == 2:
                break
            if len(leaves) == 1:
                (w,) = [c for c in ch if not cur.is_leaf(c)]
                continue
            x = min((v for v in cur.descendants[w] if cur.is_leaf(v)), key=key)
            b.move_leaf(x, cur.in_edges(w)[0].id)
            moved = True
            break
        if not moved:
            return


def _tidy_leaves(b: _Builder, n_leaves: int, k: int) -> None:
    cur = b.cur
    chain = _prefix_chain(cur, _rcycles(cur))
    vk = chain[-1].sink if chain else cur.root
    _caterpillar_below(b, vk)

    def strays() -> list[int]:
        cur = b.cur
        in_cycle = set().union(*(c.vertices for c in _rcycles(cur))) if k else set()
        below = cur.descendants[vk]
        return sorted(
            (x for x in cur.labels if x not in below and _parent(cur, x) not in in_cycle),
            key=_order(cur),
        )

    twos = [c for c in _rcycles(b.cur) if len(c) == 2]
    if twos:
        cur = b.cur
        xs = strays()
        if xs:
            x = xs[0]
        else:
            x = min((v for v in cur.descendants[vk] if cur.is_leaf(v)), key=_order(cur))
        b.move_leaf(x, min(twos[0].edges))
    for _ in range(n_leaves + 1):
        xs = strays()
        if not xs:
            return
        cur = b.cur
        (out,) = cur.out_edges(vk)
        b.move_leaf(xs[0], out.id)
    raise AssertionError("leaf tidying did not terminate")


def to_standard_shape(n: RootedNetwork) -> MoveSequence:
    if not isinstance(n, RootedNetwork) or n.level_class is not LevelClass.LEVEL1:
        raise NotLevel1("input must be a rooted level-1 network")
    nl, k = n.n, n.k
    b = _Builder(n, class_bound(nl, k))
    if is_standard_shape(n):
        return b.seq
    _shrink_cycles(b)
    _chain_cycles(b, nl, k)
    _tidy_leaves(b, nl, k)
    if not is_standard_shape(b.cur):
        raise AssertionError("transformation did not reach standard shape")
    return b.seq


# ---------------------------------------------------------------------------
# standard form


def _chain(cur: RootedNetwork) -> list[_RCycle]:
    return _rcycles(cur)  # already ordered top to bottom


def _sigma(cur: RootedNetwork, top: int) -> list[int] | None:
    """Leaves of the caterpillar hanging below ``top``, cherry first; None if not a caterpillar."""
    (w,) = cur.children(top)
    if cur.is_leaf(w):
        return [w]
    down: list[int] = []
    while True:
        ch = cur.children(w)
        leaves = sorted((c for c in ch if cur.is_leaf(c)), key=lambda v: cur.labels[v])
        if len(leaves) == 2:
            return leaves + down[::-1]
        if len(leaves) != 1:
            return None
        down.append(leaves[0])
        (w,) = [c for c in ch if not cur.is_leaf(c)]


def _bottom(cur: RootedNetwork) -> int:
    chain = _chain(cur)
    return chain[-1].sink if chain else cur.root


def _in_position(cur: RootedNetwork, order: list[str], i: int) -> tuple[bool, int | None]:
    k = cur.k
    x = cur.leaf_of[order[i]]
    chain = _chain(cur)
    if i < k:
        if i >= len(chain):
            return False, None
        c = chain[i]
        return _parent(cur, x) in c.middle, c.sink
    vk = _bottom(cur)
    sigma = _sigma(cur, vk)
    if sigma is None or x not in sigma:
        return False, vk
    want = [cur.leaf_of[a] for a in order[k:i + 1]]
    got = [y for y in sigma if y in want]
    ok = got == want or (len(want) >= 2 and got == [want[1], want[0]] + want[2:])
    return ok, vk


def correct_position_report(n: RootedNetwork, leaf: str, leaves=None) -> CorrectPositionReport:
    order = _ordered_leaves(n, leaves)
    ok, witness = _in_position(n, order, order.index(leaf))
    return CorrectPositionReport(leaf, ok, witness)


def to_standard_form(n: RootedNetwork, leaves=None) -> MoveSequence:
    if not is_standard_shape(n):
        raise NotStandardShape("input is not of standard shape")
    order = _ordered_leaves(n, leaves)
    nl, k = n.n, n.k
    b = _Builder(n, class_bound(nl, k))
    for _ in range(nl + 1):
        cur = b.cur
        i = next((j for j in range(nl) if not _in_position(cur, order, j)[0]), None)
        if i is None:
            return b.seq
        _swap_into_place(b, order, i)
        if not is_standard_shape(b.cur):
            raise AssertionError("leaf swap left standard shape")
    raise AssertionError("leaf swapping did not terminate")


def _swap_into_place(b: _Builder, order: list[str], i: int) -> None:
    cur = b.cur
    nl, k = cur.n, cur.k
    x = cur.leaf_of[order[i]]
    idx = {cur.leaf_of[a]: j for j, a in enumerate(order)}
    chain = _chain(cur)
    vk = _bottom(cur)
    in_t = x in cur.descendants[vk]

    def above_predecessors() -> int:
        # edge into the parent of the highest of x_{k+1}..x_{i-1} in the caterpillar
        cur = b.cur
        sigma = _sigma(cur, vk)
        assert sigma is not None
        prev = {cur.leaf_of[a] for a in order[k:i]}
        h = [y for y in sigma if y in prev][-1]
        return cur.in_edges(_parent(cur, h))[0].id

    if in_t and i >= k:
        b.move_leaf(x, above_predecessors())
        return
    if in_t:
        ci = chain[i]
        (p,) = ci.middle
        (xj,) = [c for c in cur.children(p) if cur.is_leaf(c)]
        if k <= nl - 2:
            res = b.move_leaf(x, _direct_edge(cur, ci))
            b.move_leaf(xj, res.merged)
        else:
            b.move_leaf(xj, _leaf_edge(cur, x))
            cur = b.cur
            two = next(c for c in _rcycles(cur) if c.sink == ci.sink)
            b.move_leaf(x, min(two.edges))
        return
    # x hangs off the middle of some triangle other than its own
    c_here = next(c for c in chain if _parent(cur, x) in c.middle)
    if k == nl - 1:
        if i >= k:
            raise AssertionError("last leaf cannot be out of place")
        ci = chain[i]
        (p,) = ci.middle
        (xj,) = [c for c in cur.children(p) if cur.is_leaf(c)]
        b.move_leaf(x, _direct_edge(cur, ci))
        cur = b.cur
        two = next(c for c in _rcycles(cur) if c.sink == c_here.sink)
        b.move_leaf(xj, min(two.edges))
        return
    t_leaves = [v for v in cur.descendants[vk] if cur.is_leaf(v) and idx[v] > i]
    xj = min(t_leaves, key=lambda v: idx[v])
    first = b.move_leaf(xj, _direct_edge(cur, c_here))
    if i < k:
        ci = chain[i]
        (p,) = ci.middle
        (xjp,) = [c for c in cur.children(p) if cur.is_leaf(c)]
        b.move_leaf(x, _direct_edge(b.cur, ci))
        b.move_leaf(xjp, first.merged)
    elif i <= k + 1:
        b.move_leaf(x, first.merged)
    else:
        b.move_leaf(x, above_predecessors())


# ---------------------------------------------------------------------------
# connecting networks


def _translate(m: Move, vmap: dict[int, int], emap: dict[int, int]) -> Move:
    if isinstance(m, Cet):
        return Cet(emap[m.cut_edge], vmap[m.kept_end], emap[m.recipient])
    raise TypeError(m)


def _to_form(n: RootedNetwork, order: list[str]) -> MoveSequence:
    a = to_standard_shape(n)
    bseq = to_standard_form(a.final, order)  # type: ignore[arg-type]
    a.steps.extend(bseq.steps)
    a._networks.extend(bseq.networks[1:])
    return a


def _check_pair(a: Network, b: Network) -> None:
    if a.taxa != b.taxa or a.k != b.k:
        raise IncompatibleInputs("networks differ in leaf set or reticulation number")


def connect_rooted(a: RootedNetwork, b: RootedNetwork) -> MoveSequence:
    _check_pair(a, b)
    for x in (a, b):
        if x.level_class is not LevelClass.LEVEL1:
            raise IncompatibleInputs("both networks must be rooted level-1")
    bound = class_bound(a.n, a.k)
    seq = MoveSequence(a, class_constraint=bound)
    if a.code == b.code:
        return seq
    order = sorted(a.taxa, key=natural_key)
    fa = _to_form(a, order)
    fb = _to_form(b, order)
    seq.steps.extend(fa.steps)
    seq._networks = list(fa.networks)
    nets = fb.networks
    for i in range(len(fb.steps), 0, -1):
        before, after = nets[i - 1], nets[i]
        back = inverse_move(before, fb.steps[i - 1].move, after)
        cur = seq.networks[-1]
        vmap = isomorphism(after, cur)
        res = seq.push(_translate(back, vmap, edge_map(after, cur, vmap)))
        if res.network.code != before.code:
            raise AssertionError("reversed step did not retrace the path")
    return seq


def _lift(r: RootedNetwork, s: SemiDirectedNetwork, m: Cet) -> Cet:
    """The semi-directed CET on ``s = deroot(r)`` matching rooted CET ``m`` on ``r``."""
    t = r.root_child
    merged = next(iter(set(s.edges) - set(r.edges)))
    e, f = r.edge(m.cut_edge), r.edge(m.recipient)
    if t in (e.a, e.b):
        return Cet(merged, m.kept_end, m.recipient)
    if t in (f.a, f.b):
        return Cet(m.cut_edge, m.kept_end, merged)
    return m


def lift_rooted_step(r1: RootedNetwork, m: Cet, r2: RootedNetwork) -> Cet | None:
    """Semi-directed move between the deroots of ``r1`` and ``r2``; None when they coincide."""
    s1, s2 = deroot(r1), deroot(r2)
    if s1.code == s2.code:
        return None
    lifted = _lift(r1, s1, m)
    if apply_move(s1, lifted).network.code != s2.code:
        raise AssertionError("lifted move does not match the rooted step")
    return lifted


def level1_partner(n: SemiDirectedNetwork) -> RootedNetwork:
    for p in rooted_partners(n):
        if p.level_class is LevelClass.LEVEL1:
            return p
    raise NoLevel1Partner("network has no rooted level-1 partner")


def connect_semidirected(a: SemiDirectedNetwork, b: SemiDirectedNetwork) -> MoveSequence:
    _check_pair(a, b)
    bound = class_bound(a.n, a.k)
    seq = MoveSequence(a, class_constraint=bound)
    if a.code == b.code:
        return seq
    ra, rb = level1_partner(a), level1_partner(b)
    rseq = connect_rooted(ra, rb)
    nets = rseq.networks
    for i, st in enumerate(rseq.steps):
        r1 = nets[i]
        s1 = deroot(r1)  # type: ignore[arg-type]
        lifted = lift_rooted_step(r1, st.move, nets[i + 1])  # type: ignore[arg-type]
        if lifted is None:
            continue
        cur = seq.networks[-1]
        vmap = isomorphism(s1, cur)
        res = seq.push(_translate(lifted, vmap, edge_map(s1, cur, vmap)))
        if not res.network.level_class.within(bound):
            raise AssertionError("lifted sequence left the tier's class")
    if seq.networks[-1].code != b.code:
        raise AssertionError("lifted sequence does not end at the target")
    return seq


__all__ = [
    "StandardFormSpec",
    "CorrectPositionReport",
    "build_standard_form",
    "is_standard_shape",
    "to_standard_shape",
    "to_standard_form",
    "correct_position_report",
    "connect_rooted",
    "connect_semidirected",
    "lift_rooted_step",
    "level1_partner",
    "class_bound",
    "length_bound_shape",
    "length_bound_form",
    "length_bound_connect",
    "natural_key",
]
