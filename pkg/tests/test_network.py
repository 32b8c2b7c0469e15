from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cetlab.errors import ValidationError
from cetlab.explorer import Tier, enumerate_tier, unrooted_trees
from cetlab.graph import MixedGraph
from cetlab.network import (
    LevelClass,
    count_invariants,
    cut_edges,
    deroot,
    isomorphic,
    level_class,
    rooted,
    rooted_partners,
    semidirected,
    underlying_cycles,
    validate_rooted,
    validate_semidirected,
)
from cetlab.standard_form import build_standard_form
from oracles import brute_cut_edges, brute_isomorphic, double_factorial

LEVEL1_TIERS = [(n, k) for n in (2, 3, 4) for k in range(n)]


def _tier(n, k, cls="level1", kind="semidirected"):
    return list(enumerate_tier(Tier.of(n, k, cls, kind)).values())


# ------------------------------------------------------------------ validation


def test_rooted_cherry_is_valid(cherry):
    assert cherry.k == 0 and cherry.n == 2


def test_triangle_partner_is_valid(triangle_partner):
    assert triangle_partner.k == 1
    assert triangle_partner.level_class is LevelClass.LEVEL1


def test_root_with_two_children_is_rejected():
    g = MixedGraph()
    rho, a, b = g.add_vertex(), g.add_vertex("x1"), g.add_vertex("x2")
    g.add_edge(rho, a, True)
    g.add_edge(rho, b, True)
    with pytest.raises(ValidationError) as err:
        validate_rooted(g, rho)
    assert err.value.code == "BadRootDegree"


def test_single_edge_is_two_leaf_tree():
    n = semidirected([("x1", "x2", False)])
    assert n.k == 0 and n.n == 2


def test_parallel_pair_is_valid(parallel_pair):
    assert parallel_pair.k == 1
    assert sum(1 for e in parallel_pair.edges.values() if e.directed) == 2


def test_head_to_head_square_has_no_partner():
    # a 4-cycle whose two reticulations face each other: every root placement
    # leaves some vertex with the wrong in-degree
    edges = [
        ("a", "r1", True), ("b", "r1", True), ("a", "r2", True), ("b", "r2", True),
        ("a", "x1", False), ("b", "x2", False), ("r1", "x3", False), ("r2", "x4", False),
    ]
    with pytest.raises(ValidationError) as err:
        semidirected(edges)
    assert err.value.code == "NoRootedPartner"


def test_undirected_loop_is_rejected():
    with pytest.raises(ValidationError):
        semidirected([("x1", "x1", False)])


def test_empty_leaf_set_is_rejected():
    g = MixedGraph()
    with pytest.raises(ValidationError):
        validate_semidirected(g)


# ---------------------------------------------------------- deroot / partners


def test_deroot_triangle_gives_parallel_pair(triangle_partner, parallel_pair):
    assert isomorphic(deroot(triangle_partner), parallel_pair)


def test_deroot_caterpillar_gives_star():
    cat = rooted([("rho", "t"), ("t", "x1"), ("t", "s"), ("s", "x2"), ("s", "x3")])
    star = semidirected([("c", "x1", False), ("c", "x2", False), ("c", "x3", False)])
    assert isomorphic(deroot(cat), star)


def test_deroot_of_root_child_two_cycle_gives_loop():
    r = rooted([("rho", "t"), ("t", "r"), ("t", "r"), ("r", "s"), ("s", "x1"), ("s", "x2")])
    d = deroot(r)
    assert any(e.is_loop for e in d.edges.values())
    assert d.level_class is LevelClass.ALMOST_LEVEL1


def test_two_leaf_tree_has_one_partner(cherry):
    parts = rooted_partners(semidirected([("x1", "x2", False)]))
    assert len(parts) == 1 and isomorphic(parts[0], cherry)


def test_parallel_pair_partners_include_triangle(parallel_pair, triangle_partner):
    assert triangle_partner.code in {p.code for p in rooted_partners(parallel_pair)}


def test_quartet_has_five_partners():
    q = semidirected([("a", "x1", False), ("a", "x2", False), ("a", "b", False), ("b", "x3", False), ("b", "x4", False)])
    assert len(rooted_partners(q)) == 5


@pytest.mark.parametrize("n,k", LEVEL1_TIERS)
def test_partner_deroot_round_trip(n, k):
    for kind_cls in ("level1", "almost"):
        if kind_cls == "almost" and k != n - 1:
            continue
        for r in _tier(n, k, kind_cls, "rooted"):
            if r.n < 2:
                continue
            d = deroot(r)
            assert d.k == r.k
            assert r.code in {p.code for p in rooted_partners(d)}
        for s in _tier(n, k, kind_cls):
            for p in rooted_partners(s):
                assert p.k == s.k and isomorphic(deroot(p), s)


# -------------------------------------------------------------------- cycles


def test_tree_has_no_cycles():
    assert underlying_cycles(semidirected([("x1", "x2", False)])) == []


def test_parallel_pair_is_one_two_cycle(parallel_pair):
    cycles = underlying_cycles(parallel_pair)
    assert len(cycles) == 1 and len(cycles[0]) == 2


def test_standard_form_has_k_triangles():
    cycles = underlying_cycles(build_standard_form(["x1", "x2", "x3", "x4"], 2))
    assert sorted(len(c) for c in cycles) == [3, 3]


def test_loop_network_is_almost():
    loop = semidirected([("u", "u", True), ("u", "w", False), ("w", "x1", False), ("w", "x2", False)])
    assert level_class(loop) is LevelClass.ALMOST_LEVEL1


def test_parallel_pair_is_level1(parallel_pair):
    assert level_class(parallel_pair) is LevelClass.LEVEL1


def test_shared_vertex_triangles_are_neither():
    # two 3-cycles sharing the reticulation-free vertex t
    r = rooted([
        ("rho", "t"), ("t", "a"), ("t", "b"),
        ("a", "r1"), ("a", "c"), ("c", "r1"), ("c", "r2"), ("b", "r2"), ("b", "x1"),
        ("r1", "x2"), ("r2", "x3"),
    ])
    assert level_class(r) is LevelClass.NEITHER


# ---------------------------------------------------------------- cut edges


def test_tree_cut_edges_are_all_edges():
    for n in (3, 4, 5):
        for t in unrooted_trees([f"x{i}" for i in range(1, n + 1)]).values():
            assert len(cut_edges(t)) == 2 * n - 3 == len(t.edges)


def test_rooted_tree_cut_edges_are_all_edges():
    for r in _tier(4, 0, "level1", "rooted"):
        assert len(cut_edges(r)) == 2 * 4 - 1


def test_parallel_pair_cut_edges_are_pendants(parallel_pair):
    assert {tuple(sorted(parallel_pair.labels.get(v, "") for v in parallel_pair.edges[e].ends()))
            for e in cut_edges(parallel_pair)} == {("", "x1"), ("", "x2")}


def test_standard_form_cut_edges_avoid_triangles():
    sf = build_standard_form(["x1", "x2", "x3", "x4"], 2)
    on_cycle = set()
    for c in underlying_cycles(sf):
        on_cycle |= {e.id for e in sf.edges.values() if e.a in c and e.b in c}
    assert cut_edges(sf) == frozenset(sf.edges) - on_cycle == brute_cut_edges(sf)


@pytest.mark.parametrize("n,k", LEVEL1_TIERS)
def test_cut_edges_match_brute_force(n, k):
    for net in _tier(n, k) + _tier(n, k, "level1", "rooted"):
        assert cut_edges(net) == brute_cut_edges(net)


# --------------------------------------------------------- canonical codes


def test_cherry_code_ignores_vertex_order():
    a = rooted([("rho", "t"), ("t", "x1"), ("t", "x2")])
    b = rooted([("t", "x2"), ("t", "x1"), ("rho", "t")])
    assert a.code == b.code


def test_swapped_leaves_have_different_codes(parallel_pair, parallel_pair_swapped):
    assert parallel_pair.code != parallel_pair_swapped.code


def test_five_leaf_trees_are_distinct():
    trees = unrooted_trees([f"x{i}" for i in range(1, 6)])
    assert len(trees) == 15 == double_factorial(2 * 5 - 5)


def test_codes_agree_with_brute_force_isomorphism():
    nets = []
    for n in (2, 3):
        for k in range(0, 3):
            for cls in ("level1", "almost", "all"):
                if cls != "all" and k > n - 1:
                    continue
                nets += _tier(n, k, cls)
    nets = list({x.code: x for x in nets}.values())
    # relabelled copies must be recognised as isomorphic too
    for a in nets:
        g = a.to_graph()
        twin = validate_semidirected(_relabel(g))
        assert twin.code == a.code and brute_isomorphic(a, twin)
    for a, b in combinations(nets, 2):
        if a.k == b.k and a.n == b.n:
            assert (a.code == b.code) == brute_isomorphic(a, b)


def _relabel(g: MixedGraph) -> MixedGraph:
    h = MixedGraph()
    ids = {}
    for v in sorted(g.vertices, reverse=True):
        ids[v] = h.add_vertex(g.labels.get(v))
    for eid in sorted(g.edges, reverse=True):
        e = g.edges[eid]
        h.add_edge(ids[e.a], ids[e.b], e.directed)
    return h


# ------------------------------------------------------------ counting lemmas


def test_cherry_counts():
    c = count_invariants(rooted([("rho", "t"), ("t", "x1"), ("t", "x2")]))
    assert (c.vertices, c.edges, c.tree_vertices) == (4, 3, 1)


def test_parallel_pair_counts(parallel_pair):
    c = count_invariants(parallel_pair)
    assert (c.vertices, c.edges) == (4, 4)


@pytest.mark.parametrize("n,k", LEVEL1_TIERS)
def test_counting_identities(n, k):
    for r in _tier(n, k, "level1", "rooted"):
        c = count_invariants(r)
        assert c.tree_vertices == k + n - 1
        assert (c.vertices, c.edges) == (2 * n + 2 * k, 2 * n + 3 * k - 1)
    for s in _tier(n, k):
        c = count_invariants(s)
        assert (c.vertices, c.edges) == (2 * n + 2 * k - 2, 2 * n + 3 * k - 3)


@pytest.mark.parametrize("n,k", LEVEL1_TIERS)
def test_directed_edges_are_on_cycles_and_not_cut(n, k):
    for s in _tier(n, k):
        directed = {e.id for e in s.edges.values() if e.directed}
        assert not directed & cut_edges(s)
        on_cycle = set()
        for c in underlying_cycles(s):
            cs = set(c)
            on_cycle |= {e.id for e in s.edges.values() if set(e.ends()) <= cs}
        assert directed <= on_cycle


@pytest.mark.parametrize("n,k", LEVEL1_TIERS)
def test_level1_reticulation_bound(n, k):
    for s in _tier(n, k):
        assert s.k <= n - 1


@pytest.mark.parametrize("n,k", LEVEL1_TIERS)
def test_cut_edge_correspondence(n, k):
    for s in _tier(n, k):
        for p in rooted_partners(s):
            pc = cut_edges(p)
            for eid in cut_edges(s):
                e = s.edges[eid]
                direct = [f.id for f in p.edges.values() if {f.a, f.b} == {e.a, e.b}]
                if direct:
                    assert direct[0] in pc
                else:
                    t = p.root_child
                    assert p.root_edge in pc
                    assert {f.id for f in p.out_edges(t)} <= pc
                    assert {f.b for f in p.out_edges(t)} == {e.a, e.b}


@pytest.mark.parametrize("n,k", LEVEL1_TIERS)
def test_cycle_saturation(n, k):
    for r in _tier(n, k, "level1", "rooted"):
        cycles = underlying_cycles(r)
        if any(len(c) != 3 for c in cycles):
            continue
        on_cycle = set().union(*map(set, cycles)) if cycles else set()
        inner = {v for v in r.vertices if v not in r.labels and v != r.root}
        assert (inner <= on_cycle) == (k == n - 1)


# ------------------------------------------------------------ property tests


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([(n, k) for n, k in LEVEL1_TIERS if (n, k) != (4, 3)]), st.data())
def test_deroot_preserves_reticulations(nk, data):
    nets = _tier(*nk, "level1", "rooted")
    r = data.draw(st.sampled_from(nets))
    if r.n >= 2:
        d = deroot(r)
        assert d.k == r.k and d.taxa == r.taxa
