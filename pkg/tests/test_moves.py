import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cetlab.errors import InvalidMove, PreconditionViolated
from cetlab.explorer import Tier, enumerate_tier, rooted_trees, unrooted_trees
from cetlab.moves import (
    Cet,
    CetMinus,
    CetPlus,
    ParallelEffect,
    apply,
    apply_cet_minus,
    apply_cet_plus,
    apply_cet_rooted,
    apply_cet_semidirected,
    apply_move,
    cet1_decompose,
    cet_parallel_effect,
    donors,
    inverse_move,
    is_cet1,
    valid_cet_minus,
    valid_cet_plus,
    valid_cets_rooted,
    valid_cets_semidirected,
)
from cetlab.network import (
    LevelClass,
    cut_edges,
    partner_from_placement,
    rooted,
    semidirected,
)
from cetlab.standard_form import class_bound
from oracles import component_count, nni_neighbour_splits, spr_neighbour_splits, tree_splits

SMALL = [(2, 1, "level1"), (2, 1, "almost"), (3, 1, "level1"), (3, 1, "almost"),
         (3, 2, "level1"), (3, 2, "almost"), (4, 1, "level1")]


def _tier(n, k, cls="level1", kind="semidirected"):
    return list(enumerate_tier(Tier.of(n, k, cls, kind)).values())


def _component(net, removed, start):
    """Vertices reachable from ``start`` once edge ``removed`` is gone."""
    seen, stack = {start}, [start]
    while stack:
        x = stack.pop()
        for e in net.incident(x):
            if e.id == removed:
                continue
            y = e.other(x)
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return seen


def _oracle_valid_cets(net, rooted_kind):
    """Valid CETs straight from the definition, quantifying over root placements."""
    out = set()
    partners = [] if rooted_kind else [partner_from_placement(p) for p in net.placements.values()]
    for cut in cut_edges(net):
        e = net.edge(cut)
        for v in e.ends():
            u = e.other(v)
            if u in net.labels or u in net.reticulations:
                continue
            if rooted_kind:
                if u == net.root or v == net.root or (e.a, e.b) != (u, v):
                    continue
            else:
                ok = False
                for p in partners:
                    if any(f.a == u and f.b == v for f in p.edges.values()):
                        ok = True
                    t = p.root_child
                    kids = {f.b for f in p.out_edges(t)}
                    if kids == {u, v} and cut not in p.edges:
                        ok = True
                if not ok:
                    continue
            side = _component(net, cut, u)
            dons = {f.id for f in net.incident(u) if f.id != cut}
            for f in net.edges.values():
                if f.id in dons or f.id == cut or f.a not in side:
                    continue
                m = Cet(cut, v, f.id)
                try:
                    r = apply(net, m)
                except InvalidMove:
                    continue
                if r.code != net.code:
                    out.add(m)
    return out


# ------------------------------------------------------------------ rooted CET


def test_rooted_cherry_has_no_moves(cherry):
    assert valid_cets_rooted(cherry) == []


def test_rooted_caterpillar_reaches_other_triples():
    trees = rooted_trees(["x1", "x2", "x3"])
    assert len(trees) == 3
    for code, t in trees.items():
        reached = {apply(t, m).code for m in valid_cets_rooted(t)}
        assert reached == set(trees) - {code}


def test_cycle_shrink_step():
    # a 4-cycle t -> a -> b -> r with t -> r; moving b's leaf away leaves a 3-cycle
    n = rooted([("rho", "t"), ("t", "a"), ("t", "r"), ("a", "b"), ("b", "r"),
                ("a", "x1"), ("b", "x2"), ("r", "x3")])
    assert sorted(len(c) for c in n.simple_cycles) == [4]
    b = next(v for v in n.vertices if any(n.labels.get(c) == "x2" for c in n.children(v)))
    x2 = n.leaf_of["x2"]
    cut = next(e.id for e in n.out_edges(b) if e.b == x2)
    r = apply_cet_rooted(n, Cet(cut, x2, n.root_edge))
    assert sorted(len(c) for c in r.simple_cycles) == [3]


def test_recipient_on_kept_side_is_rejected():
    n = rooted_trees(["x1", "x2", "x3", "x4"])
    t = next(iter(n.values()))
    cut = next(e.id for e in t.edges.values() if e.b not in t.labels and e.a != t.root)
    v = t.edge(cut).b
    below = next(e.id for e in t.out_edges(v))
    with pytest.raises(InvalidMove):
        apply_cet_rooted(t, Cet(cut, v, below))


@pytest.mark.parametrize("n,k", [(3, 1), (3, 2), (4, 1)])
def test_rooted_moves_match_definition(n, k):
    for net in _tier(n, k, "level1", "rooted"):
        assert set(valid_cets_rooted(net)) == _oracle_valid_cets(net, True)


# ------------------------------------------------------------ semi-directed CET


@pytest.mark.parametrize("n,k,cls", SMALL)
def test_semidirected_moves_match_definition(n, k, cls):
    for net in _tier(n, k, cls):
        assert set(valid_cets_semidirected(net)) == _oracle_valid_cets(net, False)


def test_some_moves_cannot_swap_roles():
    # somewhere in the 4-leaf single-reticulation tier, a cut edge can only be
    # used with one of its ends suppressed
    found = False
    for net in _tier(4, 1):
        kept = {}
        for m in valid_cets_semidirected(net):
            kept.setdefault(m.cut_edge, set()).add(m.kept_end)
        for cut, ends in kept.items():
            e = net.edge(cut)
            if len(ends) == 1 and not (set(e.ends()) & set(net.labels)):
                found = True
    assert found


def test_quartet_reaches_other_quartets():
    trees = unrooted_trees(["x1", "x2", "x3", "x4"])
    for code, t in trees.items():
        assert {apply(t, m).code for m in valid_cets_semidirected(t)} == set(trees) - {code}


@pytest.mark.parametrize("n", [4, 5])
def test_tree_cet_is_spr_and_cet1_is_nni(n):
    for t in unrooted_trees([f"x{i}" for i in range(1, n + 1)]).values():
        moves = valid_cets_semidirected(t)
        assert {tree_splits(apply(t, m)) for m in moves} == spr_neighbour_splits(t)
        local = {tree_splits(apply(t, m)) for m in moves if is_cet1(t, m)}
        assert local == nni_neighbour_splits(t)


def test_parallel_pair_cannot_swap_leaves_within_class(parallel_pair, parallel_pair_swapped):
    for m in valid_cets_semidirected(parallel_pair):
        r = apply(parallel_pair, m)
        if r.level_class is LevelClass.LEVEL1:
            assert r.code != parallel_pair_swapped.code


def test_loop_recipient_makes_parallel_pair():
    n = semidirected([("u", "u", True), ("u", "w", False), ("w", "x1", False), ("w", "c", False),
                      ("c", "x2", False), ("c", "x3", False)])
    c = next(v for v in n.vertices if {n.labels.get(e.other(v)) for e in n.incident(v)} >= {"x2", "x3"})
    x3 = n.leaf_of["x3"]
    cut = next(e.id for e in n.incident(x3))
    loop = next(e.id for e in n.edges.values() if e.is_loop)
    r = apply_cet_semidirected(n, Cet(cut, x3, loop))
    assert c not in r.vertices
    pairs = [(e.a, e.b) for e in r.edges.values() if e.directed]
    assert len(pairs) == 2 and pairs[0] == pairs[1]


@pytest.mark.parametrize("n,k,cls", SMALL)
def test_cet_inverse_restores_network(n, k, cls):
    for net in _tier(n, k, cls):
        for m in valid_cets_semidirected(net):
            res = apply_move(net, m)
            back = inverse_move(net, m, res.network)
            assert isinstance(back, Cet)
            assert apply(res.network, back).code == net.code


# ----------------------------------------------------------------------- CET1


def test_star_moves_are_all_local():
    star = semidirected([("c", "x1", False), ("c", "x2", False), ("c", "x3", False)])
    assert all(is_cet1(star, m) for m in valid_cets_semidirected(star))


def test_cet1_means_recipient_touches_donor():
    for net in _tier(4, 1):
        for m in valid_cets_semidirected(net):
            u = net.edge(m.cut_edge).other(m.kept_end)
            far = {net.edge(d).other(u) for d in donors(net, m)}
            assert is_cet1(net, m) == bool(set(net.edge(m.recipient).ends()) & far)


def test_some_moves_are_not_local():
    t = next(iter(unrooted_trees(["x1", "x2", "x3", "x4", "x5"]).values()))
    flags = {is_cet1(t, m) for m in valid_cets_semidirected(t)}
    assert flags == {True, False}


# ------------------------------------------------------------ parallel effect


def test_parallel_free_moves_have_no_effect():
    for net in _tier(4, 1):
        if all(len(c) > 2 for c in net.simple_cycles):
            for m in valid_cets_semidirected(net):
                assert cet_parallel_effect(net, m) is ParallelEffect.NONE


def _effects(n, k, cls):
    out = {}
    for net in _tier(n, k, cls):
        for m in valid_cets_semidirected(net):
            out.setdefault(cet_parallel_effect(net, m), []).append((net, m))
    return out


def test_relocation_moves_triangle_donors_onto_pair():
    found = _effects(3, 2, "level1").get(ParallelEffect.RELOCATES_PARALLEL_PAIR, [])
    assert found
    for net, m in found:
        hosts = {c for c in net.simple_cycles if set(donors(net, m)) <= set(c.edges)}
        assert any(len(c) == 3 for c in hosts)
        assert any(m.recipient in c.edges and len(c) == 2 for c in net.simple_cycles)
        # the parallel pair ends up next to the former triangle
        assert sorted(len(c) for c in apply(net, m).simple_cycles) == sorted(len(c) for c in net.simple_cycles)


def test_exchange_moves_trade_pairs_for_loop():
    found = _effects(3, 2, "almost").get(ParallelEffect.EXCHANGES_LOOP_AND_PAIRS, [])
    assert found
    for net, m in found:
        before = sorted(len(c) for c in net.simple_cycles)
        after = sorted(len(c) for c in apply(net, m).simple_cycles)
        assert (1 in before) != (1 in after)


# ------------------------------------------------------------------ decompose


def test_local_move_decomposes_to_itself():
    t = next(iter(unrooted_trees(["x1", "x2", "x3", "x4"]).values()))
    m = next(m for m in valid_cets_semidirected(t) if is_cet1(t, m))
    seq = cet1_decompose(t, m)
    assert len(seq) == 1 and seq.final.code == apply(t, m).code


@pytest.mark.parametrize("n,k", [(3, 1), (3, 2), (4, 1)])
def test_every_plain_move_decomposes(n, k):
    bound = class_bound(n, k)
    for net in _tier(n, k):
        for m in valid_cets_semidirected(net):
            if cet_parallel_effect(net, m) is not ParallelEffect.NONE:
                continue
            if not apply(net, m).level_class.within(bound):
                with pytest.raises(PreconditionViolated):
                    cet1_decompose(net, m)
                continue
            seq = cet1_decompose(net, m)
            assert seq.final.code == apply(net, m).code
            assert all(is_cet1(a, st.move) for a, st in zip(seq.networks, seq.steps))
            assert all(x.level_class.within(bound) and x.k == k for x in seq.networks)
            assert [x.code for x in seq.replay()] == [x.code for x in seq.networks]


def test_decompose_length_is_path_length():
    t = next(iter(unrooted_trees([f"x{i}" for i in range(1, 6)]).values()))
    lengths = {len(cet1_decompose(t, m)) for m in valid_cets_semidirected(t)}
    assert 1 in lengths and max(lengths) >= 2


def test_decompose_rejects_relocation():
    net, m = _effects(3, 2, "level1")[ParallelEffect.RELOCATES_PARALLEL_PAIR][0]
    with pytest.raises(PreconditionViolated):
        cet1_decompose(net, m)


# ------------------------------------------------------------------ CET- / CET+


def test_cet_minus_on_parallel_pair_gives_two_leaf_tree(parallel_pair):
    results = {apply_cet_minus(parallel_pair, m).code for m in valid_cet_minus(parallel_pair)}
    assert results == {semidirected([("x1", "x2", False)]).code}


def test_cet_minus_on_loop_gives_two_leaf_tree():
    loop = semidirected([("u", "u", True), ("u", "w", False), ("w", "x1", False), ("w", "x2", False)])
    (m,) = valid_cet_minus(loop)
    assert apply_cet_minus(loop, m).code == semidirected([("x1", "x2", False)]).code


def test_tree_has_no_cet_minus():
    assert valid_cet_minus(semidirected([("x1", "x2", False)])) == []


def test_loop_variant_on_two_leaf_tree():
    tree = semidirected([("x1", "x2", False)])
    loop = semidirected([("u", "u", True), ("u", "w", False), ("w", "x1", False), ("w", "x2", False)])
    assert apply_cet_plus(tree, CetPlus("loop", next(iter(tree.edges)))).code == loop.code


def test_two_edge_variant_on_two_leaf_tree(parallel_pair, parallel_pair_swapped):
    tree = semidirected([("x1", "x2", False)])
    codes = {apply(tree, m).code for m in valid_cet_plus(tree) if m.variant == "two_edge"}
    assert codes == {parallel_pair.code, parallel_pair_swapped.code}


def test_second_loop_is_rejected():
    loop = semidirected([("u", "u", True), ("u", "w", False), ("w", "x1", False), ("w", "x2", False)])
    leaf_edge = next(e.id for e in loop.edges.values() if loop.labels.get(e.b) or loop.labels.get(e.a))
    with pytest.raises(InvalidMove):
        apply_cet_plus(loop, CetPlus("loop", leaf_edge))


@pytest.mark.parametrize("n,k,cls", [(2, 0, "all"), (2, 1, "all"), (3, 1, "all"), (3, 1, "level1"), (3, 2, "all")])
def test_plus_and_minus_are_inverse(n, k, cls):
    for net in _tier(n, k, cls):
        for m in valid_cet_plus(net):
            res = apply_move(net, m)
            assert res.network.k == net.k + 1
            back = inverse_move(net, m, res.network)
            assert isinstance(back, CetMinus) and apply(res.network, back).code == net.code
        for m in valid_cet_minus(net):
            res = apply_move(net, m)
            assert res.network.k == net.k - 1
            back = inverse_move(net, m, res.network)
            assert isinstance(back, CetPlus) and apply(res.network, back).code == net.code


def test_double_inverse_matches_original(parallel_pair):
    for m in valid_cets_semidirected(parallel_pair):
        after = apply(parallel_pair, m)
        back = inverse_move(parallel_pair, m, after)
        again = inverse_move(after, back, apply(after, back))
        assert apply(apply(after, back), again).code == after.code


# ------------------------------------------------------------ property tests


ALL_SMALL = [net for n, k, cls in SMALL for net in _tier(n, k, cls)]


@settings(max_examples=80, deadline=None)
@given(st.sampled_from(ALL_SMALL), st.data())
def test_moves_preserve_leaves_and_reticulations(net, data):
    moves = valid_cets_semidirected(net)
    if not moves:
        return
    m = data.draw(st.sampled_from(moves))
    r = apply(net, m)
    assert r.taxa == net.taxa and r.k == net.k
    assert component_count(r.vertices, list(r.edges.values())) == 1


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(ALL_SMALL), st.data())
def test_plus_moves_validate(net, data):
    moves = valid_cet_plus(net)
    if not moves:
        return
    m = data.draw(st.sampled_from(moves))
    r = apply(net, m)
    assert r.k == net.k + 1 and r.taxa == net.taxa
