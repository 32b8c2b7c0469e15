"""Leaf-respecting canonical labeling of mixed multigraphs.

Colour refinement seeded by leaf labels and degree profiles, then exhaustive
individualisation of the first non-singleton cell.  Every discrete colouring
reached yields an edge list; the lexicographically smallest one is the
certificate.  Networks here have at most a few dozen vertices, so no
automorphism pruning is attempted.
"""

from __future__ import annotations

from .graph import MixedGraph

_UND, _OUT, _IN, _LOOP = 0, 1, 2, 3


def _adjacency(g: MixedGraph) -> dict[int, list[tuple[int, int]]]:
    adj: dict[int, list[tuple[int, int]]] = {v: [] for v in g.vertices}
    for e in g.edges.values():
        if e.is_loop:
            adj[e.a].append((_LOOP, e.a))
        elif e.directed:
            adj[e.a].append((_OUT, e.b))
            adj[e.b].append((_IN, e.a))
        else:
            adj[e.a].append((_UND, e.b))
            adj[e.b].append((_UND, e.a))
    return adj


def _rank(sigs: dict[int, tuple]) -> dict[int, int]:
    order = {s: i for i, s in enumerate(sorted(set(sigs.values())))}
    return {v: order[s] for v, s in sigs.items()}


def _refine(col: dict[int, int], adj) -> dict[int, int]:
    ncls = len(set(col.values()))
    while True:
        sigs = {v: (col[v], tuple(sorted((r, col[u]) for r, u in adj[v]))) for v in col}
        new = _rank(sigs)
        n2 = len(set(new.values()))
        if n2 == ncls:
            return new
        col, ncls = new, n2


def _certificate(g: MixedGraph, col: dict[int, int], labels) -> tuple:
    edges = []
    for e in g.edges.values():
        a, b = col[e.a], col[e.b]
        if not e.directed and a > b:
            a, b = b, a
        edges.append((a, b, 1 if e.directed else 0))
    edges.sort()
    names = tuple(sorted((col[v], lab) for v, lab in labels.items()))
    return (names, tuple(edges))


def canonical_form(g: MixedGraph, kind: str, ignore_labels: bool = False) -> tuple[bytes, dict[int, int]]:
    """Return ``(code, labeling)`` where labeling maps vertex -> canonical index."""
    adj = _adjacency(g)
    labels = {v: "*" for v in g.labels} if ignore_labels else dict(g.labels)
    init = {}
    for v in g.vertices:
        if v in labels:
            init[v] = (0, labels[v], 0, 0, 0, 0)
        else:
            rels = [r for r, _ in adj[v]]
            init[v] = (1, "", rels.count(_OUT), rels.count(_IN), rels.count(_UND), rels.count(_LOOP))
    col = _refine(_rank(init), adj)

    best: list = [None, None]

    def search(col: dict[int, int]) -> None:
        cells: dict[int, list[int]] = {}
        for v, c in col.items():
            cells.setdefault(c, []).append(v)
        target = None
        for c in sorted(cells):
            if len(cells[c]) > 1:
                target = c
                break
        if target is None:
            cert = _certificate(g, col, labels)
            if best[0] is None or cert < best[0]:
                best[0], best[1] = cert, dict(col)
            return
        for v in sorted(cells[target]):
            indiv = {u: 2 * c + (0 if u == v else 1) for u, c in col.items()}
            search(_refine(_rank(indiv), adj))

    search(col)
    cert, lab = best
    code = (kind + "|" + repr(cert)).encode()
    return code, lab
