"""Mutable mixed multigraph used to build and rewrite networks.

Vertices and edges are dense integer handles that are never reused inside one
graph lineage (copies keep the counters).  A directed edge ``a -> b`` with
``a == b`` is a loop; undirected loops are representable here but rejected by
validation.
"""

from __future__ import annotations

from typing import Iterator, NamedTuple

from .errors import InvalidMove


class Edge(NamedTuple):
    id: int
    a: int
    b: int
    directed: bool

    @property
    def is_loop(self) -> bool:
        return self.a == self.b

    def other(self, v: int) -> int:
        if v == self.a:
            return self.b
        if v == self.b:
            return self.a
        raise KeyError(v)

    def ends(self) -> tuple[int, int]:
        return (self.a, self.b)


class MixedGraph:
    def __init__(self) -> None:
        self.vertices: set[int] = set()
        self.edges: dict[int, Edge] = {}
        self.labels: dict[int, str] = {}
        self._inc: dict[int, list[int]] = {}
        self._next_vertex = 0
        self._next_edge = 0

    # construction -------------------------------------------------------

    def add_vertex(self, label: str | None = None, vid: int | None = None) -> int:
        if vid is None:
            vid = self._next_vertex
        if vid in self.vertices:
            raise ValueError(f"vertex {vid} already present")
        self._next_vertex = max(self._next_vertex, vid + 1)
        self.vertices.add(vid)
        self._inc[vid] = []
        if label is not None:
            self.labels[vid] = label
        return vid

    def add_edge(self, a: int, b: int, directed: bool, eid: int | None = None) -> int:
        if a not in self.vertices or b not in self.vertices:
            raise KeyError((a, b))
        if eid is None:
            eid = self._next_edge
        if eid in self.edges:
            raise ValueError(f"edge {eid} already present")
        self._next_edge = max(self._next_edge, eid + 1)
        self.edges[eid] = Edge(eid, a, b, directed)
        self._inc[a].append(eid)
        if b != a:
            self._inc[b].append(eid)
        return eid

    def remove_edge(self, eid: int) -> Edge:
        e = self.edges.pop(eid)
        self._inc[e.a].remove(eid)
        if e.b != e.a:
            self._inc[e.b].remove(eid)
        return e

    def remove_vertex(self, v: int) -> None:
        if self._inc[v]:
            raise ValueError(f"vertex {v} still has incident edges")
        self.vertices.remove(v)
        del self._inc[v]
        self.labels.pop(v, None)

    def set_directed(self, eid: int, tail: int, head: int) -> None:
        e = self.edges[eid]
        if {tail, head} != {e.a, e.b}:
            raise ValueError("orientation does not match edge endpoints")
        self.edges[eid] = Edge(eid, tail, head, True)

    def set_undirected(self, eid: int) -> None:
        e = self.edges[eid]
        self.edges[eid] = Edge(eid, e.a, e.b, False)

    def copy(self) -> "MixedGraph":
        g = MixedGraph()
        g.vertices = set(self.vertices)
        g.edges = dict(self.edges)
        g.labels = dict(self.labels)
        g._inc = {v: list(ids) for v, ids in self._inc.items()}
        g._next_vertex = self._next_vertex
        g._next_edge = self._next_edge
        return g

    # queries ------------------------------------------------------------

    def incident(self, v: int) -> list[int]:
        return list(self._inc[v])

    def degree(self, v: int) -> int:
        return sum(2 if self.edges[i].is_loop else 1 for i in self._inc[v])

    def in_degree(self, v: int) -> int:
        """Directed in-degree; a loop counts twice."""
        d = 0
        for i in self._inc[v]:
            e = self.edges[i]
            if e.directed and e.b == v:
                d += 2 if e.is_loop else 1
        return d

    def out_degree(self, v: int) -> int:
        return sum(1 for i in self._inc[v] if self.edges[i].directed and self.edges[i].a == v and not self.edges[i].is_loop)

    def neighbors(self, v: int) -> Iterator[tuple[int, Edge]]:
        for i in self._inc[v]:
            e = self.edges[i]
            yield e.other(v), e

    def edges_between(self, a: int, b: int) -> list[Edge]:
        return [self.edges[i] for i in self._inc[a] if self.edges[i].other(a) == b]

    # rewriting ----------------------------------------------------------

    def subdivide(self, eid: int, rooted: bool) -> tuple[int, int, int]:
        """Insert a new vertex ``w`` on edge ``eid``.

        Returns ``(w, first, second)`` where ``first`` joins the edge's ``a``
        end to ``w`` and ``second`` joins ``w`` to the ``b`` end.  In a rooted
        graph both halves keep the direction.  In a semi-directed graph only
        the half entering the old head stays directed; a subdivided loop
        ``(x, x)`` becomes two parallel edges directed into ``x``.
        """
        e = self.remove_edge(eid)
        w = self.add_vertex()
        if rooted:
            first = self.add_edge(e.a, w, True)
            second = self.add_edge(w, e.b, True)
        elif not e.directed:
            first = self.add_edge(e.a, w, False)
            second = self.add_edge(w, e.b, False)
        elif e.is_loop:
            first = self.add_edge(w, e.a, True)
            second = self.add_edge(w, e.b, True)
        else:
            first = self.add_edge(e.a, w, False)
            second = self.add_edge(w, e.b, True)
        return w, first, second

    def suppress(self, v: int, rooted: bool) -> int:
        """Remove a degree-2 vertex and join its two neighbours; returns the new edge id."""
        inc = self._inc[v]
        if len(inc) != 2 or any(self.edges[i].is_loop for i in inc):
            raise InvalidMove(f"vertex {v} cannot be suppressed")
        e1, e2 = (self.remove_edge(i) for i in list(inc))
        x, y = e1.other(v), e2.other(v)
        self.remove_vertex(v)
        if rooted:
            if e1.b == v and e2.a == v:
                return self.add_edge(x, y, True)
            if e2.b == v and e1.a == v:
                return self.add_edge(y, x, True)
            raise InvalidMove(f"vertex {v} is not a path vertex")
        into_x = e1.directed and e1.b == x
        into_y = e2.directed and e2.b == y
        if (e1.directed and e1.b == v) or (e2.directed and e2.b == v):
            raise InvalidMove(f"vertex {v} has a directed in-edge")
        if into_x and into_y:
            if x != y:
                raise InvalidMove(f"suppressing {v} joins two reticulation edges")
            return self.add_edge(x, x, True)
        if into_x:
            return self.add_edge(y, x, True)
        if into_y:
            return self.add_edge(x, y, True)
        return self.add_edge(x, y, False)
