"""Heterogeneous social graph: friend edges plus weighted potential edges."""

from __future__ import annotations

import math
import threading
from bisect import bisect_left
from collections import OrderedDict, deque
from typing import Iterable, Iterator

INF = math.inf


class GraphError(ValueError):
    """Raised when a graph violates a structural invariant."""


class ParseError(GraphError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class HeteroGraph:
    """Immutable undirected graph with two disjoint relations.

    Friend edges (E) are unweighted and are the only edges used for hop
    distances. Potential edges (R) carry a weight in (0, 1].

    Besides the float weights, every potential weight is also held as an
    exact integer ``units`` value on a shared power-of-two scale
    (``weight = units / 2**unit_bits``), so sums and ratio comparisons
    never depend on summation order.
    """

    __slots__ = (
        "labels", "_index", "_friends", "_potentials",
        "_units", "unit_bits", "_n_friend", "_n_potential",
    )

    def __init__(self, labels, friends, potentials):
        # trusted constructor; use GraphBuilder for validated input
        self.labels: tuple[str, ...] = tuple(labels)
        self._index = {lab: i for i, lab in enumerate(self.labels)}
        self._friends: tuple[tuple[int, ...], ...] = tuple(
            tuple(sorted(nb)) for nb in friends)
        self._potentials: tuple[tuple[tuple[int, float], ...], ...] = tuple(
            tuple(sorted(nb.items())) for nb in potentials)
        bits = 0
        for nb in self._potentials:
            for _, w in nb:
                bits = max(bits, w.as_integer_ratio()[1].bit_length() - 1)
        self.unit_bits = bits
        self._units = tuple({u: _to_units(w, bits) for u, w in nb} for nb in self._potentials)
        self._n_friend = sum(len(nb) for nb in self._friends) // 2
        self._n_potential = sum(len(nb) for nb in self._potentials) // 2

    @property
    def n(self) -> int:
        return len(self.labels)

    def __len__(self) -> int:
        return len(self.labels)

    def __repr__(self) -> str:
        return (f"HeteroGraph(n={self.n}, friend_edges={self._n_friend}, "
                f"potential_edges={self._n_potential})")

    def __eq__(self, other) -> bool:
        if not isinstance(other, HeteroGraph):
            return NotImplemented
        return (self.labels == other.labels and self._friends == other._friends
                and self._potentials == other._potentials)

    __hash__ = None

    def index(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise KeyError(f"unknown vertex {label!r}") from None

    def label(self, v: int) -> str:
        return self.labels[v]

    def check_vertex(self, v: int) -> None:
        if not isinstance(v, int) or not 0 <= v < self.n:
            raise IndexError(f"invalid vertex id {v!r} (n={self.n})")

    def friends(self, v: int) -> tuple[int, ...]:
        return self._friends[v]

    def potentials(self, v: int) -> tuple[tuple[int, float], ...]:
        return self._potentials[v]

    def potential_units(self, v: int) -> dict[int, int]:
        return self._units[v]

    def weight(self, u: int, v: int) -> float | None:
        units = self._units[u].get(v)
        return None if units is None else self.units_to_float(units)

    def are_friends(self, u: int, v: int) -> bool:
        nb = self._friends[u]
        i = bisect_left(nb, v)
        return i < len(nb) and nb[i] == v

    @property
    def num_friend_edges(self) -> int:
        return self._n_friend

    @property
    def num_potential_edges(self) -> int:
        return self._n_potential

    def friend_edges(self) -> Iterator[tuple[int, int]]:
        for u, nb in enumerate(self._friends):
            for v in nb:
                if u < v:
                    yield u, v

    def potential_edges(self) -> Iterator[tuple[int, int, float]]:
        for u, nb in enumerate(self._potentials):
            for v, w in nb:
                if u < v:
                    yield u, v, w

    def units_to_float(self, units: int, size: int = 1) -> float:
        """Correctly rounded ``units / (size * 2**unit_bits)``."""
        if size <= 0:
            return 0.0
        return units / (size << self.unit_bits)

    def max_weight_units(self) -> int:
        return max((max(nb.values()) for nb in self._units if nb), default=0)

    def with_potentials(self, edges: Iterable[tuple[int, int, float]]) -> "HeteroGraph":
        """Same vertices and friend edges, potential relation replaced."""
        b = GraphBuilder()
        for lab in self.labels:
            b.add_vertex(lab)
        for u, v in self.friend_edges():
            b.add_friend(self.labels[u], self.labels[v])
        for u, v, w in edges:
            b.add_potential(self.labels[u], self.labels[v], w)
        return b.build()

    def scaled(self, factor: float) -> "HeteroGraph":
        """Copy with every potential weight multiplied by ``factor``."""
        if not factor > 0:
            raise ValueError("scale factor must be positive")
        return HeteroGraph(
            self.labels, self._friends,
            [{v: w * factor for v, w in nb} for nb in self._potentials])

    def induced(self, vertices: Iterable[int]) -> "HeteroGraph":
        """Induced subgraph on both relations; vertices keep their labels and relative order."""
        keep = sorted(set(vertices))
        pos = {v: i for i, v in enumerate(keep)}
        friends = [[pos[u] for u in self._friends[v] if u in pos] for v in keep]
        pots = [{pos[u]: w for u, w in self._potentials[v] if u in pos} for v in keep]
        return HeteroGraph([self.labels[v] for v in keep], friends, pots)


def _to_units(w: float, bits: int) -> int:
    num, den = w.as_integer_ratio()
    return num << (bits - (den.bit_length() - 1))


class GraphBuilder:
    """Accumulates labeled edges and validates them into a HeteroGraph."""

    def __init__(self):
        self._labels: list[str] = []
        self._index: dict[str, int] = {}
        self._friends: list[set[int]] = []
        self._pots: list[dict[int, float]] = []

    def add_vertex(self, label: str) -> int:
        i = self._index.get(label)
        if i is None:
            i = len(self._labels)
            self._index[label] = i
            self._labels.append(label)
            self._friends.append(set())
            self._pots.append({})
        return i

    def _pair(self, a: str, b: str) -> tuple[int, int]:
        if a == b:
            raise GraphError(f"self-loop on {a!r}")
        return self.add_vertex(a), self.add_vertex(b)

    def add_friend(self, a: str, b: str) -> None:
        u, v = self._pair(a, b)
        if v in self._friends[u]:
            raise GraphError(f"duplicate friend edge ({a}, {b})")
        if v in self._pots[u]:
            raise GraphError(f"pair ({a}, {b}) declared as both friend and potential edge")
        self._friends[u].add(v)
        self._friends[v].add(u)

    def add_potential(self, a: str, b: str, w: float) -> None:
        w = float(w)
        if not 0.0 < w <= 1.0:
            raise GraphError(f"weight {w!r} for ({a}, {b}) outside (0, 1]")
        u, v = self._pair(a, b)
        if v in self._pots[u]:
            raise GraphError(f"duplicate potential edge ({a}, {b})")
        if v in self._friends[u]:
            raise GraphError(f"pair ({a}, {b}) declared as both friend and potential edge")
        self._pots[u][v] = w
        self._pots[v][u] = w

    def build(self) -> HeteroGraph:
        return HeteroGraph(self._labels, self._friends, self._pots)


def parse_graph(text: str) -> HeteroGraph:
    """Parse the line-oriented graph format.

    ``# ...`` comments, ``F u v`` friend edges, ``P u v w`` potential edges,
    and ``V u`` for a vertex that may have no edges.
    """
    b = GraphBuilder()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        kind = tok[0]
        try:
            if kind == "F" and len(tok) == 3:
                b.add_friend(tok[1], tok[2])
            elif kind == "P" and len(tok) == 4:
                try:
                    w = float(tok[3])
                except ValueError:
                    raise GraphError(f"bad weight {tok[3]!r}") from None
                if not math.isfinite(w):
                    raise GraphError(f"weight {tok[3]!r} outside (0, 1]")
                b.add_potential(tok[1], tok[2], w)
            elif kind == "V" and len(tok) == 2:
                b.add_vertex(tok[1])
            else:
                raise GraphError(f"malformed record {raw.strip()!r}")
        except GraphError as e:
            raise ParseError(lineno, str(e)) from None
    return b.build()


def read_graph(path) -> HeteroGraph:
    with open(path, encoding="utf-8") as fh:
        return parse_graph(fh.read())


def format_graph(g: HeteroGraph) -> str:
    """Serialize with sorted records so that write/parse/write is byte-stable.

    Isolated vertices come first as ``V`` records, then ``F`` records, then
    ``P`` records, each sorted by their (lexicographically ordered) endpoint
    labels. Weights use ``repr`` so they round-trip exactly.
    """
    lab = g.labels
    out = [f"V {lab[v]}" for v in sorted(range(g.n), key=lab.__getitem__)
           if not g.friends(v) and not g.potentials(v)]
    out += [f"F {a} {b}" for a, b in sorted(
        tuple(sorted((lab[u], lab[v]))) for u, v in g.friend_edges())]
    pots = sorted((*sorted((lab[u], lab[v])), w) for u, v, w in g.potential_edges())
    out += [f"P {a} {b} {w!r}" for a, b, w in pots]
    return "".join(line + "\n" for line in out)


def write_graph(g: HeteroGraph, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_graph(g))


# ---------------------------------------------------------------------------
# hop distances over friend edges


def bfs_distances(g: HeteroGraph, source: int, cutoff: int | None = None) -> dict[int, int]:
    """Friend-edge BFS distances from ``source``, optionally limited to ``cutoff`` hops."""
    g.check_vertex(source)
    dist = {source: 0}
    frontier = [source]
    d = 0
    while frontier and (cutoff is None or d < cutoff):
        d += 1
        nxt = []
        for u in frontier:
            for x in g.friends(u):
                if x not in dist:
                    dist[x] = d
                    nxt.append(x)
        frontier = nxt
    return dist


class HopCache:
    """Bounded LRU memo of single-source BFS results. Thread-safe.

    With ``cutoff`` set, each entry only holds vertices within that many hops.
    """

    def __init__(self, g: HeteroGraph, max_entries: int = 1024, cutoff: int | None = None):
        if max_entries < 1:
            raise ValueError("max_entries must be >= 1")
        self.g = g
        self.max_entries = max_entries
        self.cutoff = cutoff
        self._memo: OrderedDict[int, dict[int, int]] = OrderedDict()
        self._lock = threading.Lock()

    def distances(self, source: int) -> dict[int, int]:
        with self._lock:
            hit = self._memo.get(source)
            if hit is not None:
                self._memo.move_to_end(source)
                return hit
        dist = bfs_distances(self.g, source, cutoff=self.cutoff)
        with self._lock:
            self._memo[source] = dist
            while len(self._memo) > self.max_entries:
                self._memo.popitem(last=False)
        return dist

    def __len__(self) -> int:
        return len(self._memo)


def hop_distance(g: HeteroGraph, u: int, v: int, cache: HopCache | None = None) -> int | float:
    """Friend-edge hop count between ``u`` and ``v``; ``INF`` when disconnected."""
    g.check_vertex(u)
    g.check_vertex(v)
    if cache is not None:
        if cache.cutoff is not None:
            raise ValueError("hop_distance needs a cache without cutoff")
        return cache.distances(u).get(v, INF)
    if u == v:
        return 0
    seen = {u}
    q = deque([(u, 0)])
    while q:
        x, d = q.popleft()
        for y in g.friends(x):
            if y == v:
                return d + 1
            if y not in seen:
                seen.add(y)
                q.append((y, d + 1))
    return INF


def ball(g: HeteroGraph, v: int, r: int) -> tuple[int, ...]:
    """Sorted vertices within ``r`` friend hops of ``v`` (always contains ``v``)."""
    if r < 0:
        raise ValueError("radius must be >= 0")
    return tuple(sorted(bfs_distances(g, v, cutoff=r)))
