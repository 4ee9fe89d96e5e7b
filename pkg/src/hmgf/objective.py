"""Groups, queries, solutions and the average-weight objective."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable

from .graph import INF, HeteroGraph, bfs_distances

Group = tuple[int, ...]


def as_group(g: HeteroGraph, members: Iterable[int]) -> Group:
    """Sorted, duplicate-free tuple of valid vertex ids."""
    grp = tuple(sorted(set(members)))
    for v in grp:
        g.check_vertex(v)
    return grp


@dataclass(frozen=True)
class Query:
    h: int
    p: int

    def __post_init__(self):
        if not isinstance(self.h, int) or self.h < 1:
            raise ValueError("h must be ≥ 1")
        if not isinstance(self.p, int) or self.p < 1:
            raise ValueError("p must be ≥ 1")


@dataclass(frozen=True)
class Solution:
    group: Group
    sigma: float
    total_weight: float
    max_hop: int | float
    strictly_feasible: bool
    solver: str
    elapsed: float = 0.0
    # exact total weight on the graph's integer scale, used for tie-breaking
    units: int = field(default=0, repr=False, compare=False)

    @property
    def size(self) -> int:
        return len(self.group)

    def replace(self, **changes) -> "Solution":
        return replace(self, **changes)


def weight_units(g: HeteroGraph, s: Iterable[int]) -> int:
    """Exact total potential weight inside ``s``, in graph units."""
    members = set(s)
    total = 0
    for u in members:
        for v, units in g.potential_units(u).items():
            if v in members and u < v:
                total += units
    return total


def total_potential_weight(g: HeteroGraph, s: Iterable[int]) -> float:
    s = as_group(g, s)
    return g.units_to_float(weight_units(g, s))


def average_weight(g: HeteroGraph, s: Iterable[int]) -> float:
    """Total potential weight inside ``s`` divided by ``|s|`` (0 for the empty set)."""
    s = as_group(g, s)
    return g.units_to_float(weight_units(g, s), len(s))


def max_pairwise_hop(g: HeteroGraph, s: Iterable[int]) -> int | float:
    """Largest friend-hop distance, measured in the whole graph, over pairs in ``s``."""
    s = as_group(g, s)
    if not s:
        raise ValueError("max_pairwise_hop of an empty group")
    worst = 0
    for i, u in enumerate(s[:-1]):
        targets = set(s[i + 1:])
        found = _bfs_until(g, u, targets)
        if found is None:
            return INF
        worst = max(worst, found)
    return worst


def _bfs_until(g: HeteroGraph, source: int, targets: set[int]) -> int | None:
    """Depth at which BFS from ``source`` has reached every target, or None."""
    remaining = set(targets)
    remaining.discard(source)
    if not remaining:
        return 0
    seen = {source}
    frontier = [source]
    d = 0
    while frontier:
        d += 1
        nxt = []
        for u in frontier:
            for x in g.friends(u):
                if x not in seen:
                    seen.add(x)
                    nxt.append(x)
                    remaining.discard(x)
        if not remaining:
            return d
        frontier = nxt
    return None


def is_feasible(g: HeteroGraph, s: Iterable[int], q: Query) -> bool:
    s = as_group(g, s)
    if len(s) < q.p:
        return False
    # bounded check: every member's h-ball must cover the rest of the group
    members = set(s)
    for u in s:
        if not members <= bfs_distances(g, u, cutoff=q.h).keys():
            return False
    return True


def make_solution(g: HeteroGraph, members: Iterable[int], q: Query, solver: str,
                  elapsed: float = 0.0, max_hop: int | float | None = None) -> Solution:
    grp = as_group(g, members)
    units = weight_units(g, grp)
    if max_hop is None:
        max_hop = max_pairwise_hop(g, grp) if grp else 0
    return Solution(
        group=grp,
        sigma=g.units_to_float(units, len(grp)),
        total_weight=g.units_to_float(units),
        max_hop=max_hop,
        strictly_feasible=len(grp) >= q.p and max_hop <= q.h,
        solver=solver,
        elapsed=elapsed,
        units=units,
    )


def better(a_units: int, a_size: int, b_units: int, b_size: int) -> bool:
    """True when ``a_units/a_size`` is strictly greater, compared exactly."""
    return a_units * b_size > b_units * a_size


def rank_key(sol: Solution) -> tuple:
    """Sort key of the global total order: strict first, higher σ, smaller, lexicographic."""
    sigma = Fraction(sol.units, len(sol.group)) if sol.group else Fraction(0)
    return (not sol.strictly_feasible, -sigma, len(sol.group), sol.group)


def best_of(solutions: Iterable[Solution | None]) -> Solution | None:
    pool = [s for s in solutions if s is not None]
    return min(pool, key=rank_key) if pool else None
