"""MaxGF: greedy peeling over hop-bounded candidate subgraphs.

For every center v the candidate is the friend-hop ball around v. Inside it,
vertices with the lowest incident potential weight are peeled one at a time
and the best visited set of size >= p is kept. Peel results that break the
hop constraint are then repaired by removing or swapping members. The final
answer is the best candidate result under the global order (strictly
feasible first, then higher average weight, smaller size, lexicographic).

With r = h every strictly feasible group containing v lies inside the
candidate of v, and peeling with a size floor keeps at least a third of the
best average weight inside the candidate, with pairwise hops at most 2h.
"""

from __future__ import annotations

import heapq
import math
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

from .graph import HeteroGraph, HopCache, ball
from .objective import (Group, Query, Solution, as_group, best_of, make_solution,
                        weight_units)

RADIUS_MODES = ("guarantee", "tight")


@dataclass(frozen=True)
class MaxGFConfig:
    radius_mode: str = "guarantee"
    strict_only: bool = False
    prune: bool = True
    threads: int = 1
    cache_entries: int = 20000

    def __post_init__(self):
        if self.radius_mode not in RADIUS_MODES:
            raise ValueError(f"radius_mode must be one of {RADIUS_MODES}")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")


@dataclass
class PeelTrace:
    removals: list[tuple[int, float]] = field(default_factory=list)
    # (size, total_weight, sigma) for every visited set of size >= p
    steps: list[tuple[int, float, float]] = field(default_factory=list)


@dataclass
class CandidateResult:
    center: int
    relaxed_group: Group | None  # peel result before post-processing
    relaxed_units: int
    best_strict: Solution | None
    upper_bound: float
    pruned: bool = False
    graph: HeteroGraph | None = field(default=None, repr=False, compare=False)
    query: Query | None = field(default=None, repr=False, compare=False)

    @cached_property
    def best_relaxed(self) -> Solution | None:
        if self.relaxed_group is None:
            return None
        return make_solution(self.graph, self.relaxed_group, self.query, "maxgf")


def candidate_radius(h: int, mode: str) -> int:
    if mode == "guarantee":
        return h
    if mode == "tight":
        return math.ceil(h / 2)
    raise ValueError(f"unknown radius mode {mode!r}")


def candidate(g: HeteroGraph, v: int, q: Query, cfg: MaxGFConfig | None = None) -> Group:
    cfg = cfg or MaxGFConfig()
    return ball(g, v, candidate_radius(q.h, cfg.radius_mode))


def upper_bound(g: HeteroGraph, c, p: int) -> float:
    """w(c)/p, an upper bound on the average weight of any subset of c with >= p members."""
    c = as_group(g, c)
    if not c:
        raise ValueError("upper_bound of an empty candidate")
    return g.units_to_float(weight_units(g, c), p)


def _incident(g: HeteroGraph, c: Group) -> dict[int, int]:
    members = set(c)
    return {v: sum(u for x, u in g.potential_units(v).items() if x in members) for v in c}


def _peel(g: HeteroGraph, c: Group, p: int, record: bool = True, inc=None):
    """Core peeling loop. Returns (best group or None, its units, trace)."""
    trace = PeelTrace()
    members = set(c)
    inc = dict(inc) if inc is not None else _incident(g, c)
    total = sum(inc.values()) // 2
    size = len(c)
    heap = [(inc[v], v) for v in c]
    heapq.heapify(heap)
    order = []
    best_k, best_units, best_size = None, 0, 1
    if size >= p:
        best_k, best_units, best_size = 0, total, size
        if record:
            trace.steps.append((size, g.units_to_float(total), g.units_to_float(total, size)))
    floor = max(p, 1)
    while size > floor:
        d, v = heapq.heappop(heap)
        if v not in members or d != inc[v]:
            continue
        members.remove(v)
        order.append(v)
        if record:
            trace.removals.append((v, g.units_to_float(d)))
        total -= d
        size -= 1
        for x, u in g.potential_units(v).items():
            if x in members:
                inc[x] -= u
                heapq.heappush(heap, (inc[x], x))
        if size >= p:
            if record:
                trace.steps.append((size, g.units_to_float(total), g.units_to_float(total, size)))
            # ties go to the later, smaller set
            if total * best_size >= best_units * size:
                best_k, best_units, best_size = len(order), total, size
    if best_k is None:
        return None, 0, trace
    removed = set(order[:best_k])
    return tuple(v for v in c if v not in removed), best_units, trace


def peel_at_least_p(g: HeteroGraph, c, p: int, h: int | None = None,
                    solver: str = "maxgf") -> tuple[Solution | None, PeelTrace]:
    """Greedy peeling of ``c`` down to ``max(p, 1)`` vertices.

    The vertex with the smallest incident potential weight inside the
    current set is removed first (ties: smallest index). The best visited
    set of size >= p is returned, or None when ``|c| < p``. ``h`` is only
    used to fill in the solution's feasibility flag.
    """
    c = as_group(g, c)
    if not c:
        raise ValueError("cannot peel an empty candidate")
    grp, _, trace = _peel(g, c, p)
    if grp is None:
        return None, trace
    sol = make_solution(g, grp, Query(h if h is not None else 1, max(p, 1)), solver)
    if h is None:
        sol = sol.replace(strictly_feasible=False)
    return sol, trace


def post_process(g: HeteroGraph, s: Solution, q: Query, c) -> Solution:
    """Restore the hop constraint by removing or swapping members.

    (a) While a pair is more than h hops apart and the group is larger than
        p, drop the member in the most violating pairs (ties: lower incident
        weight inside the group, then lower index).
    (b) At size p, try replacing one violating member by a vertex of ``c``
        outside the group; keep violation-free swaps and take the best one.
    (c) Otherwise return ``s`` itself, flagged as not strictly feasible.
    """
    c = as_group(g, c)
    if not set(s.group) <= set(c):
        raise ValueError("solution is not contained in the candidate")
    near = HopCache(g, max_entries=max(len(c), 1), cutoff=q.h).distances
    grp, units, hop = _repair(g, s.group, q, c, near)
    if hop is None:
        return make_solution(g, s.group, q, s.solver, s.elapsed).replace(strictly_feasible=False)
    return _strict_solution(g, grp, units, hop, s.solver, s.elapsed)


def _strict_solution(g, grp, units, hop, solver, elapsed=0.0) -> Solution:
    return Solution(group=grp, sigma=g.units_to_float(units, len(grp)),
                    total_weight=g.units_to_float(units), max_hop=hop,
                    strictly_feasible=True, solver=solver, elapsed=elapsed, units=units)


def _hop_within(near, group) -> int | None:
    """Max pairwise hop when every pair is within the cache cutoff, else None."""
    worst = 0
    for u in group:
        du = near(u)
        for x in group:
            d = du.get(x)
            if d is None:
                return None
            if d > worst:
                worst = d
    return worst


def _repair(g, group, q, c, near):
    """Post-processing core. Returns (group, units, max_hop) or (.., .., None) on failure."""
    group = set(group)
    hop = _hop_within(near, group)
    if hop is not None:
        return tuple(sorted(group)), weight_units(g, group), hop

    def incident(u, members):
        return sum(w for y, w in g.potential_units(u).items() if y in members)

    ball_of = {u: near(u) for u in group}
    viol = {u: sum(1 for x in group if x not in ball_of[u]) for u in group}
    inc = {u: incident(u, group) for u in group}
    while any(viol.values()) and len(group) > q.p:
        z = min(group, key=lambda u: (-viol[u], inc[u], u))
        group.remove(z)
        del viol[z], inc[z]
        for u in group:
            if z not in ball_of[u]:
                viol[u] -= 1
        for y, w in g.potential_units(z).items():
            if y in group:
                inc[y] -= w

    if not any(viol.values()):
        grp = tuple(sorted(group))
        return grp, weight_units(g, grp), _hop_within(near, grp)

    if len(group) == q.p:
        units = weight_units(g, group)
        best = None  # (units, group)
        outside = [y for y in c if y not in group]
        for x in sorted(u for u in group if viol[u]):
            rest = group - {x}
            if _hop_within(near, rest) is None:
                continue
            base = units - incident(x, group)
            for y in outside:
                dy = near(y)
                if all(m in dy for m in rest):
                    cand = (base + incident(y, rest), tuple(sorted(rest | {y})))
                    if (best is None or cand[0] > best[0]
                            or (cand[0] == best[0] and cand[1] < best[1])):
                        best = cand
        if best is not None:
            return best[1], best[0], _hop_within(near, best[1])
    return tuple(sorted(group)), 0, None


class _Best:
    """Strict incumbent (units, size) shared between workers."""

    def __init__(self):
        self.value: tuple[int, int] | None = None
        self._lock = threading.Lock()

    def offer(self, units: int, size: int) -> None:
        with self._lock:
            cur = self.value
            if cur is None or units * cur[1] > cur[0] * size:
                self.value = (units, size)


def _candidate_set(g, v, q, radius, near) -> Group:
    return tuple(sorted(near(v))) if radius == q.h else ball(g, v, radius)


def _top_bound(inc: dict[int, int], p: int) -> int:
    """Numerator (over 2p) of an upper bound on sigma for any >= p subset.

    A k-subset holds at most half of its k largest incident weights, and the
    average of the top k is non-increasing in k, so k = p is the worst case.
    This never exceeds w(c)/p.
    """
    return sum(heapq.nlargest(p, inc.values()))


def _run_candidate(g, v, q, cfg, radius, best, near):
    c = _candidate_set(g, v, q, radius, near)
    inc = _incident(g, c)
    ub = g.units_to_float(sum(inc.values()) // 2, q.p)
    if len(c) < q.p:
        return CandidateResult(v, None, 0, None, ub, graph=g, query=q)
    cur = best.value
    # strictly-less pruning never discards a candidate that could tie the optimum
    if cfg.prune and cur is not None and _top_bound(inc, q.p) * cur[1] < cur[0] * 2 * q.p:
        return CandidateResult(v, None, 0, None, ub, pruned=True, graph=g, query=q)
    grp, units, _ = _peel(g, c, q.p, record=False, inc=inc)
    fixed, fixed_units, hop = _repair(g, grp, q, c, near)
    strict = None
    if hop is not None:
        strict = _strict_solution(g, fixed, fixed_units, hop, "maxgf")
        best.offer(fixed_units, len(fixed))
    return CandidateResult(v, grp, units, strict, ub, graph=g, query=q)


def maxgf_candidates(g: HeteroGraph, q: Query,
                     cfg: MaxGFConfig | None = None) -> list[CandidateResult]:
    """Per-center results, ordered by center.

    Workers share the strict incumbent for pruning; a stale read only prunes
    less, so the selected answer does not depend on scheduling.
    """
    cfg = cfg or MaxGFConfig()
    radius = candidate_radius(q.h, cfg.radius_mode)
    best = _Best()
    near = HopCache(g, max_entries=cfg.cache_entries, cutoff=q.h).distances

    def run(span):
        return [_run_candidate(g, v, q, cfg, radius, best, near) for v in span]

    if cfg.threads > 1 and g.n > 1:
        chunk = max(1, math.ceil(g.n / (cfg.threads * 8)))
        spans = [range(i, min(i + chunk, g.n)) for i in range(0, g.n, chunk)]
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            return [r for part in pool.map(run, spans) for r in part]
    return run(range(g.n))


def solve_maxgf(g: HeteroGraph, q: Query, cfg: MaxGFConfig | None = None) -> Solution | None:
    cfg = cfg or MaxGFConfig()
    t0 = time.perf_counter()
    if q.p > g.n:
        return None
    results = maxgf_candidates(g, q, cfg)
    sol = best_of(r.best_strict for r in results)
    if sol is None and not cfg.strict_only:
        # no strict result anywhere: rank relaxed groups first, measure hops for the winner only
        relaxed = [r for r in results if r.relaxed_group is not None]
        if relaxed:
            win = min(relaxed, key=lambda r: (-Fraction(r.relaxed_units, len(r.relaxed_group)),
                                              len(r.relaxed_group), r.relaxed_group))
            sol = win.best_relaxed
    if sol is None:
        return None
    return sol.replace(solver="maxgf", elapsed=time.perf_counter() - t0)
