"""Exact solver (anchored enumeration inside h-balls) and a naive oracle."""

from __future__ import annotations

import itertools
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

from .graph import INF, HeteroGraph, bfs_distances
from .objective import Query, Solution, make_solution


class BallTooLarge(RuntimeError):
    def __init__(self, vertex: int, size: int, limit: int):
        super().__init__(f"ball around vertex {vertex} has {size} vertices (limit {limit})")
        self.vertex = vertex
        self.size = size
        self.limit = limit


class TimeBudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class ExactConfig:
    max_ball_size: int = 25
    time_budget: float | None = None  # seconds
    prune: bool = True
    threads: int = 1


class _Incumbent:
    """Best (units, size) seen by any anchor; read without locking for pruning."""

    def __init__(self):
        self.value: tuple[int, int] | None = None
        self._lock = threading.Lock()

    def offer(self, units: int, size: int) -> None:
        with self._lock:
            cur = self.value
            if cur is None or units * cur[1] > cur[0] * size:
                self.value = (units, size)


def solve_exact(g: HeteroGraph, q: Query, cfg: ExactConfig | None = None) -> Solution | None:
    """Optimal group by enumeration, or None when no feasible group exists.

    Each feasible set lies inside the h-ball of every member, so it suffices
    to enumerate, for every anchor v, the pairwise-compatible subsets of
    ball(v, h) whose smallest member is v.
    """
    cfg = cfg or ExactConfig()
    if cfg.max_ball_size < q.p:
        raise ValueError("max_ball_size must be >= p")
    t0 = time.perf_counter()
    if q.p > g.n:
        return None
    deadline = None if cfg.time_budget is None else time.monotonic() + cfg.time_budget

    balls = []
    for v in range(g.n):
        b = bfs_distances(g, v, cutoff=q.h).keys()
        if len(b) > cfg.max_ball_size:
            raise BallTooLarge(v, len(b), cfg.max_ball_size)
        balls.append(frozenset(b))

    inc = _Incumbent()

    def run(v):
        return _search_anchor(g, v, balls, q.p, inc, cfg.prune, deadline)

    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            found = list(pool.map(run, range(g.n)))
    else:
        found = [run(v) for v in range(g.n)]

    found = [f for f in found if f is not None]
    if not found:
        return None
    units, group = min(found, key=lambda f: (-Fraction(f[0], len(f[1])), len(f[1]), f[1]))
    return make_solution(g, group, q, "exact", elapsed=time.perf_counter() - t0)


def _search_anchor(g, v, balls, p, inc, prune, deadline):
    """Best (units, group) among compatible subsets of ball(v) with minimum member v."""
    units_of = g.potential_units
    best = None  # (units, group)
    ticks = 0

    def consider(units, members):
        nonlocal best
        grp = tuple(sorted(members))
        if best is None:
            best = (units, grp)
        else:
            bu, bg = best
            lhs, rhs = units * len(bg), bu * len(grp)
            if lhs > rhs or (lhs == rhs and (len(grp), grp) < (len(bg), bg)):
                best = (units, grp)
            else:
                return
        inc.offer(units, len(grp))

    def dfs(members, units, cand):
        nonlocal ticks
        ticks += 1
        if deadline is not None and ticks % 1024 == 0 and time.monotonic() > deadline:
            raise TimeBudgetExceeded("exact solver exceeded its time budget")
        if len(members) >= p:
            consider(units, members)
        for i, x in enumerate(cand):
            wx = units_of(x)
            new_units = units + sum(wx.get(m, 0) for m in members)
            rest = [y for y in cand[i + 1:] if y in balls[x]]
            if len(members) + 1 + len(rest) < p:
                continue
            members.append(x)
            if prune and inc.value is not None:
                pool = set(members).union(rest)
                extra = sum(u for y in rest for z, u in units_of(y).items() if z in pool)
                iu, isz = inc.value
                if (new_units + extra) * isz < iu * p:
                    members.pop()
                    continue
            dfs(members, new_units, rest)
            members.pop()

    cand = sorted(u for u in balls[v] if u > v)
    dfs([v], 0, cand)
    return best


def brute_force_oracle(g: HeteroGraph, q: Query) -> Solution | None:
    """Naive reference: every subset, all-pairs distances by Floyd-Warshall."""
    n = g.n
    if n > 20:
        raise ValueError("brute_force_oracle is limited to graphs with at most 20 vertices")
    dist = [[0 if i == j else INF for j in range(n)] for i in range(n)]
    for u, v in g.friend_edges():
        dist[u][v] = dist[v][u] = 1
    for k in range(n):
        dk = dist[k]
        for i in range(n):
            di = dist[i]
            dik = di[k]
            if dik == INF:
                continue
            for j in range(n):
                if dik + dk[j] < di[j]:
                    di[j] = dik + dk[j]
    w = {}
    for u, v, x in g.potential_edges():
        w[u, v] = Fraction(x)

    best = None
    for size in range(q.p, n + 1):
        for s in itertools.combinations(range(n), size):
            hop = max((dist[a][b] for a, b in itertools.combinations(s, 2)), default=0)
            if hop > q.h:
                continue
            total = sum((w.get(pair, Fraction(0)) for pair in itertools.combinations(s, 2)),
                        Fraction(0))
            key = (-total / size, size, s)
            if best is None or key < best[0]:
                best = (key, total, hop)
    if best is None:
        return None
    (neg_sigma, size, s), total, hop = best
    return Solution(group=s, sigma=float(-neg_sigma), total_weight=float(total),
                    max_hop=hop, strictly_feasible=True, solver="oracle",
                    units=int(total * (1 << g.unit_bits)))

