"""Comparator, metrics, instance generation and experiment sweeps."""

from __future__ import annotations

import csv
import hashlib
import heapq
import json
import logging
import math
import os
import random
import statistics
import time
from dataclasses import asdict, dataclass, field
from typing import Iterable

from .exact import BallTooLarge, ExactConfig, TimeBudgetExceeded, solve_exact
from .graph import INF, GraphBuilder, HeteroGraph
from .maxgf import MaxGFConfig, solve_maxgf
from .objective import Query, Solution, make_solution

log = logging.getLogger(__name__)

SOLVERS = ("exact", "maxgf", "dks")
CSV_HEADER = ["scenario", "instance", "solver", "sigma", "feasible", "max_hop", "size", "elapsed_ms"]


# ---------------------------------------------------------------------------
# DkS-style comparator


def dks_comparator(g: HeteroGraph, q: Query, friend_weight: float | None = None) -> Solution:
    """Hop-blind, type-blind densest-p-subgraph heuristic.

    Every friend edge gets weight ``friend_weight`` and every potential edge
    its own weight; vertices with the smallest combined incident weight are
    peeled (ties: smallest index) until exactly p remain. By default the
    friend weight equals the largest potential weight in the graph (1.0 when
    there are no potential edges), which is 1 for normalized predictions and
    keeps the result unchanged when all potential weights are rescaled.
    """
    t0 = time.perf_counter()
    p = q.p
    if p > g.n:
        raise ValueError(f"p={p} exceeds the number of vertices ({g.n})")
    if friend_weight is None:
        fw_units = g.max_weight_units() or (1 << g.unit_bits)
        den = 1
    else:
        if not friend_weight > 0:
            raise ValueError("friend_weight must be positive")
        num, den = float(friend_weight).as_integer_ratio()
        fw_units = num << g.unit_bits
    alive = set(range(g.n))
    score = {v: len(g.friends(v)) * fw_units + den * sum(g.potential_units(v).values())
             for v in alive}
    heap = [(s, v) for v, s in score.items()]
    heapq.heapify(heap)
    while len(alive) > p:
        s, v = heapq.heappop(heap)
        if v not in alive or s != score[v]:
            continue
        alive.remove(v)
        for x in g.friends(v):
            if x in alive:
                score[x] -= fw_units
                heapq.heappush(heap, (score[x], x))
        for x, u in g.potential_units(v).items():
            if x in alive:
                score[x] -= den * u
                heapq.heappush(heap, (score[x], x))
    return make_solution(g, alive, q, "dks", elapsed=time.perf_counter() - t0)


def run_solver(name: str, g: HeteroGraph, q: Query, *, radius_mode: str = "guarantee",
               strict_only: bool = False, prune: bool = True, threads: int = 1,
               max_ball_size: int = 25, time_budget: float | None = None) -> Solution | None:
    """Dispatch one solve call by solver name; None means no returnable group."""
    if name == "maxgf":
        return solve_maxgf(g, q, MaxGFConfig(radius_mode=radius_mode, strict_only=strict_only,
                                             prune=prune, threads=threads))
    if name == "exact":
        return solve_exact(g, q, ExactConfig(max_ball_size=max_ball_size,
                                             time_budget=time_budget, prune=prune,
                                             threads=threads))
    if name == "dks":
        if q.p > g.n:
            return None
        sol = dks_comparator(g, q)
        if strict_only and not sol.strictly_feasible:
            return None
        return sol
    raise ValueError(f"unknown solver {name!r}")


# ---------------------------------------------------------------------------
# batches and ratios


@dataclass
class Instance:
    id: int
    query: Query
    # anything with ``sigma`` and ``strictly_feasible`` attributes; None = nothing returned
    solutions: dict = field(default_factory=dict)
    optimal: object | None = None


def fea_ratio(batch: Iterable[Instance], solver: str) -> float:
    """Share of returned solutions that satisfy the strict hop constraint."""
    returned = [inst.solutions[solver] for inst in batch
                if inst.solutions.get(solver) is not None]
    if not returned:
        raise ValueError(f"no returned solutions for solver {solver!r}")
    return sum(1 for s in returned if s.strictly_feasible) / len(returned)


def obj_ratio(batch: Iterable[Instance], solver: str, skip_missing: bool = False) -> float:
    """Mean of sigma/sigma_opt; a missing solver answer counts as 0.

    Instances whose optimum has sigma 0 are left out (see ``obj_ratio_excluded``).
    Returns NaN when nothing is left to average.
    """
    ratios = []
    for inst in batch:
        opt = inst.optimal
        if opt is None:
            if skip_missing:
                continue
            raise ValueError(f"instance {inst.id} has no optimal solution")
        if opt.sigma == 0:
            continue
        sol = inst.solutions.get(solver)
        ratios.append(0.0 if sol is None else sol.sigma / opt.sigma)
    return statistics.fmean(ratios) if ratios else math.nan


def obj_ratio_excluded(batch: Iterable[Instance]) -> int:
    return sum(1 for inst in batch if inst.optimal is not None and inst.optimal.sigma == 0)


# ---------------------------------------------------------------------------
# instance generation


@dataclass(frozen=True)
class GenSpec:
    n: int
    friend_prob: float
    potential_prob: float
    seed: int = 0

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("n must be >= 0")
        for name in ("friend_prob", "potential_prob"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")


def _sample_pairs(n: int, prob: float, rng: random.Random):
    """Each pair (u < v) independently with probability ``prob``, via geometric skips."""
    if prob <= 0 or n < 2:
        return
    if prob >= 1:
        for v in range(1, n):
            for u in range(v):
                yield u, v
        return
    lp = math.log(1.0 - prob)
    v, w = 1, -1
    while v < n:
        w += 1 + int(math.log(1.0 - rng.random()) / lp)
        while w >= v and v < n:
            w -= v
            v += 1
        if v < n:
            yield w, v


def gen_random(spec: GenSpec) -> HeteroGraph:
    """Random heterogeneous graph; a pure function of ``spec``.

    A pair is a friend edge with probability ``friend_prob``; otherwise it
    becomes a potential edge with probability ``potential_prob`` and a weight
    drawn uniformly from (0, 1]. Vertices are labeled "0".."n-1".
    """
    rng = random.Random(spec.seed)
    b = GraphBuilder()
    for i in range(spec.n):
        b.add_vertex(str(i))
    friends = set(_sample_pairs(spec.n, spec.friend_prob, rng))
    for u, v in sorted(friends):
        b.add_friend(str(u), str(v))
    for u, v in _sample_pairs(spec.n, spec.potential_prob, rng):
        w = 1.0 - rng.random()
        if (u, v) not in friends:
            b.add_potential(str(u), str(v), w)
    return b.build()


def sample_subgraph(g: HeteroGraph, size: int, seed: int = 0,
                    start: int | None = None) -> HeteroGraph:
    """Induced subgraph grown by BFS over friend edges from a seeded random start.

    Neighbors are visited in a seeded random order. When a component runs
    out, BFS restarts from a random unvisited vertex.
    """
    if not 0 <= size <= g.n:
        raise ValueError(f"sample size {size} outside [0, {g.n}]")
    rng = random.Random(seed)
    picked: list[int] = []
    seen: set[int] = set()
    while len(picked) < size:
        if start is None or start in seen:
            rest = [v for v in range(g.n) if v not in seen]
            root = rng.choice(rest)
        else:
            root = start
        seen.add(root)
        picked.append(root)
        queue = [root]
        while queue and len(picked) < size:
            nxt = []
            for u in queue:
                nbrs = [x for x in g.friends(u) if x not in seen]
                rng.shuffle(nbrs)
                for x in nbrs:
                    if len(picked) == size:
                        break
                    seen.add(x)
                    picked.append(x)
                    nxt.append(x)
            queue = nxt
    return g.induced(picked)


# ---------------------------------------------------------------------------
# experiment sweeps


@dataclass
class ExperimentConfig:
    sweep: str
    values: list[int]
    solvers: list[str]
    reps: int = 30
    seed: int = 0
    n: int = 10
    h: int = 2
    p: int = 3
    friend_prob: float = 0.3
    potential_prob: float = 0.3
    base_n: int | None = None
    radius_mode: str = "guarantee"
    strict_only: bool = False
    max_ball_size: int = 25
    output_dir: str | None = None

    def __post_init__(self):
        if self.sweep not in ("n", "h", "p"):
            raise ValueError("sweep must be one of n, h, p")
        if not self.values:
            raise ValueError("sweep needs at least one value")
        if not self.solvers:
            raise ValueError("solver list is empty")
        for s in self.solvers:
            if s not in SOLVERS:
                raise ValueError(f"unknown solver {s!r}")
        if self.reps < 1:
            raise ValueError("reps must be >= 1")


_INT_KEYS = {"reps", "seed", "n", "h", "p", "base_n", "max_ball_size"}
_FLOAT_KEYS = {"friend_prob", "potential_prob"}


def parse_config(text: str) -> ExperimentConfig:
    """Read a ``key = value`` experiment config (``#`` comments, comma lists)."""
    kw: dict = {}
    known = set(ExperimentConfig.__dataclass_fields__)
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected key=value")
        key, val = (x.strip() for x in line.split("=", 1))
        if key not in known:
            raise ValueError(f"config line {lineno}: unknown key {key!r}")
        if key == "values":
            kw[key] = [int(x) for x in val.split(",") if x.strip()]
        elif key == "solvers":
            kw[key] = [x.strip() for x in val.split(",") if x.strip()]
        elif key in _INT_KEYS:
            kw[key] = int(val)
        elif key in _FLOAT_KEYS:
            kw[key] = float(val)
        elif key == "strict_only":
            kw[key] = val.lower() in ("1", "true", "yes", "on")
        else:
            kw[key] = val
    for req in ("sweep", "values", "solvers"):
        if req not in kw:
            raise ValueError(f"config is missing {req!r}")
    return ExperimentConfig(**kw)


@dataclass
class ReportRow:
    scenario: str
    instance: int
    solver: str
    sigma: float | None
    feasible: bool
    max_hop: int | None
    size: int
    elapsed_ms: float

    @property
    def strictly_feasible(self) -> bool:
        return self.feasible


@dataclass
class EvalReport:
    rows: list[ReportRow]
    aggregates: list[dict]
    errors: list[dict]
    config: dict


def _derive_seed(*parts) -> int:
    digest = hashlib.blake2b(repr(parts).encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def _instance_graph(cfg: ExperimentConfig, n: int, rep: int, base: HeteroGraph | None):
    if base is not None:
        return sample_subgraph(base, n, seed=_derive_seed(cfg.seed, "sample", n, rep))
    return gen_random(GenSpec(n, cfg.friend_prob, cfg.potential_prob,
                              _derive_seed(cfg.seed, "graph", n, rep)))


def run_experiment(cfg: ExperimentConfig, write: bool = True) -> EvalReport:
    base = None
    if cfg.base_n is not None:
        base = gen_random(GenSpec(cfg.base_n, cfg.friend_prob, cfg.potential_prob,
                                  _derive_seed(cfg.seed, "base")))
    rows: list[ReportRow] = []
    errors: list[dict] = []
    for value in cfg.values:
        scenario = f"{cfg.sweep}={value}"
        n = value if cfg.sweep == "n" else cfg.n
        h = value if cfg.sweep == "h" else cfg.h
        p = value if cfg.sweep == "p" else cfg.p
        q = Query(h, p)
        for rep in range(cfg.reps):
            g = _instance_graph(cfg, n, rep, base)
            for solver in cfg.solvers:
                t0 = time.perf_counter()
                try:
                    sol = run_solver(solver, g, q, radius_mode=cfg.radius_mode,
                                     strict_only=cfg.strict_only,
                                     max_ball_size=max(cfg.max_ball_size, p))
                except (BallTooLarge, TimeBudgetExceeded, ValueError) as e:
                    log.warning("%s instance %d %s: %s", scenario, rep, solver, e)
                    errors.append({"scenario": scenario, "instance": rep, "solver": solver,
                                   "error": f"{type(e).__name__}: {e}"})
                    sol = None
                elapsed_ms = (time.perf_counter() - t0) * 1000.0
                rows.append(_row(scenario, rep, solver, sol, elapsed_ms))
    report = EvalReport(rows, aggregate(rows, cfg.solvers), errors, asdict(cfg))
    if write and cfg.output_dir:
        write_report(report, cfg.output_dir, cfg.sweep)
    return report


def _row(scenario, rep, solver, sol: Solution | None, elapsed_ms: float) -> ReportRow:
    if sol is None:
        return ReportRow(scenario, rep, solver, None, False, None, 0, elapsed_ms)
    hop = None if sol.max_hop == INF else int(sol.max_hop)
    return ReportRow(scenario, rep, solver, sol.sigma, sol.strictly_feasible, hop,
                     sol.size, elapsed_ms)


def rows_to_batch(rows: list[ReportRow], scenario: str) -> list[Instance]:
    by_inst: dict[int, Instance] = {}
    for r in rows:
        if r.scenario != scenario:
            continue
        inst = by_inst.setdefault(r.instance, Instance(r.instance, None))
        inst.solutions[r.solver] = r if r.size > 0 else None
        if r.solver == "exact" and r.size > 0:
            inst.optimal = r
    return [by_inst[k] for k in sorted(by_inst)]


def _stats(xs: list[float]) -> tuple[float | None, float | None]:
    if not xs:
        return None, None
    return statistics.fmean(xs), statistics.pstdev(xs)


def aggregate(rows: list[ReportRow], solvers: list[str]) -> list[dict]:
    """Per (scenario, solver) summaries; a pure function of the rows."""
    scenarios = list(dict.fromkeys(r.scenario for r in rows))
    out = []
    for sc in scenarios:
        batch = rows_to_batch(rows, sc)
        for solver in solvers:
            mine = [r for r in rows if r.scenario == sc and r.solver == solver]
            solved = [r for r in mine if r.size > 0]
            mean_sigma, std_sigma = _stats([r.sigma for r in solved])
            fea_mean, fea_std = _stats([1.0 if r.feasible else 0.0 for r in solved])
            mean_ms, std_ms = _stats([r.elapsed_ms for r in mine])
            mean_size, _ = _stats([float(r.size) for r in solved])
            obj = None
            excluded = None
            if "exact" in solvers:
                ratio = obj_ratio(batch, solver, skip_missing=True)
                obj = None if math.isnan(ratio) else ratio
                excluded = obj_ratio_excluded(batch)
            out.append({
                "scenario": sc, "solver": solver, "count": len(mine), "solved": len(solved),
                "mean_sigma": mean_sigma, "std_sigma": std_sigma,
                "fea_ratio": fea_mean, "fea_std": fea_std,
                "obj_ratio": obj, "obj_excluded": excluded,
                "mean_size": mean_size,
                "mean_elapsed_ms": mean_ms, "std_elapsed_ms": std_ms,
            })
    return out


# ---------------------------------------------------------------------------
# report files


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_rows_csv(rows: list[ReportRow], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in rows:
            w.writerow([_fmt(getattr(r, k)) for k in CSV_HEADER])


def read_rows_csv(path) -> list[ReportRow]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_HEADER:
            raise ValueError(f"unexpected CSV header {reader.fieldnames}")
        return [ReportRow(
            scenario=d["scenario"], instance=int(d["instance"]), solver=d["solver"],
            sigma=float(d["sigma"]) if d["sigma"] else None,
            feasible=d["feasible"] == "true",
            max_hop=int(d["max_hop"]) if d["max_hop"] else None,
            size=int(d["size"]), elapsed_ms=float(d["elapsed_ms"]),
        ) for d in reader]


def rows_from_json(doc: dict) -> list[ReportRow]:
    return [ReportRow(**r) for r in doc["rows"]]


def _plot_tables(report: EvalReport, sweep: str) -> dict[str, list[list]]:
    solvers = list(dict.fromkeys(a["solver"] for a in report.aggregates))
    scenarios = list(dict.fromkeys(a["scenario"] for a in report.aggregates))
    agg = {(a["scenario"], a["solver"]): a for a in report.aggregates}
    figures = {"time": "mean_elapsed_ms", "fearatio": "fea_ratio", "size": "mean_size"}
    if "exact" in solvers:
        figures["objratio"] = "obj_ratio"
    tables = {}
    for fig, key in figures.items():
        table = [[sweep, *solvers]]
        for sc in scenarios:
            x = sc.split("=", 1)[1]
            table.append([x, *(_fmt(agg[sc, s][key]) for s in solvers)])
        tables[fig] = table
    return tables


def write_report(report: EvalReport, out_dir, sweep: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    write_rows_csv(report.rows, os.path.join(out_dir, "report.csv"))
    doc = {"config": report.config, "rows": [asdict(r) for r in report.rows],
           "aggregates": report.aggregates, "errors": report.errors}
    with open(os.path.join(out_dir, "report.json"), "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
    for fig, table in _plot_tables(report, sweep).items():
        with open(os.path.join(out_dir, f"plot_{fig}.tsv"), "w", encoding="utf-8") as fh:
            for line in table:
                fh.write("\t".join(line) + "\n")
