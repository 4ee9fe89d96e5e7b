"""Neighborhood-based link prediction for building potential edges."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .graph import HeteroGraph

METHODS = ("common-neighbors", "jaccard", "adamic-adar")
ALIASES = {"cn": "common-neighbors", "jaccard": "jaccard", "aa": "adamic-adar"}


@dataclass(frozen=True, order=True)
class ScoredPair:
    u: int
    v: int
    raw_score: float
    method: str


@dataclass(frozen=True)
class SelectionPolicy:
    top_k: int | None = None
    threshold: float | None = None

    def __post_init__(self):
        if (self.top_k is None) == (self.threshold is None):
            raise ValueError("exactly one of top_k and threshold must be given")
        if self.top_k is not None and (not isinstance(self.top_k, int) or self.top_k < 1):
            raise ValueError("top_k must be an integer >= 1")
        if self.threshold is not None and not 0.0 < self.threshold <= 1.0:
            raise ValueError("threshold must lie in (0, 1]")


def _method(name: str) -> str:
    name = ALIASES.get(name, name)
    if name not in METHODS:
        raise ValueError(f"unknown link prediction method {name!r}")
    return name


def score_pairs(g: HeteroGraph, method: str = "adamic-adar") -> list[ScoredPair]:
    """Score every non-friend pair at friend distance exactly 2.

    Pairs come out ordered by (u, v). Adamic-Adar terms are summed with
    ``math.fsum`` so the score does not depend on neighbor order.
    """
    method = _method(method)
    out = []
    for u in range(g.n):
        nu = g.friends(u)
        common: dict[int, list[int]] = {}
        for z in nu:
            for v in g.friends(z):
                if v > u:
                    common.setdefault(v, []).append(z)
        friends_u = set(nu)
        for v in sorted(common):
            if v in friends_u:
                continue
            zs = common[v]
            if method == "common-neighbors":
                score = float(len(zs))
            elif method == "jaccard":
                union = len(friends_u.union(g.friends(v)))
                score = len(zs) / union
            else:
                score = math.fsum(1.0 / math.log(len(g.friends(z))) for z in zs)
            out.append(ScoredPair(u, v, score, method))
    return out


def select_edges(g: HeteroGraph, pairs: list[ScoredPair], policy: SelectionPolicy) -> HeteroGraph:
    """Normalize scores by their maximum and return ``g`` with R replaced by the selection."""
    pairs = [sp for sp in pairs if sp.raw_score > 0]
    if not pairs:
        return g.with_potentials([])
    top = max(sp.raw_score for sp in pairs)
    weighted = [(sp.u, sp.v, sp.raw_score / top) for sp in pairs]
    if policy.threshold is not None:
        chosen = [e for e in weighted if e[2] >= policy.threshold]
    else:
        chosen = sorted(weighted, key=lambda e: (-e[2], e[0], e[1]))[:policy.top_k]
    return g.with_potentials(sorted(chosen))


def predict(g: HeteroGraph, method: str, policy: SelectionPolicy) -> HeteroGraph:
    return select_edges(g, score_pairs(g, method), policy)
