"""Structure search: exhaustive minimisation (p <= 4) and greedy hill climbing."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

from .dataset import OrdinalDataset
from .errors import TooManyNodes, ValidationError
from .graph import MAX_ENUMERATE_NODES, Dag, Move, MoveKind, apply_move, enumerate_dags, legal_moves
from .regression import FitOptions
from .scoring import LocalScore, ScoreCache, compute_local_score, global_bic, local_bic, sum_scores


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get("ORDCD_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class SearchOptions:
    fit: FitOptions = field(default_factory=FitOptions)
    max_parents: int | None = None
    strategy: str = "best"  # "best" (largest BIC decrease) or "first" (first improving move)
    threads: int = 1

    def __post_init__(self):
        if self.strategy not in ("best", "first"):
            raise ValidationError(f"unknown greedy strategy {self.strategy!r}")
        if self.max_parents is not None and self.max_parents < 0:
            raise ValidationError("max_parents must be >= 0")


@dataclass
class DiscoveryResult:
    graph: Dag
    bic: float
    local_scores: list
    iterations: int = 0
    moves_taken: list = field(default_factory=list)
    score_evaluations: int = 0
    graphs_scored: int = 0
    search: str = "greedy"

    def to_dict(self, names: Sequence[str]) -> dict:
        nm = lambda j: names[j - 1]  # noqa: E731
        return {
            "search": self.search,
            "edges": [[nm(s), nm(t)] for s, t in self.graph.sorted_edges()],
            "bic": self.bic,
            "local_scores": [
                dict(ls.to_dict(), name=nm(ls.node), parents=[nm(k) for k in ls.parent_set])
                for ls in self.local_scores
            ],
            "iterations": self.iterations,
            "moves_taken": [
                {"kind": m.kind.name.lower(), "source": nm(m.edge[0]), "target": nm(m.edge[1])}
                for m in self.moves_taken
            ],
            "score_evaluations": self.score_evaluations,
            "graphs_scored": self.graphs_scored,
        }


def _changed_parents(parent_sets: list[tuple], move: Move) -> dict[int, tuple]:
    """New parent tuples for the nodes a move touches (1-based node -> parents)."""
    s, t = move.edge
    pa_t = set(parent_sets[t - 1])
    if move.kind is MoveKind.ADD:
        return {t: tuple(sorted(pa_t | {s}))}
    if move.kind is MoveKind.DELETE:
        return {t: tuple(sorted(pa_t - {s}))}
    pa_s = set(parent_sets[s - 1])
    return {t: tuple(sorted(pa_t - {s})), s: tuple(sorted(pa_s | {t}))}


def _prefetch(keys, data, opts: SearchOptions, cache: ScoreCache):
    """Fill cache misses, optionally on a thread pool; insertion order is fixed."""
    missing = sorted({k for k in keys if k not in cache})
    if not missing:
        return
    cache.bind(data, opts.fit)
    if opts.threads > 1 and len(missing) > 1:
        with ThreadPoolExecutor(max_workers=opts.threads) as pool:
            scores = list(pool.map(lambda k: compute_local_score(k[0], k[1], data, opts.fit), missing))
        for k, sc in zip(missing, scores):
            cache.put(k, sc)
        cache.misses += len(missing)
    else:
        for node, pa in missing:
            local_bic(node, pa, data, opts.fit, cache)


def greedy_search(
    data: OrdinalDataset,
    initial: Dag | None = None,
    opts: SearchOptions | None = None,
    cache: ScoreCache | None = None,
) -> DiscoveryResult:
    """Hill climbing over single-edge additions, deletions and reversals.

    Each iteration moves to the neighbour with the lowest BIC (ties go to
    the earliest move in canonical order) and stops when no neighbour is
    strictly better. ``opts.strategy == "first"`` instead takes the first
    improving move in canonical order.
    """
    opts = opts or SearchOptions()
    cache = cache if cache is not None else ScoreCache()
    g = initial if initial is not None else Dag.empty(data.p)
    if g.num_nodes != data.p:
        raise ValidationError(f"initial graph has {g.num_nodes} nodes, data has {data.p} columns")
    if opts.max_parents is not None and any(len(pa) > opts.max_parents for pa in g.parent_sets()):
        raise ValidationError("initial graph violates max_parents")
    misses0 = cache.misses

    current, locals_ = global_bic(g, data, opts.fit, cache)
    moves_taken: list[Move] = []
    graphs_scored = 1
    iterations = 0
    while True:
        parent_sets = g.parent_sets()
        moves = legal_moves(g, opts.max_parents)
        changes = [_changed_parents(parent_sets, m) for m in moves]
        if opts.strategy == "best":
            _prefetch([(j, pa) for ch in changes for j, pa in ch.items()], data, opts, cache)
        best = None
        best_total = current
        for m, ch in zip(moves, changes):
            cand = list(locals_)
            for j, pa in ch.items():
                cand[j - 1] = local_bic(j, pa, data, opts.fit, cache)
            total = sum_scores(cand)
            graphs_scored += 1
            if total < best_total:
                best, best_total, best_locals = m, total, cand
                if opts.strategy == "first":
                    break
        if best is None:
            break
        g = apply_move(g, best)
        current, locals_ = best_total, best_locals
        moves_taken.append(best)
        iterations += 1
    return DiscoveryResult(
        graph=g,
        bic=current,
        local_scores=locals_,
        iterations=iterations,
        moves_taken=moves_taken,
        score_evaluations=cache.misses - misses0,
        graphs_scored=graphs_scored,
        search=f"greedy-{opts.strategy}",
    )


def exhaustive_search(
    data: OrdinalDataset, opts: SearchOptions | None = None, cache: ScoreCache | None = None
) -> DiscoveryResult:
    """Global BIC minimiser over every DAG; ties go to fewer edges, then lexicographic edges."""
    opts = opts or SearchOptions()
    if data.p > MAX_ENUMERATE_NODES:
        raise TooManyNodes(f"exhaustive search supports p <= {MAX_ENUMERATE_NODES}, got {data.p}")
    cache = cache if cache is not None else ScoreCache()
    misses0 = cache.misses
    best = None
    count = 0
    for g in enumerate_dags(data.p):
        if opts.max_parents is not None and any(len(pa) > opts.max_parents for pa in g.parent_sets()):
            continue
        total, locals_ = global_bic(g, data, opts.fit, cache)
        count += 1
        # enumeration is already in canonical order, so strict < keeps the earliest tie
        if best is None or total < best[0]:
            best = (total, g, locals_)
    total, g, locals_ = best
    return DiscoveryResult(
        graph=g,
        bic=total,
        local_scores=locals_,
        iterations=0,
        moves_taken=[],
        score_evaluations=cache.misses - misses0,
        graphs_scored=count,
        search="exhaustive",
    )


def is_local_optimum(result: DiscoveryResult, data: OrdinalDataset, opts: SearchOptions | None = None) -> bool:
    """Re-score every legal move from the result; True if none strictly improves."""
    opts = opts or SearchOptions()
    for m in legal_moves(result.graph, opts.max_parents):
        total, _ = global_bic(apply_move(result.graph, m), data, opts.fit)
        if total < result.bic:
            return False
    return True
