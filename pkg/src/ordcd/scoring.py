"""Node-decomposable BIC with a memo table of local scores."""

from __future__ import annotations

import math
import threading
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

from .dataset import OrdinalDataset
from .errors import SeparationDetected, ValidationError
from .graph import Dag
from .regression import FitOptions, NodeSpec, fit


@dataclass(frozen=True)
class LocalScore:
    node: int
    parent_set: tuple
    bic: float
    loglik: float
    k: int
    degenerate: bool = False
    converged: bool = True

    def to_dict(self) -> dict:
        d = asdict(self)
        d["parent_set"] = list(self.parent_set)
        return d


class ScoreCache:
    """Map ``(node, sorted parents) -> LocalScore`` for one (dataset, options) pair.

    Lookups and inserts are guarded by a lock; two threads racing on the
    same key compute identical values, so last write wins harmlessly.
    """

    def __init__(self):
        self._table: dict[tuple[int, tuple], LocalScore] = {}
        self._lock = threading.Lock()
        self._owner = None
        self.hits = 0
        self.misses = 0

    def bind(self, data: OrdinalDataset, opts: FitOptions):
        with self._lock:
            if self._owner is None:
                self._owner = (data, opts)
            elif self._owner[0] is not data or self._owner[1] != opts:
                raise ValidationError("score cache reused with a different dataset or options")

    def get(self, key):
        with self._lock:
            hit = self._table.get(key)
            if hit is not None:
                self.hits += 1
            return hit

    def put(self, key, value: LocalScore):
        with self._lock:
            self._table[key] = value

    def __contains__(self, key):
        return key in self._table

    def __len__(self):
        return len(self._table)


def compute_local_score(node: int, parent_set: Iterable[int], data: OrdinalDataset, opts: FitOptions) -> LocalScore:
    """Fit and score without touching any cache."""
    parents = tuple(sorted(parent_set))
    spec = NodeSpec.for_data(data, node, parents, opts.link)
    degenerate = False
    try:
        model = fit(spec, data, opts)
    except SeparationDetected as exc:
        # score at the parameter bound; finite and marked
        model = exc.model
        degenerate = True
    k = spec.num_params
    bic = -2.0 * model.loglik + k * math.log(data.n)
    return LocalScore(node, parents, bic, model.loglik, k, degenerate, model.converged)


def local_bic(
    node: int,
    parent_set: Iterable[int],
    data: OrdinalDataset,
    opts: FitOptions | None = None,
    cache: ScoreCache | None = None,
) -> LocalScore:
    """``-2 loglik_j + K_j log n`` for one node and parent set, memoised in ``cache``."""
    opts = opts or FitOptions()
    parents = tuple(sorted(parent_set))
    if cache is None:
        return compute_local_score(node, parents, data, opts)
    cache.bind(data, opts)
    key = (node, parents)
    hit = cache.get(key)
    if hit is not None:
        return hit
    score = compute_local_score(node, parents, data, opts)
    with cache._lock:
        cache.misses += 1
    cache.put(key, score)
    return score


def global_bic(
    g: Dag, data: OrdinalDataset, opts: FitOptions | None = None, cache: ScoreCache | None = None
) -> tuple[float, list[LocalScore]]:
    """Sum of local scores in node order, plus the per-node list."""
    if g.num_nodes != data.p:
        raise ValidationError(f"graph has {g.num_nodes} nodes, data has {data.p} columns")
    locals_ = [local_bic(j, pa, data, opts, cache) for j, pa in enumerate(g.parent_sets(), 1)]
    return sum_scores(locals_), locals_


def sum_scores(scores: Sequence[LocalScore]) -> float:
    total = 0.0
    for s in scores:
        total += s.bic
    return total
