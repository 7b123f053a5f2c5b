"""Desk-scale simulation experiments: simulate, fit, evaluate, aggregate.

Each experiment returns ``(rows, summary)``: ``rows`` is one dict per
(cell, repeat) for a TSV, ``summary`` is JSON-ready. Repeats are keyed by
index, so running them in a process pool gives the same output as
running them in sequence.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Sequence

import numpy as np

from .graph import Dag
from .metrics import accuracy, empirical_joint, fitted_joint, forced_decision, shd, total_variation
from .regression import FitOptions
from .scoring import global_bic
from .search import SearchOptions, greedy_search
from .simulate import bivariate_model, confounder_scenario, fig1_model, model_joint, sample, simulate_dataset

EXPERIMENTS = ("fig1-identifiability", "shd-curve", "confounder-grid", "binary-null")


def _run_pool(fn: Callable, tasks: list, workers: int) -> list:
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, tasks))
    return [fn(t) for t in tasks]


def _rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(key)))


# -- identifiability ---------------------------------------------------------


def fig1_identifiability(n: int = 100_000, seed: int = 0, opts: FitOptions | None = None):
    """Fit both directions to a large sample of the three-level X -> Y example."""
    opts = opts or FitOptions()
    t0 = time.perf_counter()
    model = fig1_model()
    truth = model_joint(model)
    data = sample(model, n, _rng(seed, 0))
    fwd_g = Dag(2, frozenset({(1, 2)}))
    rev_g = Dag(2, frozenset({(2, 1)}))
    fwd_joint = fitted_joint(fwd_g, data, opts)
    rev_joint = fitted_joint(rev_g, data, opts)
    bic_f, _ = global_bic(fwd_g, data, opts)
    bic_r, _ = global_bic(rev_g, data, opts)
    summary = {
        "n": n,
        "seed": seed,
        "empirical_tv": total_variation(empirical_joint(data), truth),
        "forward_tv": total_variation(fwd_joint, truth),
        "reverse_tv": total_variation(rev_joint, truth),
        "bic_forward": bic_f,
        "bic_reverse": bic_r,
        "true_joint": truth.tolist(),
        "forward_joint": fwd_joint.tolist(),
        "reverse_joint": rev_joint.tolist(),
        "seconds": time.perf_counter() - t0,
    }
    rows = [
        {"direction": "forward", "tv": summary["forward_tv"], "bic": bic_f},
        {"direction": "reverse", "tv": summary["reverse_tv"], "bic": bic_r},
    ]
    return rows, summary


# -- structure recovery --------------------------------------------------------


def _shd_task(task):
    p, edges, L, sigma, n, seed, r, max_parents = task
    model, data = simulate_dataset(p, edges, L, sigma, n, seed=seed + r)
    res = greedy_search(data, opts=SearchOptions(max_parents=max_parents))
    return {
        "sigma": sigma,
        "repeat": r,
        "p": p,
        "L": L,
        "n": n,
        "true_edges": len(model.graph.edges),
        "est_edges": len(res.graph.edges),
        "shd": shd(res.graph, model.graph),
        "empty_shd": len(model.graph.edges),
        "bic": res.bic,
        "iterations": res.iterations,
        "score_evaluations": res.score_evaluations,
    }


def shd_curve(
    sigmas: Sequence[float] = (0.25, 0.5, 0.75, 1.0, 1.25, 1.5),
    p: int = 10,
    L: int = 3,
    n: int = 500,
    repeats: int = 5,
    edges: int | None = None,
    seed: int = 0,
    max_parents: int | None = None,
    workers: int = 1,
):
    """Mean SHD of greedy OCD per signal strength.

    Repeat ``r`` uses dataset seed ``seed + r`` at every sigma, so the true
    graph and the standardised parameter draws are shared across sigma.
    """
    edges = p if edges is None else edges
    tasks = [(p, edges, L, float(s), n, seed, r, max_parents) for s in sigmas for r in range(repeats)]
    rows = _run_pool(_shd_task, tasks, workers)
    means = {}
    for s in sigmas:
        vals = [row["shd"] for row in rows if row["sigma"] == float(s)]
        means[str(float(s))] = float(np.mean(vals))
    summary = {
        "p": p,
        "L": L,
        "n": n,
        "edges": edges,
        "repeats": repeats,
        "seed": seed,
        "mean_shd": means,
        "mean_empty_shd": float(np.mean([row["empty_shd"] for row in rows])),
    }
    return rows, summary


# -- bivariate forced decisions ----------------------------------------------


def _pair_task(task):
    kind, sigma, n, levels, seed, cell, r = task
    rng = _rng(seed, cell, r)
    if kind == "confounder":
        data, _ = confounder_scenario(sigma, n, rng, levels=levels[0])
        truth = "forward"
    else:
        model = bivariate_model(sigma, rng, levels)
        data = sample(model, n, rng)
        truth = "forward"
        if kind == "random-orientation" and rng.random() < 0.5:
            data = data.subset([2, 1])
            truth = "backward"
    dec = forced_decision(data)
    return {
        "sigma": sigma,
        "n": n,
        "repeat": r,
        "truth": truth,
        "decision": dec.direction,
        "confidence": dec.confidence,
        "tie": dec.tie,
        "correct": dec.direction == truth,
        "_decision": dec,
    }


def _pair_grid(kind, sigmas, ns, repeats, levels, seed, workers):
    tasks = [
        (kind, float(s), int(n), tuple(levels), seed, cell, r)
        for cell, (s, n) in enumerate((s, n) for s in sigmas for n in ns)
        for r in range(repeats)
    ]
    rows = _run_pool(_pair_task, tasks, workers)
    cells = {}
    for s in sigmas:
        for n in ns:
            sel = [row for row in rows if row["sigma"] == float(s) and row["n"] == int(n)]
            cells[f"sigma={float(s)},n={int(n)}"] = accuracy(
                [row["_decision"] for row in sel], [row["truth"] for row in sel]
            )
    for row in rows:
        row.pop("_decision")
    return rows, cells


def confounder_grid(
    sigmas: Sequence[float] = (0.25, 0.5, 0.75, 1.0, 1.25, 1.5),
    ns: Sequence[int] = tuple(range(100, 1001, 100)),
    repeats: int = 100,
    levels: int = 5,
    hidden_confounder: bool = True,
    seed: int = 0,
    workers: int = 1,
):
    """Forced-decision accuracy per (sigma, n) with the truth X1 -> X2.

    With ``hidden_confounder`` the pair shares a hidden common cause whose
    effects equal the causal effect; otherwise it is a plain cause-effect pair.
    """
    kind = "confounder" if hidden_confounder else "pair"
    rows, cells = _pair_grid(kind, sigmas, ns, repeats, (levels, levels), seed, workers)
    summary = {
        "hidden_confounder": hidden_confounder,
        "levels": levels,
        "repeats": repeats,
        "seed": seed,
        "accuracy": cells,
    }
    return rows, summary


def binary_null(repeats: int = 100, n: int = 1000, sigma: float = 1.0, seed: int = 0, workers: int = 1):
    """Two binary variables: both directions fit equally well.

    The cause is placed in a random column per repeat, so a decision rule
    that cannot see the direction scores about 0.5.
    """
    rows, cells = _pair_grid("random-orientation", [sigma], [n], repeats, (2, 2), seed, workers)
    summary = {
        "levels": [2, 2],
        "n": n,
        "sigma": sigma,
        "repeats": repeats,
        "seed": seed,
        "accuracy": next(iter(cells.values())),
        "ties": int(sum(row["tie"] for row in rows)),
    }
    return rows, summary


def run_experiment(name: str, **kwargs):
    fns = {
        "fig1-identifiability": fig1_identifiability,
        "shd-curve": shd_curve,
        "confounder-grid": confounder_grid,
        "binary-null": binary_null,
    }
    if name not in fns:
        raise KeyError(name)
    return fns[name](**kwargs)
