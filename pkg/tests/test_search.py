import numpy as np
import pytest

from ordcd.errors import TooManyNodes, ValidationError
from ordcd.graph import Dag, enumerate_dags
from ordcd.scoring import ScoreCache, global_bic
from ordcd.search import SearchOptions, exhaustive_search, greedy_search, is_local_optimum
from ordcd.simulate import draw_parameters, sample, simulate_dataset

from .conftest import make_data


def _brute_force_minimum(data):
    cache = ScoreCache()
    return min(global_bic(g, data, cache=cache)[0] for g in enumerate_dags(data.p))


def test_exhaustive_recovers_fig1_direction(fig1_10k):
    res = exhaustive_search(fig1_10k)
    assert res.graph.edges == frozenset({(1, 2)})
    assert res.graphs_scored == 3


def test_exhaustive_p3_scores_25_graphs_and_matches_brute_force():
    _, data = simulate_dataset(3, 2, 3, 1.0, 300, seed=11)
    res = exhaustive_search(data)
    assert res.graphs_scored == 25
    assert res.bic == _brute_force_minimum(data)
    # at most 3 nodes x 4 parent sets distinct local fits
    assert res.score_evaluations == 12


def test_exhaustive_guard():
    _, data = simulate_dataset(5, 0, 2, 1.0, 50, seed=0)
    with pytest.raises(TooManyNodes):
        exhaustive_search(data)


def test_independent_pair_gives_empty_graph():
    empty = 0
    for r in range(20):
        rng = np.random.default_rng(100 + r)
        data = make_data([rng.integers(1, 4, 500), rng.integers(1, 4, 500)], (3, 3))
        empty += not exhaustive_search(data).graph.edges
    assert empty / 20 >= 0.9


def test_independent_columns_greedy_empty():
    empty = 0
    for r in range(10):
        _, data = simulate_dataset(5, 0, 3, 1.5, 500, seed=r)
        empty += not greedy_search(data).graph.edges
    assert empty / 10 >= 0.9


def test_chain_recovered():
    chain = Dag(3, frozenset({(1, 2), (2, 3)}))
    hits = 0
    for r in range(10):
        rng = np.random.default_rng(500 + r)
        model = draw_parameters(chain, 1.5, (5, 5, 5), rng)
        data = sample(model, 500, rng)
        hits += greedy_search(data).graph == chain
    assert hits / 10 >= 0.9


def test_greedy_descends_and_is_local_optimum():
    _, data = simulate_dataset(5, 5, 3, 1.0, 400, seed=4)
    res = greedy_search(data)
    assert is_local_optimum(res, data)
    # replay the moves: every step strictly lowers BIC
    from ordcd.graph import apply_move

    g = Dag.empty(5)
    prev = global_bic(g, data)[0]
    for m in res.moves_taken:
        g = apply_move(g, m)
        cur = global_bic(g, data)[0]
        assert cur < prev
        prev = cur
    assert g == res.graph
    assert prev == pytest.approx(res.bic, abs=1e-9)
    assert res.iterations == len(res.moves_taken)


def test_greedy_never_beats_exhaustive():
    for seed in range(5):
        _, data = simulate_dataset(3, 2, 3, 1.0, 300, seed=seed)
        cache = ScoreCache()
        g = greedy_search(data, cache=cache)
        e = exhaustive_search(data, cache=cache)
        assert g.bic >= e.bic


def test_deterministic():
    _, data = simulate_dataset(6, 6, 3, 1.0, 300, seed=9)
    a = greedy_search(data)
    b = greedy_search(data)
    assert a.graph == b.graph and a.bic == b.bic and a.moves_taken == b.moves_taken


def test_threads_do_not_change_result():
    _, data = simulate_dataset(6, 6, 3, 1.0, 300, seed=9)
    a = greedy_search(data)
    b = greedy_search(data, opts=SearchOptions(threads=4))
    assert a.graph == b.graph and a.bic == b.bic and a.moves_taken == b.moves_taken


def test_max_parents_respected():
    _, data = simulate_dataset(6, 10, 3, 1.5, 500, seed=2)
    res = greedy_search(data, opts=SearchOptions(max_parents=1))
    assert all(len(pa) <= 1 for pa in res.graph.parent_sets())
    assert is_local_optimum(res, data, SearchOptions(max_parents=1))
    unset = greedy_search(data, opts=SearchOptions(max_parents=None))
    assert unset.graph == greedy_search(data).graph


def test_max_parents_zero_keeps_empty():
    _, data = simulate_dataset(4, 4, 3, 1.5, 300, seed=2)
    res = greedy_search(data, opts=SearchOptions(max_parents=0))
    assert not res.graph.edges and res.iterations == 0


def test_first_improvement_strategy_reaches_local_optimum():
    _, data = simulate_dataset(5, 5, 3, 1.0, 400, seed=6)
    res = greedy_search(data, opts=SearchOptions(strategy="first"))
    assert res.search == "greedy-first"
    assert is_local_optimum(res, data)


def test_initial_graph_validation():
    _, data = simulate_dataset(3, 0, 3, 1.0, 100, seed=0)
    with pytest.raises(ValidationError):
        greedy_search(data, initial=Dag.empty(4))
    with pytest.raises(ValidationError):
        greedy_search(data, initial=Dag(3, frozenset({(1, 3), (2, 3)})), opts=SearchOptions(max_parents=1))
    with pytest.raises(ValidationError):
        SearchOptions(strategy="random")


def test_result_serialises():
    _, data = simulate_dataset(3, 2, 3, 1.5, 300, seed=1)
    d = greedy_search(data).to_dict(data.names)
    assert set(d) >= {"edges", "bic", "local_scores", "iterations", "moves_taken"}
    assert len(d["local_scores"]) == 3
