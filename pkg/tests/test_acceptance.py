"""End-to-end acceptance checks, one test per criterion.

Each test prints a single ``PASS``/``FAIL`` line with the measured value
so ``pytest -v`` output doubles as the acceptance report.
"""

import time

import numpy as np
import pytest

from ordcd.errors import SeparationDetected
from ordcd.experiments import binary_null, confounder_grid, fig1_identifiability, shd_curve
from ordcd.graph import Dag
from ordcd.regression import FitOptions, NodeSpec, fit, fit_node, negative_log_likelihood, nll_gradient
from ordcd.scoring import ScoreCache, global_bic, local_bic
from ordcd.search import exhaustive_search, greedy_search
from ordcd.simulate import simulate_dataset

from .conftest import make_data
from .test_regression import central_difference, random_triple

pytestmark = pytest.mark.acceptance


@pytest.fixture
def report(capsys):
    def _report(label, ok, detail, t0):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {label}: {detail} ({time.perf_counter() - t0:.1f}s)")
        return ok

    return _report


@pytest.fixture(scope="module")
def shd_means():
    t0 = time.perf_counter()
    _, summary = shd_curve(sigmas=(0.25, 0.75, 1.5), p=10, L=3, n=500, repeats=5, seed=0)
    return summary["mean_shd"], time.perf_counter() - t0


def test_ac1_fig1_identifiability(report):
    t0 = time.perf_counter()
    _, s = fig1_identifiability(n=100_000, seed=0)
    ok = (
        s["forward_tv"] <= 0.005
        and s["reverse_tv"] >= 0.005
        and s["bic_reverse"] > s["bic_forward"]
        and time.perf_counter() - t0 < 60
    )
    detail = (
        f"forward TV={s['forward_tv']:.4f} (<=0.005), reverse TV={s['reverse_tv']:.4f} (>=0.005), "
        f"BIC fwd={s['bic_forward']:.1f} < rev={s['bic_reverse']:.1f}"
    )
    assert report("AC1 three-level identifiability", ok, detail, t0)


def test_ac2_strong_signal_recovery(report, shd_means):
    t0 = time.perf_counter()
    means, seconds = shd_means
    ok = means["1.5"] <= 1.0
    detail = f"mean SHD at sigma=1.5 = {means['1.5']:.2f} (<=1); curve took {seconds:.1f}s"
    assert report("AC2 strong-signal recovery", ok, detail, t0)


def test_ac3_signal_monotonicity(report, shd_means):
    t0 = time.perf_counter()
    means, seconds = shd_means
    m = [means["0.25"], means["0.75"], means["1.5"]]
    ok = m[0] >= m[1] >= m[2] and m[2] < m[0]
    detail = f"mean SHD 0.25/0.75/1.5 = {m[0]:.2f}/{m[1]:.2f}/{m[2]:.2f} non-increasing; curve took {seconds:.1f}s"
    assert report("AC3 SHD monotone in sigma", ok, detail, t0)


def test_ac4_binary_null(report):
    t0 = time.perf_counter()
    _, s = binary_null(repeats=100, n=1000, seed=0)
    ok = abs(s["accuracy"] - 0.5) <= 0.15
    detail = f"accuracy={s['accuracy']:.2f} (0.5 +/- 0.15), ties={s['ties']}/100"
    assert report("AC4 binary non-identifiability", ok, detail, t0)


def test_ac5_bivariate_accuracy(report):
    t0 = time.perf_counter()
    _, s = confounder_grid(sigmas=[1.0], ns=[1000], repeats=100, levels=5, hidden_confounder=False, seed=0)
    acc = s["accuracy"]["sigma=1.0,n=1000"]
    assert report("AC5 bivariate L=5 accuracy", acc >= 0.85, f"accuracy={acc:.2f} (>=0.85)", t0)


def test_ac6_confounder_robustness(report):
    t0 = time.perf_counter()
    _, s = confounder_grid(sigmas=[1.5], ns=[1000], repeats=100, levels=5, hidden_confounder=True, seed=0)
    acc = s["accuracy"]["sigma=1.5,n=1000"]
    assert report("AC6 hidden-confounder accuracy", acc >= 0.7, f"accuracy={acc:.2f} (>=0.7)", t0)


def test_ac7_optimizer_suite(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2027)
    worst_grad = 0.0
    monotone = True
    for _ in range(50):
        spec, theta, data = random_triple(rng)
        g = nll_gradient(spec, theta, data)
        fd = central_difference(lambda t: negative_log_likelihood(spec, t, data), theta)
        worst_grad = max(worst_grad, float(np.max(np.abs(g - fd) / np.maximum(1.0, np.abs(fd)))))
        try:
            model = fit(spec, data)
        except SeparationDetected as exc:  # separated random data still carries a model
            model = exc.model
        monotone &= bool(np.all(np.diff(model.nll_trace) <= 0))
    worst_marg = 0.0
    for link in ("probit", "logit"):
        for L in (2, 3, 4, 6):
            y = rng.integers(1, L + 1, 400)
            y[:L] = np.arange(1, L + 1)
            data = make_data([y], (L,))
            m = fit_node(data, 1, (), FitOptions(link=link))
            emp = np.bincount(y, minlength=L + 1)[1:] / y.size
            worst_marg = max(worst_marg, float(np.max(np.abs(m.category_probs() - emp))))
            monotone &= bool(np.all(np.diff(m.nll_trace) <= 0))
    ok = worst_grad <= 1e-5 and worst_marg <= 1e-8 and monotone and time.perf_counter() - t0 < 60
    detail = f"max grad rel err={worst_grad:.1e} (<=1e-5), max marginal err={worst_marg:.1e} (<=1e-8), NLL monotone={monotone}"
    assert report("AC7 optimizer correctness", ok, detail, t0)


def test_ac8_score_search_algebra(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(8)
    exact_sum = True
    bit_identical = True
    never_better = True
    equal = 0
    for r in range(20):
        _, data = simulate_dataset(3, int(rng.integers(0, 4)), 3, 1.0, 500, seed=1000 + r)
        cache = ScoreCache()
        g = Dag(3, frozenset({(1, 2), (1, 3)}))
        total, locs = global_bic(g, data, cache=cache)
        acc = 0.0
        for s in locs:
            acc += s.bic
        exact_sum &= total == acc
        cold = [local_bic(j, pa, data) for j, pa in enumerate(g.parent_sets(), 1)]
        bit_identical &= all(a.bic == b.bic for a, b in zip(locs, cold))
        ex = exhaustive_search(data, cache=cache)
        gr = greedy_search(data, cache=cache)
        never_better &= gr.bic >= ex.bic
        equal += gr.bic == ex.bic
    ok = exact_sum and bit_identical and never_better and equal >= 16
    detail = f"sum exact={exact_sum}, warm==cold={bit_identical}, greedy>=exhaustive={never_better}, equal {equal}/20 (>=16)"
    assert report("AC8 score/search algebra", ok, detail, t0)


def test_p20_smoke(report):
    t0 = time.perf_counter()
    _, s = shd_curve(sigmas=(0.75,), p=20, L=3, n=500, repeats=3, seed=0)
    est, empty = s["mean_shd"]["0.75"], s["mean_empty_shd"]
    detail = f"mean SHD={est:.2f} vs empty-graph SHD={empty:.2f}"
    assert report("Smoke p=20 sigma=0.75", est < empty, detail, t0)
