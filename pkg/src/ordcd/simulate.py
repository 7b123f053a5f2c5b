"""Synthetic ordinal Bayesian networks: random graphs, parameters, ancestral sampling.

Randomness comes from numpy ``Generator`` objects (PCG64). Pipelines that
start from an integer seed split it with ``SeedSequence.spawn`` into
independent streams, always in the order graph, parameters, sample, so a
seed reproduces the same dataset on any platform.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import optimize

from . import kernels
from .dataset import OrdinalDataset
from .errors import TooManyEdges, ValidationError
from .graph import Dag
from .regression import FittedNodeModel, LinkFunction, NodeSpec, as_link

PRESAMPLE_SIZE = 10_000


@dataclass
class GroundTruthModel:
    """A fully specified ordinal BN.

    ``cutpoints[j]`` are the raw thresholds ``c_1 < ... < c_{L_j-1}`` of node
    ``j`` (``Pr(X_j <= l) = F(c_l - eta)``); :meth:`node_model` re-expresses
    them in the ``gamma_1 = 0`` convention used by fitted models.
    """

    graph: Dag
    levels: tuple
    alphas: dict
    betas: dict  # (child, parent) -> free level effects, length L_parent - 1
    cutpoints: dict
    link: LinkFunction = LinkFunction.PROBIT
    names: tuple = field(default=())

    def __post_init__(self):
        if not self.names:
            self.names = tuple(f"X{j}" for j in range(1, self.graph.num_nodes + 1))
        for j, c in self.cutpoints.items():
            c = np.asarray(c, dtype=float)
            if c.size != self.levels[j - 1] - 1 or np.any(np.diff(c) <= 0):
                raise ValidationError(f"node {j}: cutpoints must be {self.levels[j - 1] - 1} increasing values")

    def node_model(self, j: int) -> FittedNodeModel:
        pa = tuple(sorted(self.graph.parents(j)))
        spec = NodeSpec(j, pa, self.levels[j - 1], tuple(self.levels[k - 1] for k in pa), self.link)
        c = np.asarray(self.cutpoints[j], dtype=float)
        return FittedNodeModel(
            spec=spec,
            alpha=float(self.alphas[j] - c[0]),
            betas=tuple(np.asarray(self.betas[(j, k)], dtype=float) for k in pa),
            gammas=c[1:] - c[0],
            loglik=float("nan"),
            num_params=spec.num_params,
            converged=True,
            iterations=0,
            theta=np.empty(0),
        )


def joint_table(graph: Dag, levels: Sequence[int], models: dict) -> np.ndarray:
    """Exhaustive product of conditionals; ``models[j]`` gives ``category_probs``."""
    p = graph.num_nodes
    pa = graph.parent_sets()
    table = np.empty(tuple(levels))
    for cfg in itertools.product(*(range(1, L + 1) for L in levels)):
        prob = 1.0
        for j in range(1, p + 1):
            probs = models[j].category_probs([cfg[k - 1] for k in pa[j - 1]])
            prob *= probs[cfg[j - 1] - 1]
        table[tuple(c - 1 for c in cfg)] = prob
    return table


def model_joint(model: GroundTruthModel) -> np.ndarray:
    return joint_table(model.graph, model.levels, {j: model.node_model(j) for j in range(1, model.graph.num_nodes + 1)})


def random_dag(p: int, num_edges: int, rng: np.random.Generator) -> Dag:
    """Uniform random topological order, then a uniform subset of compatible pairs."""
    max_edges = p * (p - 1) // 2
    if not 0 <= num_edges <= max_edges:
        raise TooManyEdges(f"{num_edges} edges requested; a DAG on {p} nodes holds at most {max_edges}")
    order = rng.permutation(np.arange(1, p + 1))
    pairs = [(int(order[a]), int(order[b])) for a in range(p) for b in range(a + 1, p)]
    chosen = rng.choice(len(pairs), size=num_edges, replace=False) if num_edges else []
    return Dag(p, frozenset(pairs[i] for i in chosen))


def _mixture_quantiles(eta: np.ndarray, L: int, link: LinkFunction) -> np.ndarray:
    """c_l solving mean_i F(c_l - eta_i) = l / L, i.e. quantiles of eta + noise."""
    out = np.empty(L - 1)
    lo_b, hi_b = float(eta.min()) - 50.0, float(eta.max()) + 50.0
    for l in range(1, L):
        target = l / L
        out[l - 1] = optimize.brentq(lambda c: float(np.mean(link.cdf(c - eta))) - target, lo_b, hi_b, xtol=1e-12)
    return out


def balanced_cutpoints(
    j: int,
    g: Dag,
    alphas: dict,
    betas: dict,
    levels: Sequence[int],
    presample: dict,
    link=LinkFunction.PROBIT,
) -> np.ndarray:
    """Cutpoints giving node ``j`` a marginal of about ``1/L_j`` per category.

    ``presample`` maps already-generated ancestors to Monte Carlo draws;
    the cutpoints are the ``l/L_j`` quantiles of the latent variable
    ``eta + noise`` with ``eta`` taken over those draws (the noise is
    integrated out exactly). Without parents this is
    ``alpha + F^{-1}(l/L_j)``.
    """
    link = as_link(link)
    L = levels[j - 1]
    pa = sorted(g.parents(j))
    if not pa:
        return alphas[j] + link.ppf(np.arange(1, L) / L)
    eta = np.full(len(presample[pa[0]]), alphas[j], dtype=float)
    for k in pa:
        beta = np.append(betas[(j, k)], 0.0)
        eta += beta[presample[k] - 1]
    return _mixture_quantiles(eta, L, link)


def draw_parameters(
    g: Dag,
    sigma: float,
    levels: Sequence[int],
    rng: np.random.Generator,
    link=LinkFunction.PROBIT,
    shared_beta: np.ndarray | None = None,
    presample_size: int = PRESAMPLE_SIZE,
) -> GroundTruthModel:
    """alpha_j and free beta_jkl iid N(0, sigma^2), balanced cutpoints.

    Nodes are visited in topological order; per node the draws are alpha,
    then one beta vector per parent in increasing parent id. With
    ``shared_beta`` every edge uses that vector instead (confounder design).
    """
    if sigma <= 0:
        raise ValidationError("sigma must be positive")
    link = as_link(link)
    levels = tuple(int(L) for L in levels)
    if len(levels) != g.num_nodes:
        raise ValidationError("one level count per node required")
    alphas, betas, cuts = {}, {}, {}
    presample: dict[int, np.ndarray] = {}
    for j in g.topological_order():
        alphas[j] = float(rng.normal(0.0, sigma))
        for k in sorted(g.parents(j)):
            if shared_beta is not None:
                betas[(j, k)] = np.array(shared_beta[: levels[k - 1] - 1], dtype=float)
            else:
                betas[(j, k)] = rng.normal(0.0, sigma, size=levels[k - 1] - 1)
        cuts[j] = balanced_cutpoints(j, g, alphas, betas, levels, presample, link)
        # extend the ancestor pre-sample with this node
        pa = sorted(g.parents(j))
        eta = np.full(presample_size, alphas[j])
        for k in pa:
            eta += np.append(betas[(j, k)], 0.0)[presample[k] - 1]
        presample[j] = kernels.sample_codes(eta, cuts[j], rng.random(presample_size), link.code)
    return GroundTruthModel(g, levels, alphas, betas, cuts, link)


def sample(model: GroundTruthModel, n: int, rng: np.random.Generator) -> OrdinalDataset:
    """n iid rows by ancestral sampling in topological order (one uniform per cell)."""
    if n < 1:
        raise ValidationError("n must be >= 1")
    p = model.graph.num_nodes
    out = np.empty((n, p), dtype=np.int64)
    code = model.link.code if isinstance(model.link, LinkFunction) else as_link(model.link).code
    for j in model.graph.topological_order():
        eta = np.full(n, model.alphas[j], dtype=float)
        for k in sorted(model.graph.parents(j)):
            eta += np.append(model.betas[(j, k)], 0.0)[out[:, k - 1] - 1]
        out[:, j - 1] = kernels.sample_codes(eta, np.asarray(model.cutpoints[j], dtype=float), rng.random(n), code)
    return OrdinalDataset(out, model.levels, model.names)


def simulate_dataset(p: int, num_edges: int, levels, sigma: float, n: int, seed: int, link="probit"):
    """Seeded pipeline: random graph, parameters, data. Returns ``(model, data)``."""
    ss = np.random.SeedSequence(seed)
    g_ss, par_ss, samp_ss = ss.spawn(3)
    if isinstance(levels, int):
        levels = (levels,) * p
    g = random_dag(p, num_edges, np.random.default_rng(g_ss))
    model = draw_parameters(g, sigma, levels, np.random.default_rng(par_ss), link)
    data = sample(model, n, np.random.default_rng(samp_ss))
    return model, data


def fig1_model() -> GroundTruthModel:
    """X -> Y with pi = (.25, .25, .5), gamma = (0, 1), beta = (1, -1, 1), probit.

    The effect of X re-expressed with the last level as reference gives
    intercept 1 and level effects (0, -2).
    """
    g = Dag(2, frozenset({(1, 2)}))
    link = LinkFunction.PROBIT
    return GroundTruthModel(
        graph=g,
        levels=(3, 3),
        alphas={1: 0.0, 2: 1.0},
        betas={(2, 1): np.array([0.0, -2.0])},
        cutpoints={1: link.ppf(np.array([0.25, 0.5])), 2: np.array([0.0, 1.0])},
        link=link,
        names=("X", "Y"),
    )


def confounder_model(sigma: float, rng: np.random.Generator, levels: int = 5, link="probit") -> GroundTruthModel:
    """X3 -> X1, X3 -> X2, X1 -> X2 with one beta vector shared by all three edges."""
    g = Dag(3, frozenset({(3, 1), (3, 2), (1, 2)}))
    shared = rng.normal(0.0, sigma, size=levels - 1)
    return draw_parameters(g, sigma, (levels,) * 3, rng, link, shared_beta=shared)


def confounder_scenario(sigma: float, n: int, rng: np.random.Generator, levels: int = 5, link="probit"):
    """Observed (X1, X2) with X3 hidden; the true direction is X1 -> X2."""
    model = confounder_model(sigma, rng, levels, link)
    data = sample(model, n, rng).subset([1, 2])
    return data, (1, 2)


def bivariate_model(sigma: float, rng: np.random.Generator, levels=(5, 5), link="probit") -> GroundTruthModel:
    """Random X1 -> X2 ordinal pair drawn with the same parameter law as the graphs."""
    g = Dag(2, frozenset({(1, 2)}))
    return draw_parameters(g, sigma, levels, rng, link)
