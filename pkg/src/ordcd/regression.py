"""Cumulative-link ordinal regression for one node given its parents.

Model, for target ``j`` with parents ``pa(j)``::

    Pr(X_j <= l | parents) = F(gamma_l - sum_k beta_{k, x_k} - alpha)

with ``gamma_1 = 0``, the last level of each parent as the reference
(``beta_{k, L_k} = 0``) and ``F`` the probit or logit link. Fitting runs a
damped Newton method on an unconstrained parameter vector

    theta = (alpha, beta_1..., beta_m..., zeta_2, ..., zeta_{L-1})

where ``gamma_2 = exp(zeta_2)`` and ``gamma_l = gamma_{l-1} + exp(zeta_l)``,
so every iterate has strictly increasing cutpoints.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np
from scipy import special

from . import kernels
from .dataset import OrdinalDataset
from .errors import (
    DegenerateTarget,
    DimensionMismatch,
    InvalidParentCode,
    SeparationDetected,
    ValidationError,
)


# smallest observed-information eigenvalue, per observation, below which a
# converged fit is treated as separated
SEPARATION_CURVATURE = 1e-8


class LinkFunction(str, Enum):
    PROBIT = "probit"
    LOGIT = "logit"

    @property
    def code(self) -> int:
        return kernels.PROBIT if self is LinkFunction.PROBIT else kernels.LOGIT

    def cdf(self, x):
        return kernels.cdf_np(x, self.code)

    def ppf(self, q):
        q = np.asarray(q, dtype=float)
        return special.ndtri(q) if self is LinkFunction.PROBIT else special.logit(q)


def as_link(link) -> LinkFunction:
    return link if isinstance(link, LinkFunction) else LinkFunction(str(link).lower())


@dataclass(frozen=True)
class FitOptions:
    link: LinkFunction = LinkFunction.PROBIT
    max_iter: int = 200
    tol_grad: float = 1e-8
    tol_nll: float = 1e-10
    param_bound: float = 30.0

    def __post_init__(self):
        object.__setattr__(self, "link", as_link(self.link))
        if self.max_iter < 1 or self.tol_grad <= 0 or self.tol_nll <= 0 or self.param_bound <= 0:
            raise ValidationError("fit options must be positive")


@dataclass(frozen=True)
class NodeSpec:
    """Which column is regressed on which parents (1-based ids)."""

    node: int
    parent_ids: tuple
    target_levels: int
    parent_levels: tuple
    link: LinkFunction = LinkFunction.PROBIT

    def __post_init__(self):
        object.__setattr__(self, "parent_ids", tuple(int(k) for k in self.parent_ids))
        object.__setattr__(self, "parent_levels", tuple(int(k) for k in self.parent_levels))
        object.__setattr__(self, "link", as_link(self.link))
        if self.node in self.parent_ids:
            raise ValidationError(f"node {self.node} cannot be its own parent")
        if len(set(self.parent_ids)) != len(self.parent_ids):
            raise ValidationError("duplicate parent ids")
        if len(self.parent_levels) != len(self.parent_ids):
            raise ValidationError("one level count per parent required")
        if self.target_levels < 2 or any(L < 2 for L in self.parent_levels):
            raise ValidationError("level counts must be >= 2")

    @classmethod
    def for_data(cls, data: OrdinalDataset, node: int, parent_ids: Sequence[int] = (), link="probit"):
        parent_ids = tuple(parent_ids)
        return cls(node, parent_ids, data.levels[node - 1], tuple(data.levels[k - 1] for k in parent_ids), link)

    @property
    def beta_offsets(self) -> list[int]:
        """theta index of each parent's first coefficient."""
        out, pos = [], 1
        for L in self.parent_levels:
            out.append(pos)
            pos += L - 1
        return out

    @property
    def num_beta(self) -> int:
        return sum(L - 1 for L in self.parent_levels)

    @property
    def dim(self) -> int:
        return 1 + self.num_beta + (self.target_levels - 2)

    @property
    def num_params(self) -> int:
        """K_j: free cutpoints plus intercept plus free level effects."""
        return (self.target_levels - 1) + self.num_beta


@dataclass(frozen=True, eq=False)
class FittedNodeModel:
    """MLE of one node's ordinal regression.

    ``betas[k]`` holds the ``L_k - 1`` free level effects of the k-th parent
    (the last level is the zero reference); ``gammas`` holds
    ``gamma_2..gamma_{L-1}`` (``gamma_1 = 0``).
    """

    spec: NodeSpec
    alpha: float
    betas: tuple
    gammas: np.ndarray
    loglik: float
    num_params: int
    converged: bool
    iterations: int
    theta: np.ndarray = field(repr=False)
    nll_trace: tuple = field(default=(), repr=False)

    @property
    def cutpoints(self) -> np.ndarray:
        """gamma_1..gamma_{L-1}, starting with the fixed 0."""
        return np.concatenate(([0.0], self.gammas))

    def linear_predictor(self, parent_config: Sequence[int]) -> float:
        spec = self.spec
        if len(parent_config) != len(spec.parent_ids):
            raise InvalidParentCode(f"expected {len(spec.parent_ids)} parent codes, got {len(parent_config)}")
        eta = self.alpha
        for k, (code, L) in enumerate(zip(parent_config, spec.parent_levels)):
            code = int(code)
            if not 1 <= code <= L:
                raise InvalidParentCode(f"parent {spec.parent_ids[k]} code {code} outside 1..{L}")
            if code < L:
                eta += self.betas[k][code - 1]
        return eta

    def category_probs(self, parent_config: Sequence[int] = ()) -> np.ndarray:
        return category_probs(self, parent_config)

    def probs_table(self) -> np.ndarray:
        """Conditional table, shape ``parent_levels + (L_j,)``."""
        spec = self.spec
        out = np.empty(spec.parent_levels + (spec.target_levels,))
        for cfg in itertools.product(*(range(1, L + 1) for L in spec.parent_levels)):
            out[tuple(c - 1 for c in cfg)] = self.category_probs(cfg)
        return out


def cell_probs(eta: float, cutpoints: np.ndarray, link: LinkFunction) -> np.ndarray:
    """F(c_l - eta) - F(c_{l-1} - eta) for l = 1..len(cutpoints)+1."""
    link = as_link(link)
    c = np.asarray(cutpoints, dtype=float)
    lower = link.cdf(c - eta)
    upper = link.cdf(eta - c)  # 1 - F(c - eta), by symmetry of F
    probs = np.empty(c.size + 1)
    probs[0] = lower[0]
    probs[-1] = upper[-1]
    for l in range(1, c.size):
        # pick the better-conditioned difference
        if c[l - 1] - eta > 0:
            probs[l] = upper[l - 1] - upper[l]
        else:
            probs[l] = lower[l] - lower[l - 1]
    return probs


def category_probs(model: FittedNodeModel, parent_config: Sequence[int] = ()) -> np.ndarray:
    eta = model.linear_predictor(parent_config)
    return cell_probs(eta, model.cutpoints, model.spec.link)


# --------------------------------------------------------------------------
# data compression and parameter maps


@dataclass(frozen=True)
class Patterns:
    """Distinct (target, parents) rows with counts, ready for the kernels."""

    cat: np.ndarray  # target category, 1-based
    bidx: np.ndarray  # theta/phi index per parent or -1 (reference level)
    weight: np.ndarray
    free: np.ndarray  # bool mask over theta: coordinate is optimised
    n: int


def compress(spec: NodeSpec, data: OrdinalDataset) -> Patterns:
    cols = [spec.node] + list(spec.parent_ids)
    for c in cols:
        if not 1 <= c <= data.p:
            raise ValidationError(f"column {c} outside 1..{data.p}")
    if data.levels[spec.node - 1] != spec.target_levels or tuple(
        data.levels[k - 1] for k in spec.parent_ids
    ) != spec.parent_levels:
        raise ValidationError("spec level counts disagree with the dataset")
    X = data.values[:, [c - 1 for c in cols]] - 1
    radices = np.array([spec.target_levels] + list(spec.parent_levels), dtype=np.int64)
    if float(np.prod(radices.astype(float))) < 2.0**62:
        codes = kernels.encode_rows(X, radices)
        uniq, first, counts = np.unique(codes, return_index=True, return_counts=True)
        rows = X[first]
    else:
        rows, counts = np.unique(X, axis=0, return_counts=True)
    cat = rows[:, 0] + 1
    m = len(spec.parent_ids)
    bidx = np.full((rows.shape[0], m), -1, dtype=np.int64)
    free = np.ones(spec.dim, dtype=bool)
    for k, (off, L) in enumerate(zip(spec.beta_offsets, spec.parent_levels)):
        lv = rows[:, k + 1]  # 0-based parent level
        ref = lv == L - 1
        bidx[~ref, k] = off + lv[~ref]
        seen = np.zeros(L - 1, dtype=bool)
        seen[lv[~ref]] = True
        # unobserved parent levels keep a zero effect but still count in K
        free[off : off + L - 1] = seen
    return Patterns(
        np.ascontiguousarray(cat, dtype=np.int64),
        np.ascontiguousarray(bidx),
        counts.astype(float),
        free,
        int(data.n),
    )


def theta_to_phi(theta: np.ndarray, L: int) -> np.ndarray:
    nz = L - 2
    phi = np.array(theta, dtype=float, copy=True)
    if nz:
        phi[-nz:] = np.cumsum(np.exp(theta[-nz:]))
    return phi


def _to_theta_derivs(theta, grad_phi, H_phi, L):
    """Chain rule from phi = (b, gamma) to theta = (b, zeta)."""
    nz = L - 2
    if nz == 0:
        return grad_phi, H_phi
    d = theta.shape[0]
    e = np.exp(theta[-nz:])
    J = np.eye(d)
    J[-nz:, -nz:] = np.tril(np.ones((nz, nz))) * e[None, :]
    grad = J.T @ grad_phi
    if H_phi is None:
        return grad, None
    H = J.T @ H_phi @ J
    # d^2 gamma_l / d zeta_m^2 = exp(zeta_m) [m <= l]: adds diag of zeta gradient
    H[-nz:, -nz:] += np.diag(grad[-nz:])
    return grad, H


def _evaluate(spec: NodeSpec, pat: Patterns, theta: np.ndarray, order: int):
    phi = theta_to_phi(theta, spec.target_levels)
    nll, g, H = kernels.nll_grad_hess(pat.cat, pat.bidx, pat.weight, phi, spec.target_levels, spec.link.code, order)
    if order == 0:
        return nll, None, None
    g, H = _to_theta_derivs(theta, g, H, spec.target_levels)
    return nll, g, H


def _check_params(spec: NodeSpec, params) -> np.ndarray:
    theta = np.asarray(params, dtype=float).ravel()
    if theta.shape[0] != spec.dim:
        raise DimensionMismatch(f"expected {spec.dim} parameters, got {theta.shape[0]}")
    return theta


def negative_log_likelihood(spec: NodeSpec, params, data: OrdinalDataset) -> float:
    """-sum_i log Pr(x_ij | x_i,pa(j)) at unconstrained ``params``."""
    theta = _check_params(spec, params)
    return _evaluate(spec, compress(spec, data), theta, 0)[0]


def nll_gradient(spec: NodeSpec, params, data: OrdinalDataset) -> np.ndarray:
    theta = _check_params(spec, params)
    return _evaluate(spec, compress(spec, data), theta, 1)[1]


def nll_hessian(spec: NodeSpec, params, data: OrdinalDataset) -> np.ndarray:
    theta = _check_params(spec, params)
    return _evaluate(spec, compress(spec, data), theta, 2)[2]


def params_from_model(alpha: float, betas: Sequence[Sequence[float]], gammas: Sequence[float]) -> np.ndarray:
    """Pack (alpha, betas, gamma_2..gamma_{L-1}) into the unconstrained theta."""
    g = np.concatenate(([0.0], np.asarray(gammas, dtype=float)))
    gaps = np.diff(g)
    if np.any(gaps <= 0):
        raise ValidationError("cutpoints must be strictly increasing and positive after gamma_1 = 0")
    parts = [np.array([alpha], dtype=float)] + [np.asarray(b, dtype=float) for b in betas] + [np.log(gaps)]
    return np.concatenate(parts)


def _initial_theta(spec: NodeSpec, pat: Patterns) -> np.ndarray:
    L = spec.target_levels
    counts = np.bincount(pat.cat, weights=pat.weight, minlength=L + 1)[1:]
    if np.all(counts > 0):
        props = counts / counts.sum()
    else:
        # empty categories: shrink towards uniform so the start is finite
        props = (counts + 0.5) / (counts.sum() + 0.5 * L)
    cum = np.cumsum(props)[:-1]
    c = spec.link.ppf(np.clip(cum, 1e-12, 1 - 1e-12))
    theta = np.zeros(spec.dim)
    # Pr(X <= 1) = F(-alpha) pins alpha; the rest of the cuts shift by it
    theta[0] = -c[0]
    if L > 2:
        gaps = np.maximum(np.diff(c), 1e-8)
        theta[-(L - 2) :] = np.log(gaps)
    return theta


def _build_model(spec, theta, nll, converged, iterations, trace) -> FittedNodeModel:
    phi = theta_to_phi(theta, spec.target_levels)
    betas = tuple(
        np.array(theta[off : off + L - 1]) for off, L in zip(spec.beta_offsets, spec.parent_levels)
    )
    gammas = np.array(phi[1 + spec.num_beta :])
    return FittedNodeModel(
        spec=spec,
        alpha=float(theta[0]),
        betas=betas,
        gammas=gammas,
        loglik=-float(nll),
        num_params=spec.num_params,
        converged=bool(converged),
        iterations=int(iterations),
        theta=np.array(theta),
        nll_trace=tuple(trace),
    )


def fit(spec: NodeSpec, data: OrdinalDataset, opts: FitOptions | None = None) -> FittedNodeModel:
    """Maximum-likelihood fit by damped Newton with backtracking.

    Falls back to steepest descent whenever the Newton system is not
    positive definite or does not give a descent direction. Raises
    :class:`SeparationDetected` when the iterates leave the box
    ``|theta_i| <= opts.param_bound``; the exception carries the model at
    the boundary.
    """
    opts = opts or FitOptions(link=spec.link)
    if spec.link is not opts.link:
        spec = NodeSpec(spec.node, spec.parent_ids, spec.target_levels, spec.parent_levels, opts.link)
    pat = compress(spec, data)
    observed = np.unique(pat.cat)
    if observed.size < 2:
        raise DegenerateTarget(f"node {spec.node}: target has fewer than two observed levels")

    theta = _initial_theta(spec, pat)
    free = pat.free
    bound = opts.param_bound
    nll, g, H = _evaluate(spec, pat, theta, 2)
    trace = [nll]
    converged = False
    it = 0
    for it in range(1, opts.max_iter + 1):
        gf = g[free]
        if np.max(np.abs(gf), initial=0.0) <= opts.tol_grad:
            converged = True
            it -= 1
            break
        step = None
        Hf = H[np.ix_(free, free)]
        try:
            chol = np.linalg.cholesky(Hf)
            d = -np.linalg.solve(chol.T, np.linalg.solve(chol, gf))
            if np.dot(d, gf) < 0 and np.all(np.isfinite(d)):
                step = d
        except np.linalg.LinAlgError:
            pass
        candidates = [step, -gf] if step is not None else [-gf]
        accepted = False
        for d in candidates:
            slope = float(np.dot(d, gf))
            t = 1.0
            if d is not step:
                # keep the first gradient trial at most a unit move
                t = min(1.0, 1.0 / max(np.max(np.abs(d)), 1e-300))
            for _ in range(60):
                trial = theta.copy()
                trial[free] += t * d
                f_trial = _evaluate(spec, pat, trial, 0)[0]
                if np.isfinite(f_trial) and f_trial <= nll + 1e-4 * t * slope:
                    accepted = True
                    break
                if d is step and t == 1.0 and f_trial <= nll:
                    # Armijo slack below rounding resolution: a non-increasing full Newton step is fine
                    accepted = True
                    break
                t *= 0.5
            if accepted:
                break
        if not accepted:
            # no decrease possible in floating point: treat as stationary
            converged = np.max(np.abs(gf)) <= max(opts.tol_grad, 1e-6)
            break

        if np.max(np.abs(trial)) > bound:
            edge = _clip_to_bound(theta, trial, bound)
            f_edge = _evaluate(spec, pat, edge, 0)[0]
            if f_edge <= nll:
                theta, nll = edge, f_edge
                trace.append(nll)
            model = _build_model(spec, theta, nll, False, it, trace)
            raise SeparationDetected(
                f"node {spec.node} | parents {spec.parent_ids}: parameters exceed bound {bound:g}",
                model,
            )

        prev = nll
        theta = trial
        nll, g, H = _evaluate(spec, pat, theta, 2)
        trace.append(nll)
        if abs(prev - nll) <= opts.tol_nll * max(1.0, abs(nll)):
            converged = True
            break
    model = _build_model(spec, theta, nll, converged, it, trace)
    if converged and _curvature_collapsed(spec, pat, theta):
        raise SeparationDetected(
            f"node {spec.node} | parents {spec.parent_ids}: likelihood flat at the optimum (separated data)",
            model,
        )
    return model


def _curvature_collapsed(spec: NodeSpec, pat: Patterns, theta: np.ndarray) -> bool:
    """Probit fits on separated data stall far out where the density underflows.

    The observed information in (alpha, beta, gamma) coordinates is then
    numerically singular, whereas any finite MLE keeps it of order n.
    """
    phi = theta_to_phi(theta, spec.target_levels)
    _, _, H = kernels.nll_grad_hess(pat.cat, pat.bidx, pat.weight, phi, spec.target_levels, spec.link.code, 2)
    Hf = H[np.ix_(pat.free, pat.free)]
    lam = np.linalg.eigvalsh(0.5 * (Hf + Hf.T))[0]
    return lam < SEPARATION_CURVATURE * pat.n


def _clip_to_bound(theta, trial, bound):
    d = trial - theta
    ratios = [
        (math.copysign(bound, d[i]) - theta[i]) / d[i]
        for i in range(d.size)
        if d[i] != 0 and abs(trial[i]) > bound
    ]
    t = max(0.0, min(ratios)) if ratios else 1.0
    return theta + t * d


def fit_node(data: OrdinalDataset, node: int, parent_ids: Sequence[int] = (), opts: FitOptions | None = None):
    opts = opts or FitOptions()
    return fit(NodeSpec.for_data(data, node, parent_ids, opts.link), data, opts)
