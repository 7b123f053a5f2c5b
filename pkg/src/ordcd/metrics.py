"""Structure-recovery and pairwise-decision metrics."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import stats

from .dataset import OrdinalDataset
from .errors import (
    DegenerateLabels,
    LengthMismatch,
    NodeCountMismatch,
    NotNormalized,
    ShapeMismatch,
    ValidationError,
)
from .graph import Dag
from .regression import FitOptions, fit_node
from .scoring import global_bic
from .simulate import joint_table

FORWARD = "forward"
BACKWARD = "backward"
TIE_RTOL = 1e-9


@dataclass(frozen=True)
class PairDecision:
    """Forced choice between column 1 -> column 2 (forward) and the reverse.

    ``confidence`` is BIC(backward) - BIC(forward). A difference within
    ``TIE_RTOL`` of the BIC magnitudes is a tie: confidence 0, direction
    forward, ``tie`` set.
    """

    direction: str
    confidence: float
    bic_forward: float
    bic_backward: float
    tie: bool = False

    @property
    def forward(self) -> bool:
        return self.direction == FORWARD


def shd(g1: Dag, g2: Dag) -> int:
    """Pairs adjacent in exactly one graph, plus pairs oriented differently."""
    if g1.num_nodes != g2.num_nodes:
        raise NodeCountMismatch(f"{g1.num_nodes} vs {g2.num_nodes} nodes")
    skel1 = {frozenset(e) for e in g1.edges}
    skel2 = {frozenset(e) for e in g2.edges}
    missing_or_extra = len(skel1 ^ skel2)
    reversed_ = sum(1 for s, t in g1.edges if (t, s) in g2.edges)
    return missing_or_extra + reversed_


def forced_decision(data: OrdinalDataset, opts: FitOptions | None = None) -> PairDecision:
    """Compare BIC of column1 -> column2 against column2 -> column1."""
    if data.p != 2:
        raise ValidationError(f"forced decision needs exactly two columns, got {data.p}")
    opts = opts or FitOptions()
    fwd, _ = global_bic(Dag(2, frozenset({(1, 2)})), data, opts)
    bwd, _ = global_bic(Dag(2, frozenset({(2, 1)})), data, opts)
    conf = bwd - fwd
    # saturated pairs (both binary) differ only by rounding; call that a tie
    tie = abs(conf) <= TIE_RTOL * (abs(fwd) + abs(bwd))
    if tie:
        conf = 0.0
    return PairDecision(FORWARD if conf >= 0 else BACKWARD, conf, fwd, bwd, tie=tie)


def _truth_forward(labels) -> np.ndarray:
    out = []
    for x in labels:
        if isinstance(x, (bool, np.bool_)):
            out.append(bool(x))
        elif isinstance(x, str):
            if x.lower() not in (FORWARD, BACKWARD):
                raise ValidationError(f"label {x!r} is neither forward nor backward")
            out.append(x.lower() == FORWARD)
        else:
            raise ValidationError(f"unsupported label {x!r}")
    return np.array(out, dtype=bool)


def accuracy(decisions: Sequence[PairDecision], truth) -> float:
    if len(decisions) != len(truth):
        raise LengthMismatch(f"{len(decisions)} decisions vs {len(truth)} labels")
    if not decisions:
        raise LengthMismatch("no decisions")
    pred = np.array([d.forward for d in decisions])
    return float(np.mean(pred == _truth_forward(truth)))


def auc_ranked(decisions: Sequence[PairDecision], truth) -> float:
    """ROC AUC of the signed confidence for the forward class.

    Equivalent to the Mann-Whitney statistic with mid-ranks for tied
    confidences.
    """
    if len(decisions) != len(truth):
        raise LengthMismatch(f"{len(decisions)} decisions vs {len(truth)} labels")
    y = _truth_forward(truth)
    pos, neg = int(y.sum()), int((~y).sum())
    if pos == 0 or neg == 0:
        raise DegenerateLabels("AUC needs both forward and backward labels")
    scores = np.array([d.confidence for d in decisions], dtype=float)
    ranks = stats.rankdata(scores)  # average ranks for ties
    return float((ranks[y].sum() - pos * (pos + 1) / 2) / (pos * neg))


def total_variation(dist1, dist2, atol: float = 1e-9) -> float:
    a = np.asarray(dist1, dtype=float)
    b = np.asarray(dist2, dtype=float)
    if a.shape != b.shape:
        raise ShapeMismatch(f"{a.shape} vs {b.shape}")
    for t in (a, b):
        if np.any(t < -atol) or abs(t.sum() - 1.0) > atol:
            raise NotNormalized("tables must be nonnegative and sum to 1")
    return float(0.5 * np.abs(a - b).sum())


def empirical_joint(data: OrdinalDataset) -> np.ndarray:
    table = np.zeros(data.levels)
    np.add.at(table, tuple((data.values - 1).T), 1.0)
    return table / data.n


def fitted_joint(g: Dag, data: OrdinalDataset, opts: FitOptions | None = None) -> np.ndarray:
    """Joint table implied by MLE fits of every node of ``g`` (small p only)."""
    opts = opts or FitOptions()
    models = {j: fit_node(data, j, pa, opts) for j, pa in enumerate(g.parent_sets(), 1)}
    return joint_table(g, data.levels, models)
