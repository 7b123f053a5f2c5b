"""Ordinal causal discovery with cumulative-link Bayesian networks."""

__version__ = "0.1.0"

from .dataset import OrdinalDataset, from_csv, quantile_discretize, trichotomize_zero_median
from .graph import Dag, Move, apply_move, enumerate_dags, is_acyclic, legal_moves
from .kernels import BACKEND
from .metrics import PairDecision, accuracy, auc_ranked, forced_decision, shd, total_variation
from .regression import FitOptions, FittedNodeModel, LinkFunction, NodeSpec, category_probs, fit
from .scoring import LocalScore, ScoreCache, global_bic, local_bic
from .search import DiscoveryResult, SearchOptions, exhaustive_search, greedy_search
from .simulate import GroundTruthModel, draw_parameters, random_dag, sample

__all__ = [
    "BACKEND",
    "Dag",
    "DiscoveryResult",
    "FitOptions",
    "FittedNodeModel",
    "GroundTruthModel",
    "LinkFunction",
    "LocalScore",
    "Move",
    "NodeSpec",
    "OrdinalDataset",
    "PairDecision",
    "ScoreCache",
    "SearchOptions",
    "accuracy",
    "apply_move",
    "auc_ranked",
    "category_probs",
    "draw_parameters",
    "enumerate_dags",
    "exhaustive_search",
    "fit",
    "forced_decision",
    "from_csv",
    "global_bic",
    "greedy_search",
    "is_acyclic",
    "legal_moves",
    "local_bic",
    "quantile_discretize",
    "random_dag",
    "sample",
    "shd",
    "total_variation",
    "trichotomize_zero_median",
]
