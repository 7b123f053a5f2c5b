"""Command-line interface: ``ordcd <subcommand> ...``.

Exit codes: 0 success, 2 user or data error, 3 numerical failure. Errors
are written to stderr as a JSON object.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import __version__
from .dataset import OrdinalDataset, discretize_matrix, from_csv, parse_levels, read_real_csv
from .errors import InputError, OrdCDError, ParseError, ValidationError
from .experiments import EXPERIMENTS, run_experiment
from .graph import Dag, parse_edgelist, to_dot, to_edgelist
from .metrics import PairDecision, accuracy, auc_ranked, forced_decision, shd
from .regression import FitOptions
from .scoring import global_bic
from .search import SearchOptions, default_threads, exhaustive_search, greedy_search
from .simulate import confounder_model, sample, simulate_dataset

SCHEMA_VERSION = "ordcd.result/1"


@dataclass
class RunConfig:
    """Everything that determines a run; echoed into every JSON output."""

    subcommand: str = ""
    csv: str | None = None
    levels: str = "auto"
    discretize: int | None = None
    trichotomize_zero: bool = False
    link: str = "probit"
    search: str = "greedy"
    strategy: str = "best"
    init: str = "empty"
    max_parents: int | None = None
    seed: int = 0
    max_iter: int = 200
    tol_grad: float = 1e-8
    tol_nll: float = 1e-10
    param_bound: float = 30.0
    repeats: int | None = None
    threads: int = field(default_factory=default_threads)
    extra: dict = field(default_factory=dict)

    def fit_options(self) -> FitOptions:
        return FitOptions(self.link, self.max_iter, self.tol_grad, self.tol_nll, self.param_bound)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)


def _emit(obj, path=None):
    text = json.dumps(obj, indent=2, sort_keys=False) + "\n"
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _load_data(cfg: RunConfig, path=None) -> OrdinalDataset:
    path = path or cfg.csv
    if path is None:
        raise InputError("--csv is required")
    if cfg.discretize is not None or cfg.trichotomize_zero:
        names, raw = read_real_csv(path)
        return discretize_matrix(names, raw, cfg.discretize, zero_median=cfg.trichotomize_zero)
    return from_csv(path, parse_levels(cfg.levels))


def _read_graph(path, names) -> Dag:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ParseError(f"no such file: {path}") from None
    return parse_edgelist(text, names)


def _base_payload(cfg: RunConfig) -> dict:
    return {"schema_version": SCHEMA_VERSION, "ordcd_version": __version__, "config": cfg.to_dict()}


# -- subcommands -------------------------------------------------------------


def cmd_fit(cfg: RunConfig, args) -> int:
    data = _load_data(cfg)
    sopts = SearchOptions(cfg.fit_options(), cfg.max_parents, cfg.strategy, cfg.threads)
    if cfg.search == "exhaustive":
        result = exhaustive_search(data, sopts)
    else:
        init = None if cfg.init == "empty" else _read_graph(cfg.init, data.names)
        result = greedy_search(data, init, sopts)
    payload = _base_payload(cfg)
    payload["columns"] = list(data.names)
    payload["levels"] = list(data.levels)
    payload["n"] = data.n
    payload["result"] = result.to_dict(data.names)
    _emit(payload, args.out)
    if args.dot:
        Path(args.dot).write_text(to_dot(result.graph, data.names), encoding="utf-8")
    if args.edgelist:
        Path(args.edgelist).write_text(to_edgelist(result.graph, data.names), encoding="utf-8")
    return 0


def cmd_score(cfg: RunConfig, args) -> int:
    data = _load_data(cfg)
    g = _read_graph(args.graph, data.names)
    total, locals_ = global_bic(g, data, cfg.fit_options())
    payload = _base_payload(cfg)
    payload["bic"] = total
    payload["edges"] = [[data.names[s - 1], data.names[t - 1]] for s, t in g.sorted_edges()]
    payload["local_scores"] = [
        dict(ls.to_dict(), name=data.names[ls.node - 1], parents=[data.names[k - 1] for k in ls.parent_set])
        for ls in locals_
    ]
    _emit(payload, args.out)
    return 0


def _read_labels(path) -> dict:
    out = {}
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or not {"pair", "direction"} <= set(reader.fieldnames):
                raise ParseError(f"{path}: need header with 'pair' and 'direction' columns")
            for row in reader:
                d = row["direction"].strip().lower()
                d = {"->": "forward", "<-": "backward"}.get(d, d)
                if d not in ("forward", "backward"):
                    raise ParseError(f"{path}: bad direction {row['direction']!r}")
                out[row["pair"].strip()] = d
    except FileNotFoundError:
        raise ParseError(f"no such file: {path}") from None
    return out


def cmd_pair(cfg: RunConfig, args) -> int:
    pair_dir = Path(cfg.csv)
    if not pair_dir.is_dir():
        raise InputError(f"{pair_dir} is not a directory of pair CSV files")
    files = sorted(pair_dir.glob("*.csv"))
    if not files:
        raise InputError(f"{pair_dir} has no .csv files")
    labels = _read_labels(args.truth) if args.truth else {}
    opts = cfg.fit_options()
    rows, decisions, truths = [], [], []
    for f in files:
        data = _load_data(cfg, f)
        if data.p != 2:
            raise ValidationError(f"{f.name}: expected 2 columns, got {data.p}")
        dec: PairDecision = forced_decision(data, opts)
        row = {
            "pair": f.stem,
            "cause_candidate": data.names[0],
            "effect_candidate": data.names[1],
            "decision": dec.direction,
            "confidence": dec.confidence,
            "bic_forward": dec.bic_forward,
            "bic_backward": dec.bic_backward,
            "tie": dec.tie,
        }
        if f.stem in labels:
            row["truth"] = labels[f.stem]
            decisions.append(dec)
            truths.append(labels[f.stem])
        rows.append(row)
    summary = {"pairs": len(rows), "labelled": len(truths)}
    if truths:
        summary["accuracy"] = accuracy(decisions, truths)
        try:
            summary["auc"] = auc_ranked(decisions, truths)
        except OrdCDError:
            summary["auc"] = None
    payload = _base_payload(cfg)
    payload["pairs"] = rows
    payload["summary"] = summary
    _emit(payload, args.out)
    if args.tsv:
        _write_tsv(rows, args.tsv)
    return 0


def _write_tsv(rows, path):
    if not rows:
        Path(path).write_text("", encoding="utf-8")
        return
    cols = []
    for row in rows:
        for k in row:
            if k not in cols:
                cols.append(k)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=cols, delimiter="\t", lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


def cmd_simulate(cfg: RunConfig, args) -> int:
    if args.confounder:
        rng = np.random.default_rng(cfg.seed)
        model = confounder_model(args.sigma, rng, levels=args.levels, link=cfg.link)
        data = sample(model, args.n, rng).subset([1, 2])
        truth = Dag(2, frozenset({(1, 2)}))
    else:
        model, data = simulate_dataset(args.p, args.edges, args.levels, args.sigma, args.n, cfg.seed, cfg.link)
        truth = model.graph
    data.to_csv(args.out)
    if args.truth:
        Path(args.truth).write_text(to_edgelist(truth, data.names), encoding="utf-8")
    return 0


def cmd_discretize(cfg: RunConfig, args) -> int:
    if cfg.discretize is None and not cfg.trichotomize_zero:
        raise InputError("give --L or --trichotomize-zero")
    data = _load_data(cfg)
    text = data.to_csv(args.out)
    if not args.out:
        sys.stdout.write(text)
    return 0


def cmd_eval(cfg: RunConfig, args) -> int:
    texts = []
    for path in (args.estimated, args.truth):
        try:
            texts.append(Path(path).read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ParseError(f"no such file: {path}") from None
    if cfg.csv:
        names = list(from_csv(cfg.csv, parse_levels(cfg.levels)).names)
    else:
        names = []
        for text in texts:
            for line in text.splitlines():
                line = line.split("#", 1)[0]
                if "->" in line:
                    for nm in (x.strip() for x in line.split("->", 1)):
                        if nm not in names:
                            names.append(nm)
        names = names or ["_"]
    est = parse_edgelist(texts[0], names)
    tru = parse_edgelist(texts[1], names)
    payload = _base_payload(cfg)
    payload["shd"] = shd(est, tru)
    payload["estimated_edges"] = len(est.edges)
    payload["true_edges"] = len(tru.edges)
    _emit(payload, args.out)
    return 0


def _floats(text: str) -> list[float]:
    """``0.25,0.75`` or a range ``0.25..1.5`` (step 0.25)."""
    if ".." in text:
        lo, hi = (float(x) for x in text.split(".."))
        return [round(x, 10) for x in np.arange(lo, hi + 1e-9, 0.25)]
    return [float(x) for x in text.split(",")]


def cmd_experiment(cfg: RunConfig, args) -> int:
    name = args.name
    kw = {"seed": cfg.seed}
    if name != "fig1-identifiability":
        kw["workers"] = cfg.threads
    if cfg.repeats is not None and name != "fig1-identifiability":
        kw["repeats"] = cfg.repeats
    if args.n is not None:
        kw["n"] = args.n
    if name == "shd-curve":
        if args.L is not None:
            kw["L"] = args.L
        if args.p is not None:
            kw["p"] = args.p
        if args.edges is not None:
            kw["edges"] = args.edges
        if args.sigmas:
            kw["sigmas"] = _floats(args.sigmas)
        if cfg.max_parents is not None:
            kw["max_parents"] = cfg.max_parents
    elif name == "confounder-grid":
        kw.pop("n", None)
        if args.sigmas:
            kw["sigmas"] = _floats(args.sigmas)
        if args.ns:
            kw["ns"] = [int(x) for x in args.ns.split(",")]
        elif args.n is not None:
            kw["ns"] = [args.n]
        if args.L is not None:
            kw["levels"] = args.L
        kw["hidden_confounder"] = not args.no_confounder
    elif name == "binary-null" and args.sigmas:
        kw["sigma"] = _floats(args.sigmas)[0]
    cfg.extra = {k: v for k, v in kw.items() if k != "workers"}
    rows, summary = run_experiment(name, **kw)
    summary.pop("seconds", None)
    out_dir = Path(args.out_dir) if args.out_dir else None
    payload = _base_payload(cfg)
    payload["experiment"] = name
    payload["summary"] = summary
    if out_dir:
        out_dir.mkdir(parents=True, exist_ok=True)
        _write_tsv(rows, out_dir / f"{name}.tsv")
        _emit(payload, out_dir / f"{name}.json")
    _emit(payload)
    return 0


# -- parser ------------------------------------------------------------------


def _add_fit_opts(p):
    p.add_argument("--link", choices=["probit", "logit"])
    p.add_argument("--max-iter", type=int)
    p.add_argument("--tol-grad", type=float)
    p.add_argument("--tol-nll", type=float)
    p.add_argument("--param-bound", type=float)


def _add_data_opts(p, csv_required=False):
    p.add_argument("--csv", required=csv_required, help="input CSV (header row required)")
    p.add_argument("--levels", help="'auto' or comma-separated level counts")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--discretize", type=int, metavar="L", help="quantile-discretize real columns into L levels")
    g.add_argument("--trichotomize-zero", action="store_true", default=None, help="zero / <= nonzero median / above")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ordcd", description="Ordinal causal discovery")
    parser.add_argument("--version", action="version", version=f"ordcd {__version__}")
    parser.add_argument("--config", help="JSON file with RunConfig defaults")
    parser.add_argument("--threads", type=int, help="worker count (default: $ORDCD_THREADS or 1)")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("fit", help="estimate a DAG from ordinal data")
    _add_data_opts(p)
    _add_fit_opts(p)
    p.add_argument("--search", choices=["greedy", "exhaustive"])
    p.add_argument("--strategy", choices=["best", "first"], help="greedy move selection")
    p.add_argument("--init", help="'empty' or an edge-list file")
    p.add_argument("--max-parents", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="JSON output path (default stdout)")
    p.add_argument("--dot", help="also write the estimated graph as DOT")
    p.add_argument("--edgelist", help="also write the estimated graph as an edge list")

    p = sub.add_parser("score", help="BIC of a given graph")
    _add_data_opts(p)
    _add_fit_opts(p)
    p.add_argument("--graph", required=True, help="edge-list file")
    p.add_argument("--out")

    p = sub.add_parser("pair", help="forced decisions for a directory of two-column CSVs")
    _add_data_opts(p)
    _add_fit_opts(p)
    p.add_argument("--truth", help="CSV with columns pair,direction (forward/backward)")
    p.add_argument("--out", help="JSON output path")
    p.add_argument("--tsv", help="per-pair TSV output path")

    p = sub.add_parser("simulate", help="synthetic ordinal BN data")
    p.add_argument("--p", type=int, default=10)
    p.add_argument("--edges", type=int, default=10)
    p.add_argument("--levels", type=int, default=5)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--n", type=int, default=500)
    p.add_argument("--seed", type=int)
    p.add_argument("--link", choices=["probit", "logit"])
    p.add_argument("--out", required=True)
    p.add_argument("--truth", help="write the true graph as an edge list")
    p.add_argument("--confounder", action="store_true", help="hidden-confounder pair (X1, X2)")

    p = sub.add_parser("discretize", help="turn real-valued columns into ordinal codes")
    p.add_argument("--csv", required=True)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--L", dest="discretize", type=int)
    g.add_argument("--trichotomize-zero", action="store_true", default=None)
    p.add_argument("--out")

    p = sub.add_parser("eval", help="SHD between two edge lists")
    p.add_argument("--estimated", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--csv", help="optional data file supplying the node set")
    p.add_argument("--out")

    p = sub.add_parser("experiment", help="run a named simulation experiment")
    p.add_argument("name", choices=EXPERIMENTS)
    p.add_argument("--repeats", type=int)
    p.add_argument("--sigmas", help="comma list or lo..hi (step 0.25)")
    p.add_argument("--ns", help="comma list of sample sizes (confounder-grid)")
    p.add_argument("--n", type=int)
    p.add_argument("--L", type=int)
    p.add_argument("--p", type=int)
    p.add_argument("--edges", type=int)
    p.add_argument("--max-parents", type=int)
    p.add_argument("--no-confounder", action="store_true", help="confounder-grid without the hidden cause")
    p.add_argument("--seed", type=int)
    p.add_argument("--out-dir", help="write <name>.tsv and <name>.json here")
    return parser


_CONFIG_ARGS = (
    "csv",
    "levels",
    "discretize",
    "trichotomize_zero",
    "link",
    "search",
    "strategy",
    "init",
    "max_parents",
    "seed",
    "max_iter",
    "tol_grad",
    "tol_nll",
    "param_bound",
    "repeats",
    "threads",
)


def make_config(args) -> RunConfig:
    base = {}
    if args.config:
        try:
            base = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ParseError(f"cannot read config {args.config}: {exc}") from None
        base.pop("subcommand", None)
    cfg = RunConfig.from_dict(base)
    cfg.subcommand = args.subcommand
    for name in _CONFIG_ARGS:
        val = getattr(args, name, None)
        if val is not None:
            setattr(cfg, name, val)
    return cfg


COMMANDS = {
    "fit": cmd_fit,
    "score": cmd_score,
    "pair": cmd_pair,
    "simulate": cmd_simulate,
    "discretize": cmd_discretize,
    "eval": cmd_eval,
    "experiment": cmd_experiment,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = make_config(args)
        FitOptions(cfg.link, cfg.max_iter, cfg.tol_grad, cfg.tol_nll, cfg.param_bound)
        return COMMANDS[args.subcommand](cfg, args)
    except OrdCDError as exc:
        err = {"error": type(exc).__name__, "message": str(exc), "exit_code": exc.exit_code}
        sys.stderr.write(json.dumps(err) + "\n")
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
