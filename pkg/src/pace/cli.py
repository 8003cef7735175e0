"""Command-line entry point: ingestion, baseline training, compression.

CSV in (header row, last column is the class label), model and report
JSON out. Continuous columns are discretized into 10 quantile bins with
a uniform-spacing fallback, and every baseline split threshold is a bin
edge, so the discrete separation domain stays closed.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import iforest as iforest_mod
from . import model_json
from .discretize import build_domain
from .driver import PaceConfig, certify_global, run_pace
from .ensemble import Leaf, Sample, Split, Tree, WeightedEnsemble
from .errors import DegenerateModelError, PaceError


@dataclass
class Dataset:
    X: np.ndarray
    y: np.ndarray
    edges: list[list[float]]  # candidate split levels per feature
    train_idx: np.ndarray
    test_idx: np.ndarray
    label_count: int


def _column_edges(values: np.ndarray) -> list[float]:
    uniq = np.unique(values)
    if len(uniq) == 1:
        return []  # constant column: one interval
    if set(uniq).issubset({0.0, 1.0}):
        return [0.0, 1.0]  # binary feature convention
    edges = np.quantile(values, np.linspace(0.1, 0.9, 9))
    if len(np.unique(edges)) < len(edges):
        # an empty quantile bin: fall back to uniformly spaced edges
        edges = np.linspace(values.min(), values.max(), 11)[1:-1]
    return [float(e) for e in np.unique(edges)]


def ingest(csv_path: str, seed: int = 0) -> Dataset:
    """Load a CSV, bin continuous columns, and make a deterministic 80/20 split."""
    with open(csv_path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader)
        rows = []
        for r, row in enumerate(reader, start=2):
            parsed = []
            for c, cell in enumerate(row):
                try:
                    parsed.append(float(cell))
                except ValueError:
                    raise ValueError(
                        f"non-numeric cell {cell!r} at row {r}, column "
                        f"{header[c] if c < len(header) else c}"
                    ) from None
            rows.append(parsed)
    data = np.array(rows)
    if data.size == 0:
        raise ValueError(f"no data rows in {csv_path}")
    X = data[:, :-1]
    raw_labels = data[:, -1]
    classes = np.unique(raw_labels)
    y = np.searchsorted(classes, raw_labels)
    edges = [_column_edges(X[:, i]) for i in range(X.shape[1])]
    rng = np.random.default_rng(seed)
    perm = rng.permutation(len(X))
    cut = int(round(0.8 * len(X)))
    return Dataset(X=X, y=y, edges=edges, train_idx=perm[:cut],
                   test_idx=perm[cut:], label_count=len(classes))


def _weighted_gini(counts: np.ndarray) -> float:
    total = counts.sum()
    if total <= 0:
        return 0.0
    p = counts / total
    return float(total * (1.0 - np.sum(p * p)))


def _leaf(counts: np.ndarray, depth: int, support: int, mode: str) -> Leaf:
    if mode == "one_hot":
        scores = np.zeros(len(counts))
        scores[int(np.argmax(counts))] = 1.0
    else:
        scores = counts / counts.sum() if counts.sum() > 0 else \
            np.full(len(counts), 1.0 / len(counts))
    return Leaf(scores=scores, depth=depth, support=support)


def _grow_classifier(X, y, weights, edges, depth, max_depth, label_count,
                     mode, rng, feature_fraction):
    counts = np.zeros(label_count)
    np.add.at(counts, y, weights)
    if depth >= max_depth or len(X) <= 1 or np.count_nonzero(counts) <= 1:
        return _leaf(counts, depth, len(X), mode)
    n_features = X.shape[1]
    if feature_fraction < 1.0:
        k = max(1, math.ceil(math.sqrt(n_features)))
        features = sorted(rng.choice(n_features, size=k, replace=False))
    else:
        features = range(n_features)
    parent = _weighted_gini(counts)
    best = None
    for f in features:
        for a in edges[f]:
            mask = X[:, f] <= a
            if mask.all() or not mask.any():
                continue
            lc = np.zeros(label_count)
            np.add.at(lc, y[mask], weights[mask])
            rc = counts - lc
            impurity = _weighted_gini(lc) + _weighted_gini(rc)
            if best is None or impurity < best[0] - 1e-12:
                best = (impurity, f, a, mask)
    if best is None or best[0] >= parent - 1e-12:
        return _leaf(counts, depth, len(X), mode)
    _, f, a, mask = best
    return Split(
        feature=int(f), threshold=float(a),
        left=_grow_classifier(X[mask], y[mask], weights[mask], edges, depth + 1,
                              max_depth, label_count, mode, rng, feature_fraction),
        right=_grow_classifier(X[~mask], y[~mask], weights[~mask], edges, depth + 1,
                               max_depth, label_count, mode, rng, feature_fraction),
    )


def train_baseline(dataset: Dataset, kind: str = "bagged", n_est: int = 25,
                   depth: int = 2, seed: int = 0) -> WeightedEnsemble:
    """Bagged forest (probability leaves, uniform weights) or SAMME-style
    boosted one-hot trees with stage weights. Splits only at bin edges."""
    if n_est < 1 or depth < 1:
        raise ValueError("n_est and depth must be >= 1")
    X = dataset.X[dataset.train_idx]
    y = dataset.y[dataset.train_idx]
    if len(np.unique(y)) < 2:
        raise DegenerateModelError("training data contains a single class")
    K = dataset.label_count
    rng = np.random.default_rng(seed)
    if kind == "bagged":
        trees = []
        for _ in range(n_est):
            idx = rng.choice(len(X), size=len(X), replace=True)
            root = _grow_classifier(X[idx], y[idx], np.ones(len(idx)),
                                    dataset.edges, 0, depth, K, "probability",
                                    rng, feature_fraction=0.5)
            trees.append(Tree(root))
        return WeightedEnsemble(trees=trees, weights=np.full(n_est, 1.0 / n_est),
                                label_count=K, leaf_mode="probability")
    if kind == "boosted":
        sample_w = np.full(len(X), 1.0 / len(X))
        trees, alphas = [], []
        for _ in range(n_est):
            root = _grow_classifier(X, y, sample_w, dataset.edges, 0, depth, K,
                                    "one_hot", rng, feature_fraction=1.0)
            tree = Tree(root)
            pred = np.array([int(np.argmax(tree.route(x).scores)) for x in X])
            wrong = pred != y
            err = float(sample_w[wrong].sum())
            if err <= 1e-12:
                trees.append(tree)
                alphas.append(math.log((1.0 - 1e-12) / 1e-12) + math.log(K - 1))
                break
            if err >= 1.0 - 1.0 / K:
                break
            alpha = math.log((1.0 - err) / err) + math.log(K - 1)
            trees.append(tree)
            alphas.append(alpha)
            sample_w = sample_w * np.exp(alpha * wrong)
            sample_w /= sample_w.sum()
        if not trees:
            raise DegenerateModelError("boosting produced no usable stage")
        return WeightedEnsemble(trees=trees, weights=np.array(alphas),
                                label_count=K, leaf_mode="one_hot")
    raise ValueError(f"unknown baseline kind {kind!r}")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pace")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("compress", help="compress a tree ensemble")
    p.add_argument("--data", required=True)
    p.add_argument("--load-model")
    p.add_argument("--load-iforest")
    p.add_argument("--kind", choices=["bagged", "boosted"], default="bagged")
    p.add_argument("--n-est", type=int, default=None)
    p.add_argument("--depth", type=int, default=2)
    p.add_argument("--eta", type=float, default=0.0)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--delta-raw", type=float)
    group.add_argument("--delta-scaled", type=float)
    group.add_argument("--delta-frac", type=float)
    p.add_argument("--mode", choices=["full", "generate-only", "prune-only"],
                   default="full")
    p.add_argument("--pricer", choices=["stumps", "greedy"], default="stumps")
    p.add_argument("--max-new", type=int, default=200)
    p.add_argument("--scale-digits", type=int, default=9)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--time-limit", type=float, default=300.0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--verify-global", action="store_true")
    p.add_argument("--out", default="pace_report.json")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _compress(args)
    except PaceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _compress(args) -> int:
    if args.load_model and args.n_est is not None:
        print("error: --load-model conflicts with --n-est", file=sys.stderr)
        return 1
    dataset = ingest(args.data, seed=args.seed)
    if args.load_model:
        orig = model_json.load_ensemble(args.load_model)
    else:
        orig = train_baseline(dataset, kind=args.kind,
                              n_est=args.n_est or 25, depth=args.depth,
                              seed=args.seed)
    if args.load_iforest:
        forest = model_json.load_iforest(args.load_iforest)
    else:
        levels = {i: e for i, e in enumerate(dataset.edges) if e}
        forest = iforest_mod.train(dataset.X[dataset.train_idx], n_trees=25,
                                   s_max=min(256, len(dataset.train_idx)),
                                   seed=args.seed, levels_by_feature=levels)

    if args.delta_raw is not None:
        delta_kind, delta_value = "raw", args.delta_raw
    elif args.delta_scaled is not None:
        delta_kind, delta_value = "scaled", args.delta_scaled
    else:
        delta_kind, delta_value = "fraction", args.delta_frac or 0.0

    config = PaceConfig(
        eta=args.eta,
        delta_kind=delta_kind,
        delta_value=delta_value,
        mode=args.mode.replace("-", "_"),
        pricer="exact_stumps" if args.pricer == "stumps" else "heuristic",
        max_depth=max(1, args.depth),
        max_generated=args.max_new,
        time_limit=args.time_limit,
        seed=args.seed,
        digits=args.scale_digits,
    )
    train = [Sample(raw=x) for x in dataset.X[dataset.train_idx]]
    extra = {i: e for i, e in enumerate(dataset.edges) if e}
    report = run_pace(config, train, orig, forest, extra_levels=extra)

    out = report.to_dict()
    if args.verify_global:
        n = dataset.X.shape[1]
        dom = build_domain(list(orig.trees) + list(forest.trees), n,
                           extra_levels=extra)
        try:
            out["verify_global"] = certify_global(
                orig, report.final, forest, dom, config.eta, report.delta_raw,
                config.digits)
        except PaceError as exc:
            out["verify_global"] = f"skipped: {exc}"
    with open(args.out, "w") as f:
        json.dump(out, f, indent=2)
    model_path = args.out.replace(".json", "") + "_model.json"
    model_json.save_ensemble(report.final, model_path)
    print(f"S={report.size} P={report.generated_fraction:.2f} "
          f"T={report.wall_time:.2f}s -> {args.out}")
    certified = report.phase2_certified or (
        config.mode == "generate_only" and report.phase1_certified)
    return 0 if certified else 2


if __name__ == "__main__":
    raise SystemExit(main())
