"""Convert fitted scikit-learn models into the pace JSON model schema.

The schema is the one documented in the core package (pace.model_json):

    {"kind": "bagged" | "boosted" | "iforest",
     "label_count": int, "leaf_mode": ..., "weights": [...],
     "trees": [node, ...]}

with internal nodes {"feature", "threshold", "left", "right"} and leaves
{"scores", "depth", "support"}. Everything here works off the fitted
estimators' tree_ arrays; the core package is never imported, so the
boundary between the two components is exactly the JSON file.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import asdict, dataclass

import numpy as np


class ExportError(Exception):
    pass


@dataclass
class ExportManifest:
    source_kind: str
    tree_count: int
    depth_bound: int
    leaf_mode: str
    feature_count: int
    notes: list[str]

    def to_dict(self) -> dict:
        return asdict(self)


def _require_fitted(model, attr: str):
    if not hasattr(model, attr):
        raise ExportError(
            f"model has no {attr!r}; fit it before exporting"
        )


def _tree_to_node(tree, node_id: int, depth: int, leaf_fn) -> dict:
    """Recurse over a sklearn tree_ structure; leaf_fn builds leaf records."""
    left = tree.children_left[node_id]
    right = tree.children_right[node_id]
    if left == -1:
        return leaf_fn(tree, node_id, depth)
    return {
        "feature": int(tree.feature[node_id]),
        "threshold": float(tree.threshold[node_id]),
        "left": _tree_to_node(tree, left, depth + 1, leaf_fn),
        "right": _tree_to_node(tree, right, depth + 1, leaf_fn),
    }


def _probability_leaf(tree, node_id: int, depth: int) -> dict:
    counts = tree.value[node_id].ravel()
    total = counts.sum()
    scores = counts / total if total > 0 else np.full_like(counts, 1.0 / len(counts))
    return {
        "scores": [float(s) for s in scores],
        "depth": depth,
        "support": int(tree.n_node_samples[node_id]),
    }


def _one_hot_leaf(tree, node_id: int, depth: int) -> dict:
    counts = tree.value[node_id].ravel()
    scores = np.zeros(len(counts))
    scores[int(np.argmax(counts))] = 1.0
    return {
        "scores": [float(s) for s in scores],
        "depth": depth,
        "support": int(tree.n_node_samples[node_id]),
    }


def _score_leaf(tree, node_id: int, depth: int) -> dict:
    return {
        "scores": [],
        "depth": depth,
        "support": int(tree.n_node_samples[node_id]),
    }


def _max_depth(node: dict) -> int:
    if "scores" in node:
        return node["depth"]
    return max(_max_depth(node["left"]), _max_depth(node["right"]))


def export_ensemble(model, out_path: str) -> ExportManifest:
    """Write a fitted forest or boosted classifier as a pace model file.

    Bagged forests get probability leaves and uniform weights; boosted
    models get one-hot leaves with their stage weights copied verbatim.
    """
    _require_fitted(model, "estimators_")
    notes = []
    if hasattr(model, "estimator_weights_"):
        kind = "boosted"
        leaf_mode = "one_hot"
        leaf_fn = _one_hot_leaf
        weights = [float(w) for w in
                   model.estimator_weights_[:len(model.estimators_)]]
        notes.append("stage weights copied verbatim")
    else:
        kind = "bagged"
        leaf_mode = "probability"
        leaf_fn = _probability_leaf
        n = len(model.estimators_)
        weights = [1.0 / n] * n
        notes.append("uniform weights over bootstrap trees")
    classes = list(getattr(model, "classes_", []))
    if classes != sorted(classes):
        raise ExportError("class order is not sorted; refusing to export")
    trees = [_tree_to_node(est.tree_, 0, 0, leaf_fn)
             for est in model.estimators_]
    record = {
        "kind": kind,
        "label_count": int(model.n_classes_),
        "leaf_mode": leaf_mode,
        "weights": weights,
        "trees": trees,
    }
    with open(out_path, "w") as f:
        json.dump(record, f, indent=2)
    return ExportManifest(
        source_kind=type(model).__name__,
        tree_count=len(trees),
        depth_bound=max(_max_depth(t) for t in trees),
        leaf_mode=leaf_mode,
        feature_count=int(model.n_features_in_),
        notes=notes,
    )


def export_iforest(model, out_path: str) -> ExportManifest:
    """Write a fitted sklearn IsolationForest in the shared schema.

    Leaves carry their node depth and training support, which is what
    the core needs to recompute corrected path lengths. The per-tree
    path-length convention matches sklearn's: node depth plus the
    average-path correction of the leaf's sample count.
    """
    _require_fitted(model, "estimators_")
    trees = [_tree_to_node(est.tree_, 0, 0, _score_leaf)
             for est in model.estimators_]
    record = {
        "kind": "iforest",
        "s_max": int(model.max_samples_),
        "trees": trees,
    }
    with open(out_path, "w") as f:
        json.dump(record, f, indent=2)
    return ExportManifest(
        source_kind=type(model).__name__,
        tree_count=len(trees),
        depth_bound=max(_max_depth(t) for t in trees),
        leaf_mode="none",
        feature_count=int(model.n_features_in_),
        notes=["leaf depth/support annotations for corrected path lengths"],
    )


def _average_path_length(n: int) -> float:
    # sklearn's correction term; mirrored here so the score comparison
    # does not depend on the core package
    if n <= 1:
        return 0.0
    if n == 2:
        return 1.0
    return 2.0 * (np.log(n - 1.0) + np.euler_gamma) - 2.0 * (n - 1.0) / n


def roundtrip_check(model, json_path: str, n_probes: int = 1000,
                    seed: int = 0, tol: float = 1e-6) -> float:
    """Agreement rate between the host model and the core-loaded JSON.

    Classifiers compare votes under the core's lowest-index tie-break;
    isolation forests compare anomaly scores within tol after aligning
    the correction convention. Returns a rate in [0, 1].
    """
    from pace import model_json
    from pace.ensemble import Sample, vote
    from pace.iforest import plausibility

    if n_probes == 0:
        warnings.warn("roundtrip_check with 0 probes is vacuous")
        return 1.0
    rng = np.random.default_rng(seed)
    probes = rng.uniform(-3, 3, size=(n_probes, int(model.n_features_in_)))

    with open(json_path) as f:
        record = json.load(f)
    if record.get("kind") == "iforest":
        forest = model_json.iforest_from_dict(record)
        c_max = _average_path_length(forest.s_max)
        n_trees = len(forest.trees)
        host = -model.score_samples(probes)
        agree = 0
        for x, expected in zip(probes, host):
            mean_depth = plausibility(forest, Sample(raw=x)) / n_trees
            score = 2.0 ** (-mean_depth / c_max)
            if abs(score - expected) <= tol:
                agree += 1
        return agree / n_probes

    ens = model_json.ensemble_from_dict(record)
    host = model.predict(probes)
    classes = np.asarray(model.classes_)
    agree = sum(
        1 for x, y in zip(probes, host)
        if classes[vote(ens, Sample(raw=x))] == y
    )
    return agree / n_probes
