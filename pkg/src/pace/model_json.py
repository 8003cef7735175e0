"""Shared JSON schema for ensembles and isolation forests.

Schema (see README for the full description):

    {"kind": "bagged" | "boosted" | "iforest",
     "label_count": int,
     "leaf_mode": "probability" | "one_hot",
     "weights": [float, ...],
     "trees": [node, ...]}

where an internal node is {"feature": int, "threshold": float,
"left": node, "right": node} and a leaf is {"scores": [float, ...],
"depth": int, "support": int}. Isolation forests use the same tree
records with empty score lists.
"""

from __future__ import annotations

import json

from .ensemble import Leaf, Split, Tree, WeightedEnsemble
from .errors import ModelMalformedError
from .iforest import IsolationForest


def _node_to_dict(node) -> dict:
    if isinstance(node, Leaf):
        return {
            "scores": [float(s) for s in node.scores],
            "depth": int(node.depth),
            "support": int(node.support),
        }
    return {
        "feature": int(node.feature),
        "threshold": float(node.threshold),
        "left": _node_to_dict(node.left),
        "right": _node_to_dict(node.right),
    }


def _node_from_dict(rec: dict, depth: int = 0):
    if "feature" in rec:
        return Split(
            feature=int(rec["feature"]),
            threshold=float(rec["threshold"]),
            left=_node_from_dict(rec["left"], depth + 1),
            right=_node_from_dict(rec["right"], depth + 1),
        )
    if "scores" not in rec:
        raise ModelMalformedError(f"node record is neither split nor leaf: {rec}")
    return Leaf(
        scores=rec["scores"],
        depth=int(rec.get("depth", depth)),
        support=int(rec.get("support", 0)),
    )


def ensemble_to_dict(ens: WeightedEnsemble, kind: str = "bagged") -> dict:
    return {
        "kind": kind,
        "label_count": ens.label_count,
        "leaf_mode": ens.leaf_mode,
        "weights": [float(w) for w in ens.weights],
        "trees": [_node_to_dict(t.root) for t in ens.trees],
    }


def ensemble_from_dict(rec: dict) -> WeightedEnsemble:
    return WeightedEnsemble(
        trees=[Tree(_node_from_dict(t)) for t in rec["trees"]],
        weights=rec["weights"],
        label_count=int(rec["label_count"]),
        leaf_mode=rec.get("leaf_mode", "probability"),
    )


def iforest_to_dict(forest: IsolationForest) -> dict:
    return {
        "kind": "iforest",
        "s_max": int(forest.s_max),
        "trees": [_node_to_dict(t.root) for t in forest.trees],
    }


def iforest_from_dict(rec: dict) -> IsolationForest:
    if rec.get("kind") != "iforest":
        raise ModelMalformedError("expected an iforest record")
    return IsolationForest(
        trees=[Tree(_node_from_dict(t)) for t in rec["trees"]],
        s_max=int(rec["s_max"]),
    )


def save_ensemble(ens: WeightedEnsemble, path: str, kind: str = "bagged") -> None:
    with open(path, "w") as f:
        json.dump(ensemble_to_dict(ens, kind=kind), f, indent=2)


def load_ensemble(path: str) -> WeightedEnsemble:
    with open(path) as f:
        return ensemble_from_dict(json.load(f))


def save_iforest(forest: IsolationForest, path: str) -> None:
    with open(path, "w") as f:
        json.dump(iforest_to_dict(forest), f, indent=2)


def load_iforest(path: str) -> IsolationForest:
    with open(path) as f:
        return iforest_from_dict(json.load(f))
