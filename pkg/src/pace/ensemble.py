"""Weighted tree ensembles: trees, leaves, voting and margins.

Routing convention: a sample goes left iff x[feature] <= threshold.
Argmax ties are always broken by the lowest label index.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateModelError, ModelMalformedError


@dataclass
class Leaf:
    scores: np.ndarray  # one nonnegative score per label
    depth: int = 0
    support: int = 0

    def __post_init__(self):
        self.scores = np.asarray(self.scores, dtype=float)


@dataclass
class Split:
    feature: int
    threshold: float
    left: "Node"
    right: "Node"


Node = Leaf | Split


@dataclass
class Tree:
    root: Node

    def leaves(self) -> list[Leaf]:
        out = []
        stack = [self.root]
        while stack:
            node = stack.pop()
            if isinstance(node, Leaf):
                out.append(node)
            else:
                stack.append(node.right)
                stack.append(node.left)
        return out

    def splits(self) -> list[tuple[int, float]]:
        out = []
        stack = [self.root]
        while stack:
            node = stack.pop()
            if isinstance(node, Split):
                out.append((node.feature, node.threshold))
                stack.append(node.right)
                stack.append(node.left)
        return out

    def route(self, raw: np.ndarray) -> Leaf:
        node = self.root
        while isinstance(node, Split):
            if node.feature >= len(raw):
                raise ModelMalformedError(
                    f"split on feature {node.feature} but sample has {len(raw)} features"
                )
            node = node.left if raw[node.feature] <= node.threshold else node.right
        return node

    def node_count(self) -> int:
        count = 0
        stack = [self.root]
        while stack:
            node = stack.pop()
            count += 1
            if isinstance(node, Split):
                stack.append(node.right)
                stack.append(node.left)
        return count


@dataclass
class Sample:
    raw: np.ndarray
    cell: tuple[int, ...] | None = None
    known_label: int | None = None

    def __post_init__(self):
        self.raw = np.asarray(self.raw, dtype=float)


@dataclass
class WeightedEnsemble:
    trees: list[Tree]
    weights: np.ndarray
    label_count: int
    leaf_mode: str = "probability"  # "probability" or "one_hot"
    generated: list[bool] = field(default_factory=list)

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        if len(self.weights) != len(self.trees):
            raise ModelMalformedError("one weight per tree required")
        if np.any(self.weights < 0):
            raise ModelMalformedError("weights must be nonnegative")
        if not self.generated:
            self.generated = [False] * len(self.trees)

    def __len__(self) -> int:
        return len(self.trees)


def tree_scores(tree: Tree, sample: Sample) -> np.ndarray:
    """Score vector of the unique leaf reached by the sample."""
    return tree.route(sample.raw).scores


def aggregate_scores(ens: WeightedEnsemble, sample: Sample) -> np.ndarray:
    total = np.zeros(ens.label_count)
    for tree, w in zip(ens.trees, ens.weights):
        total += w * tree_scores(tree, sample)
    return total


def vote(ens: WeightedEnsemble, sample: Sample, empty_policy: str = "label0") -> int:
    """Weighted majority vote; ties go to the lowest label index."""
    if len(ens.trees) == 0 or not np.any(ens.weights > 0):
        if empty_policy == "error":
            raise DegenerateModelError("vote on an empty ensemble")
        return 0
    return int(np.argmax(aggregate_scores(ens, sample)))


def margin(ens: WeightedEnsemble, sample: Sample, y: int, y_rival: int) -> float:
    """Weighted score gap between label y and a rival label."""
    if y == y_rival:
        raise ValueError("margin requires two distinct labels")
    total = aggregate_scores(ens, sample)
    return float(total[y] - total[y_rival])


def normalize(ens: WeightedEnsemble) -> WeightedEnsemble:
    total = float(np.sum(ens.weights))
    if total <= 0:
        raise DegenerateModelError("cannot normalize all-zero weights")
    return WeightedEnsemble(
        trees=ens.trees,
        weights=ens.weights / total,
        label_count=ens.label_count,
        leaf_mode=ens.leaf_mode,
        generated=list(ens.generated),
    )
