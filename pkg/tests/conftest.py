import numpy as np
import pytest

from pace.discretize import DiscreteDomain
from pace.ensemble import Leaf, Split, Tree, WeightedEnsemble


def make_domain(levels):
    return DiscreteDomain(tuple(tuple(lv) for lv in levels))


def random_domain(rng, n_features=3, max_levels=4):
    levels = []
    for _ in range(n_features):
        k = rng.integers(0, max_levels + 1)
        vals = np.sort(rng.choice(np.round(np.linspace(-2, 2, 17), 2),
                                  size=k, replace=False))
        levels.append(tuple(float(v) for v in vals))
    return DiscreteDomain(tuple(levels))


def random_tree(rng, dom, max_depth, label_count, leaf_mode="probability",
                support_range=(1, 50)):
    """Random tree splitting only at registered domain levels."""
    def grow(depth):
        splittable = [i for i in range(dom.n_features) if dom.levels[i]]
        if depth >= max_depth or not splittable or rng.random() < 0.2:
            if leaf_mode == "one_hot":
                scores = np.zeros(label_count)
                scores[rng.integers(label_count)] = 1.0
            elif leaf_mode == "none":
                scores = np.zeros(0)
            else:
                scores = rng.random(label_count)
                scores /= scores.sum()
            return Leaf(scores=scores, depth=depth,
                        support=int(rng.integers(*support_range)))
        feature = int(rng.choice(splittable))
        level = float(rng.choice(dom.levels[feature]))
        return Split(feature=feature, threshold=level,
                     left=grow(depth + 1), right=grow(depth + 1))
    return Tree(grow(0))


def random_ensemble(rng, dom, n_trees, max_depth, label_count,
                    leaf_mode="probability"):
    trees = [random_tree(rng, dom, max_depth, label_count, leaf_mode)
             for _ in range(n_trees)]
    weights = rng.random(n_trees) + 0.1
    weights /= weights.sum()
    return WeightedEnsemble(trees=trees, weights=weights,
                            label_count=label_count, leaf_mode=leaf_mode)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
