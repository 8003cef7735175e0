import math

import numpy as np
import pytest

from pace.discretize import build_domain
from pace.ensemble import Leaf, Sample, Tree
from pace.errors import DegenerateModelError
from pace.iforest import (IsolationForest, correction, path_length,
                          plausibility, resolve_delta, train)


def leaf_tree(depth, support):
    return Tree(Leaf(scores=np.zeros(0), depth=depth, support=support))


class TestCorrection:
    def test_small_supports(self):
        assert correction(0) == 0.0
        assert correction(1) == 0.0
        assert correction(2) == 1.0

    def test_three(self):
        assert correction(3) == pytest.approx(1.207393, abs=1e-6)

    def test_default_subsample(self):
        assert correction(256) == pytest.approx(10.244772, abs=1e-3)

    def test_nondecreasing(self):
        probes = list(range(2, 100)) + [10**3, 10**4, 10**5, 10**6]
        values = [correction(s) for s in probes]
        assert all(a <= b + 1e-12 for a, b in zip(values, values[1:]))


class TestPathLength:
    def test_depth_plus_correction(self):
        s = Sample(raw=np.array([0.0]))
        assert path_length(leaf_tree(3, 2), s) == 4.0

    def test_isolated_leaf(self):
        s = Sample(raw=np.array([0.0]))
        assert path_length(leaf_tree(5, 1), s) == 5.0

    def test_root_leaf(self):
        s = Sample(raw=np.array([0.0]))
        assert path_length(leaf_tree(0, 1), s) == 0.0


class TestPlausibility:
    def test_additivity(self):
        s = Sample(raw=np.array([0.0]))
        one = IsolationForest(trees=[leaf_tree(3, 2)], s_max=16)
        two = IsolationForest(trees=[leaf_tree(3, 2)] * 2, s_max=16)
        assert plausibility(two, s) == 2 * plausibility(one, s)

    def test_all_isolated(self):
        s = Sample(raw=np.array([0.0]))
        forest = IsolationForest(trees=[leaf_tree(0, 1)] * 5, s_max=16)
        assert plausibility(forest, s) == 0.0

    def test_single_tree(self):
        s = Sample(raw=np.array([0.0]))
        forest = IsolationForest(trees=[leaf_tree(3, 2)], s_max=16)
        assert plausibility(forest, s) == 4.0

    def test_empty_forest(self):
        with pytest.raises(DegenerateModelError):
            plausibility(IsolationForest(trees=[], s_max=16),
                         Sample(raw=np.array([0.0])))


class TestTrain:
    def test_repeated_point(self):
        data = np.tile([[1.0, 2.0]], (20, 1))
        forest = train(data, n_trees=5, s_max=8, seed=0)
        for tree in forest.trees:
            assert isinstance(tree.root, Leaf)
        assert plausibility(forest, Sample(raw=np.array([1.0, 2.0]))) == \
            5 * correction(8)

    def test_zero_trees_rejected(self):
        with pytest.raises(ValueError):
            train(np.zeros((4, 2)), n_trees=0)

    def test_empty_data_rejected(self):
        with pytest.raises(ValueError):
            train(np.zeros((0, 2)))

    def test_outlier_scores_low(self, rng):
        inliers = np.vstack([rng.normal(0, 0.3, size=(60, 2)),
                             rng.normal(5, 0.3, size=(60, 2))])
        outlier = np.array([[50.0, -50.0]])
        data = np.vstack([inliers, outlier])
        forest = train(data, n_trees=50, s_max=64, seed=7)
        inlier_scores = [plausibility(forest, Sample(raw=x)) for x in inliers]
        out_score = plausibility(forest, Sample(raw=outlier[0]))
        assert out_score < np.percentile(inlier_scores, 10)

    def test_depth_cap_and_support_sums(self, rng):
        data = rng.uniform(0, 1, size=(40, 2))
        s = min(16, len(data))
        forest = train(data, n_trees=10, s_max=16, seed=1)
        cap = math.ceil(math.log2(s))
        for tree in forest.trees:
            leaves = tree.leaves()
            assert all(leaf.depth <= cap for leaf in leaves)
            assert sum(leaf.support for leaf in leaves) == s

    def test_thresholds_snapped_to_levels(self, rng):
        data = rng.uniform(0, 1, size=(50, 2))
        levels = {0: [0.25, 0.5, 0.75], 1: [0.5]}
        forest = train(data, n_trees=20, s_max=32, seed=2,
                       levels_by_feature=levels)
        dom = build_domain(forest.trees, 2, extra_levels=levels)
        for i, lv in levels.items():
            assert set(dom.levels[i]).issubset(set(lv))


class TestResolveDelta:
    def test_scaled_half(self):
        forest = IsolationForest(trees=[], s_max=256)
        thr = resolve_delta("scaled", 0.5, forest)
        assert thr.delta_raw == pytest.approx(correction(256), abs=1e-9)
        assert thr.provenance == "scaled"

    def test_fraction_zero(self):
        thr = resolve_delta("fraction", 0.0)
        assert thr.delta_raw == 0.0

    def test_raw_passthrough(self):
        assert resolve_delta("raw", 7.25).delta_raw == 7.25

    def test_scaled_zero_rejected(self):
        forest = IsolationForest(trees=[], s_max=256)
        with pytest.raises(ValueError):
            resolve_delta("scaled", 0.0, forest)

    def test_fraction_quantile_consistency(self, rng):
        scores = np.sort(rng.uniform(0, 20, size=200))
        for frac in (0.1, 0.25, 0.5, 0.9):
            thr = resolve_delta("fraction", frac, train_scores=scores)
            flagged = int(np.sum(scores < thr.delta_raw))
            assert abs(flagged - math.floor(frac * len(scores))) <= 1

    def test_fraction_one_excludes_all(self, rng):
        scores = rng.uniform(0, 20, size=50)
        thr = resolve_delta("fraction", 1.0, train_scores=scores)
        assert np.all(scores < thr.delta_raw)
