import json

import numpy as np
import pytest

from pace import model_json
from pace.cli import Dataset, _column_edges, ingest, main, train_baseline
from pace.ensemble import Leaf, Split, Tree, WeightedEnsemble
from pace.errors import DegenerateModelError


def write_csv(path, X, y, header=None):
    cols = X.shape[1]
    names = header or [f"f{i}" for i in range(cols)] + ["label"]
    lines = [",".join(names)]
    for row, label in zip(X, y):
        lines.append(",".join(str(v) for v in row) + f",{label}")
    path.write_text("\n".join(lines) + "\n")


def synthetic_csv(path, n=80, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.uniform(-1, 1, size=(n, 2))
    y = (X[:, 0] + 0.5 * X[:, 1] > 0).astype(int)
    write_csv(path, X, y)
    return X, y


class TestIngest:
    def test_decile_edges(self, tmp_path):
        path = tmp_path / "d.csv"
        X = np.arange(1, 101, dtype=float).reshape(-1, 1)
        write_csv(path, X, np.tile([0, 1], 50))
        ds = ingest(str(path))
        assert len(ds.edges[0]) == 9
        # value 5 sits below the first decile edge: bin 0
        assert int(np.searchsorted(ds.edges[0], 5.0)) == 0

    def test_constant_column(self):
        assert _column_edges(np.full(30, 7.0)) == []

    def test_binary_column_untouched(self):
        values = np.tile([0.0, 1.0], 20)
        assert _column_edges(values) == [0.0, 1.0]

    def test_split_is_80_20(self, tmp_path):
        path = tmp_path / "d.csv"
        synthetic_csv(path, n=100)
        ds = ingest(str(path), seed=3)
        assert len(ds.train_idx) == 80 and len(ds.test_idx) == 20
        assert set(ds.train_idx) | set(ds.test_idx) == set(range(100))

    def test_deterministic(self, tmp_path):
        path = tmp_path / "d.csv"
        synthetic_csv(path)
        a = ingest(str(path), seed=5)
        b = ingest(str(path), seed=5)
        assert np.array_equal(a.train_idx, b.train_idx)
        assert a.edges == b.edges

    def test_non_numeric_cell_reported(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b,label\n1.0,oops,0\n")
        with pytest.raises(ValueError, match="row 2"):
            ingest(str(path))

    def test_labels_remapped_contiguous(self, tmp_path):
        path = tmp_path / "d.csv"
        write_csv(path, np.array([[0.0], [1.0], [2.0]]), [10, 30, 10])
        ds = ingest(str(path))
        assert ds.label_count == 2
        assert sorted(set(ds.y)) == [0, 1]


def separable_dataset():
    X = np.linspace(-1, 1, 20).reshape(-1, 1)
    y = (X[:, 0] > 0).astype(int)
    return Dataset(X=X, y=y, edges=[[0.0]], train_idx=np.arange(20),
                   test_idx=np.array([], dtype=int), label_count=2)


class TestTrainBaseline:
    def test_obvious_stump(self):
        ens = train_baseline(separable_dataset(), kind="bagged", n_est=1,
                             depth=1, seed=0)
        root = ens.trees[0].root
        assert isinstance(root, Split)
        assert root.feature == 0 and root.threshold == 0.0
        assert np.argmax(root.left.scores) == 0
        assert np.argmax(root.right.scores) == 1

    def test_depth_zero_rejected(self):
        with pytest.raises(ValueError):
            train_baseline(separable_dataset(), depth=0)

    def test_single_class_rejected(self):
        ds = separable_dataset()
        ds.y = np.zeros(20, dtype=int)
        with pytest.raises(DegenerateModelError):
            train_baseline(ds)

    def test_thresholds_are_bin_edges(self, tmp_path):
        path = tmp_path / "d.csv"
        synthetic_csv(path, n=120)
        ds = ingest(str(path))
        for kind in ("bagged", "boosted"):
            ens = train_baseline(ds, kind=kind, n_est=5, depth=3, seed=1)
            for tree in ens.trees:
                for feature, threshold in tree.splits():
                    assert threshold in ds.edges[feature]

    def test_boosted_properties(self, tmp_path):
        path = tmp_path / "d.csv"
        synthetic_csv(path, n=120)
        ds = ingest(str(path))
        ens = train_baseline(ds, kind="boosted", n_est=4, depth=2, seed=2)
        assert ens.leaf_mode == "one_hot"
        assert np.all(ens.weights > 0)
        for tree in ens.trees:
            for leaf in tree.leaves():
                assert np.sum(leaf.scores == 1.0) == 1

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            train_baseline(separable_dataset(), kind="stacked")


class TestMain:
    def test_smoke_full_run(self, tmp_path):
        path = tmp_path / "d.csv"
        synthetic_csv(path, n=80)
        out = tmp_path / "rep.json"
        code = main(["compress", "--data", str(path), "--n-est", "6",
                     "--depth", "1", "--eta", "0.0", "--delta-frac", "0.0",
                     "--mode", "full", "--out", str(out)])
        assert code == 0
        report = json.loads(out.read_text())
        assert report["size"] >= 1
        assert 0.0 <= report["generated_fraction"] <= 1.0
        assert report["wall_time"] > 0
        assert report["certificate"]["phase2"] is True
        model = model_json.load_ensemble(str(tmp_path / "rep_model.json"))
        assert sum(w > 1e-8 for w in model.weights) == report["size"]

    def test_prune_only_duplicated_model(self, tmp_path):
        path = tmp_path / "d.csv"
        synthetic_csv(path, n=60)
        stump = Tree(Split(feature=0, threshold=0.0,
                           left=Leaf(scores=np.array([1.0, 0.0]), depth=1),
                           right=Leaf(scores=np.array([0.0, 1.0]), depth=1)))
        dup = WeightedEnsemble(trees=[stump] * 3, weights=np.full(3, 1 / 3),
                               label_count=2)
        model_path = tmp_path / "dup.json"
        model_json.save_ensemble(dup, str(model_path))
        out = tmp_path / "rep.json"
        code = main(["compress", "--data", str(path),
                     "--load-model", str(model_path), "--mode", "prune-only",
                     "--eta", "0", "--delta-frac", "0", "--out", str(out)])
        assert code == 0
        assert json.loads(out.read_text())["size"] == 1

    def test_verify_global_embedded(self, tmp_path):
        path = tmp_path / "d.csv"
        synthetic_csv(path, n=60)
        out = tmp_path / "rep.json"
        code = main(["compress", "--data", str(path), "--n-est", "4",
                     "--depth", "1", "--mode", "prune-only",
                     "--verify-global", "--out", str(out)])
        assert code == 0
        assert json.loads(out.read_text())["verify_global"] is True

    def test_conflicting_flags(self, tmp_path):
        path = tmp_path / "d.csv"
        synthetic_csv(path)
        code = main(["compress", "--data", str(path), "--load-model", "m.json",
                     "--n-est", "5"])
        assert code == 1

    def test_missing_file_is_error_exit(self, tmp_path):
        code = main(["compress", "--data", str(tmp_path / "nope.csv")])
        assert code == 1


def test_report_size_matches_loaded_model(tmp_path):
    # ties the CLI artifacts together: S in the report equals the number
    # of positively weighted trees in the emitted model file
    path = tmp_path / "d.csv"
    synthetic_csv(path, n=70, seed=4)
    out = tmp_path / "rep.json"
    code = main(["compress", "--data", str(path), "--n-est", "5",
                 "--depth", "2", "--mode", "prune-only", "--out", str(out)])
    assert code == 0
    report = json.loads(out.read_text())
    model = model_json.load_ensemble(str(tmp_path / "rep_model.json"))
    assert report["size"] == sum(w > 1e-8 for w in model.weights)
