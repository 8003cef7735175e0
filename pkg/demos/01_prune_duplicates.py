"""Prune a deliberately redundant ensemble down to a single tree.

Three copies of the same stump vote identically everywhere, so the
minimum-cardinality reweighting keeps exactly one of them and the
faithfulness certificate still holds on every cell of the domain.

Run:  python3 demos/01_prune_duplicates.py
"""

import numpy as np

from pace import PaceConfig, Sample, certify_global, run_pace
from pace.discretize import build_domain
from pace.ensemble import Leaf, Split, Tree, WeightedEnsemble


def make_stump():
    return Tree(Split(
        feature=0, threshold=0.5,
        left=Leaf(scores=np.array([1.0, 0.0]), depth=1),
        right=Leaf(scores=np.array([0.0, 1.0]), depth=1),
    ))


def main():
    orig = WeightedEnsemble(
        trees=[make_stump() for _ in range(3)],
        weights=np.full(3, 1.0 / 3.0),
        label_count=2,
    )
    train = [Sample(raw=np.array([x])) for x in (0.1, 0.3, 0.6, 0.9, 1.4)]

    config = PaceConfig(eta=0.0, delta_kind="fraction", delta_value=0.0,
                        mode="prune_only")
    report = run_pace(config, train, orig, None)

    print(f"original size : 3")
    print(f"pruned size   : {report.size}")
    print(f"certificate   : {report.phase2_certified}")
    print(f"kept columns  : {report.support}")

    dom = build_domain(list(orig.trees) + list(report.final.trees), 1)
    ok = certify_global(orig, report.final, None, dom, 0.0, 0.0)
    print(f"exhaustive cell-by-cell agreement: {ok}")


if __name__ == "__main__":
    main()
