"""Finite per-feature split-level sets and integer coefficient scaling.

Interval convention: with levels a_0 < ... < a_{m-1} on a feature,
interval k = 0 covers (-inf, a_0], interval k covers (a_{k-1}, a_k],
and interval m covers (a_{m-1}, inf). This matches the tree routing
rule "x <= threshold goes left".
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ensemble import Tree
from .errors import ScalingOverflowError

DEFAULT_DIGITS = 9
_INT_LIMIT = 2**63 - 1


@dataclass(frozen=True)
class DiscreteDomain:
    levels: tuple[tuple[float, ...], ...]  # per feature, strictly increasing

    @property
    def n_features(self) -> int:
        return len(self.levels)

    def interval_count(self, feature: int) -> int:
        return len(self.levels[feature]) + 1

    def cell_count(self) -> int:
        total = 1
        for lv in self.levels:
            total *= len(lv) + 1
        return total

    def level_index(self, feature: int, threshold: float) -> int:
        """Exact position of a registered threshold in the level set."""
        lv = self.levels[feature]
        k = int(np.searchsorted(lv, threshold))
        if k >= len(lv) or lv[k] != threshold:
            raise KeyError(
                f"threshold {threshold} on feature {feature} is not a registered level"
            )
        return k


def build_domain(trees: list[Tree], n: int,
                 extra_levels: dict[int, list[float]] | None = None) -> DiscreteDomain:
    """Collect the sorted, deduplicated thresholds of every tree per feature."""
    buckets: list[set[float]] = [set() for _ in range(n)]
    for tree in trees:
        for feature, threshold in tree.splits():
            if feature >= n:
                raise ValueError(f"tree splits on feature {feature}, only {n} declared")
            buckets[feature].add(float(threshold))
    if extra_levels:
        for feature, levels in extra_levels.items():
            buckets[feature].update(float(a) for a in levels)
    return DiscreteDomain(tuple(tuple(sorted(b)) for b in buckets))


def encode(dom: DiscreteDomain, raw: np.ndarray) -> tuple[int, ...]:
    """Interval index per feature: the number of levels strictly below the value."""
    raw = np.asarray(raw, dtype=float)
    if len(raw) != dom.n_features:
        raise ValueError(f"expected {dom.n_features} features, got {len(raw)}")
    if np.any(np.isnan(raw)):
        raise ValueError("cannot encode a sample with NaN entries")
    # interval (a_{k-1}, a_k]: count of levels strictly below the value
    return tuple(
        int(np.searchsorted(dom.levels[i], v, side="left"))
        for i, v in enumerate(raw)
    )


def representative(dom: DiscreteDomain, cell: tuple[int, ...]) -> np.ndarray:
    """A raw sample inside the given cell; encode(representative(cell)) == cell."""
    if len(cell) != dom.n_features:
        raise ValueError(f"expected {dom.n_features} indices, got {len(cell)}")
    raw = np.zeros(dom.n_features)
    for i, k in enumerate(cell):
        lv = dom.levels[i]
        if k < 0 or k > len(lv):
            raise ValueError(f"cell index {k} out of range for feature {i}")
        if not lv:
            raw[i] = 0.0
        elif k == 0:
            raw[i] = lv[0]
        elif k == len(lv):
            raw[i] = lv[-1] + 1.0
        else:
            raw[i] = 0.5 * (lv[k - 1] + lv[k])
    return raw


def scale(value: float, d: int = DEFAULT_DIGITS) -> int:
    """Round value * 10^d half away from zero."""
    scaled = abs(float(value)) * 10**d
    if scaled > _INT_LIMIT:
        raise ScalingOverflowError(
            f"|{value}| * 10^{d} exceeds 63-bit range; use a smaller d"
        )
    return int(math.copysign(math.floor(scaled + 0.5), value))
