"""Discrete separation oracle over the interval lattice.

For a fixed ordered label pair (y_o, y) it searches for a cell of the
discrete domain where the original ensemble keeps label y_o with margin
above eta, the current ensemble's vote flips away from y_o toward y, and
the isolation-forest plausibility stays above delta. All arithmetic runs
on exact integers: weights and leaf scores carry `digits` decimal digits
each (so margin sums live on the 10^-2*digits lattice) and strict
inequalities become >= rhs + 1 on that lattice.

Vote semantics on ties: the repo-wide tie-break picks the lowest label
index, so the flip constraint uses rhs 1 when y > y_o (y must strictly
beat y_o) and rhs 0 when y < y_o (a tie already flips the vote).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .discretize import DiscreteDomain, representative, scale
from .ensemble import Leaf, Tree, WeightedEnsemble
from .errors import BudgetExceededError, ModelMalformedError
from .iforest import IsolationForest, correction


@dataclass
class _CompiledLeaf:
    lo: tuple[int, ...]  # inclusive cell-index bounds per feature
    hi: tuple[int, ...]
    node: Leaf


@dataclass
class _CompiledTree:
    source: Tree
    leaves: list[_CompiledLeaf]
    leaf_index_by_id: dict[int, int]


@dataclass
class _Constraint:
    name: str
    coeffs: dict[int, list[int]]  # tree position -> per-leaf integer contribution
    rhs: int


@dataclass
class SeparationInstance:
    domain: DiscreteDomain
    digits: int
    pair: tuple[int, int]  # (y_o, y)
    trees: list[_CompiledTree]
    constraints: list[_Constraint]
    flip_constraint: int  # index into constraints of the vote-flip row


@dataclass
class SeparationResult:
    status: str  # "witness" or "unsat"
    cell: tuple[int, ...] | None = None
    nodes_explored: int = 0
    propagations: int = 0
    objective: int | None = None


def _compile_tree(tree: Tree, dom: DiscreteDomain) -> _CompiledTree:
    n = dom.n_features
    leaves: list[_CompiledLeaf] = []

    def walk(node, lo, hi):
        if isinstance(node, Leaf):
            if all(a <= b for a, b in zip(lo, hi)):
                leaves.append(_CompiledLeaf(tuple(lo), tuple(hi), node))
            return
        try:
            level = dom.level_index(node.feature, node.threshold)
        except KeyError as exc:
            raise ModelMalformedError(str(exc)) from exc
        left_hi = list(hi)
        left_hi[node.feature] = min(hi[node.feature], level)
        walk(node.left, list(lo), left_hi)
        right_lo = list(lo)
        right_lo[node.feature] = max(lo[node.feature], level + 1)
        walk(node.right, right_lo, list(hi))

    walk(tree.root, [0] * n, [dom.interval_count(i) - 1 for i in range(n)])
    return _CompiledTree(
        source=tree,
        leaves=leaves,
        leaf_index_by_id={id(leaf.node): i for i, leaf in enumerate(leaves)},
    )


def build_instance(orig: WeightedEnsemble, current: WeightedEnsemble,
                   forest: IsolationForest | None, dom: DiscreteDomain,
                   eta: float, delta_raw: float, pair: tuple[int, int],
                   digits: int = 9) -> SeparationInstance:
    """Integer-scaled feasibility model for one ordered label pair."""
    y_o, y = pair
    if y_o == y:
        raise ValueError("separation needs two distinct labels")
    trees: list[_CompiledTree] = []
    constraints: list[_Constraint] = []

    def add_group(ens: WeightedEnsemble):
        positions, weights_scaled = [], []
        for tree, w in zip(ens.trees, ens.weights):
            w_s = scale(w, digits)
            if w_s == 0:
                continue
            trees.append(_compile_tree(tree, dom))
            positions.append(len(trees) - 1)
            weights_scaled.append(w_s)
        return positions, weights_scaled

    orig_pos, orig_w = add_group(orig)
    cur_pos, cur_w = add_group(current)

    def leaf_scores_scaled(ct: _CompiledTree, label: int) -> list[int]:
        return [scale(float(leaf.node.scores[label]), digits) for leaf in ct.leaves]

    eta_s = scale(eta, 2 * digits)
    for rival in range(orig.label_count):
        if rival == y_o:
            continue
        coeffs = {}
        for pos, w_s in zip(orig_pos, orig_w):
            ct = trees[pos]
            coeffs[pos] = [
                w_s * (scale(float(l.node.scores[y_o]), digits)
                       - scale(float(l.node.scores[rival]), digits))
                for l in ct.leaves
            ]
        constraints.append(_Constraint(f"confidence_vs_{rival}", coeffs, eta_s + 1))

    flip_coeffs = {}
    for pos, w_s in zip(cur_pos, cur_w):
        ct = trees[pos]
        flip_coeffs[pos] = [
            w_s * (scale(float(l.node.scores[y]), digits)
                   - scale(float(l.node.scores[y_o]), digits))
            for l in ct.leaves
        ]
    flip_rhs = 1 if y > y_o else 0
    constraints.append(_Constraint("vote_flip", flip_coeffs, flip_rhs))
    flip_index = len(constraints) - 1

    if forest is not None and delta_raw > 0:
        coeffs = {}
        for tree in forest.trees:
            ct = _compile_tree(tree, dom)
            trees.append(ct)
            coeffs[len(trees) - 1] = [
                scale(l.node.depth + correction(l.node.support), digits)
                for l in ct.leaves
            ]
        constraints.append(_Constraint("plausibility", coeffs,
                                       scale(delta_raw, digits)))

    return SeparationInstance(domain=dom, digits=digits, pair=(y_o, y),
                              trees=trees, constraints=constraints,
                              flip_constraint=flip_index)


def _feature_order(dom: DiscreteDomain) -> list[int]:
    # fail-first: most split levels first; index breaks ties deterministically
    return sorted(range(dom.n_features),
                  key=lambda i: (-len(dom.levels[i]), i))


class _Search:
    def __init__(self, inst: SeparationInstance, node_budget: int | None):
        self.inst = inst
        self.order = _feature_order(inst.domain)
        self.node_budget = node_budget
        self.nodes = 0
        self.propagations = 0

    def charge(self):
        self.nodes += 1
        if self.node_budget is not None and self.nodes > self.node_budget:
            raise BudgetExceededError(
                f"separation search exceeded {self.node_budget} nodes"
            )

    def filtered(self, surviving: list[list[int]], feature: int, value: int):
        out = []
        for pos, leaves in enumerate(surviving):
            ct = self.inst.trees[pos]
            kept = [i for i in leaves
                    if ct.leaves[i].lo[feature] <= value <= ct.leaves[i].hi[feature]]
            self.propagations += 1
            out.append(kept)
        return out

    def bound(self, constraint: _Constraint, surviving: list[list[int]]) -> int:
        total = 0
        for pos, coeffs in constraint.coeffs.items():
            leaves = surviving[pos]
            if not leaves:
                return -(1 << 200)
            total += max(coeffs[i] for i in leaves)
        return total

    def exact(self, constraint: _Constraint, surviving: list[list[int]]) -> int:
        total = 0
        for pos, coeffs in constraint.coeffs.items():
            (leaf,) = surviving[pos]
            total += coeffs[leaf]
        return total


def find_witness(inst: SeparationInstance,
                 node_budget: int | None = None) -> SeparationResult:
    """Depth-first search with per-tree leaf filtering and optimistic bounds."""
    search = _Search(inst, node_budget)
    n = inst.domain.n_features
    surviving0 = [list(range(len(ct.leaves))) for ct in inst.trees]
    assignment = [0] * n

    def dfs(pos: int, surviving: list[list[int]]):
        search.charge()
        for c in inst.constraints:
            if search.bound(c, surviving) < c.rhs:
                return None
        if pos == n:
            if all(search.exact(c, surviving) >= c.rhs for c in inst.constraints):
                cell = [0] * n
                for f, v in zip(search.order, assignment):
                    cell[f] = v
                return tuple(cell)
            return None
        feature = search.order[pos]
        for value in range(inst.domain.interval_count(feature)):
            assignment[pos] = value
            found = dfs(pos + 1, search.filtered(surviving, feature, value))
            if found is not None:
                return found
        return None

    cell = dfs(0, surviving0)
    return SeparationResult(
        status="witness" if cell is not None else "unsat",
        cell=cell,
        nodes_explored=search.nodes,
        propagations=search.propagations,
    )


def find_max_disagreement(inst: SeparationInstance,
                          node_budget: int | None = None) -> SeparationResult:
    """Branch and bound maximizing the vote-flip margin subject to the
    confidence and plausibility constraints (objective-based variant)."""
    search = _Search(inst, node_budget)
    n = inst.domain.n_features
    flip = inst.constraints[inst.flip_constraint]
    side = [c for i, c in enumerate(inst.constraints) if i != inst.flip_constraint]
    surviving0 = [list(range(len(ct.leaves))) for ct in inst.trees]
    assignment = [0] * n
    best: dict = {"value": None, "cell": None}

    def dfs(pos: int, surviving: list[list[int]]):
        search.charge()
        for c in side:
            if search.bound(c, surviving) < c.rhs:
                return
        optimistic = search.bound(flip, surviving)
        if best["value"] is not None and optimistic <= best["value"]:
            return
        if pos == n:
            if all(search.exact(c, surviving) >= c.rhs for c in side):
                value = search.exact(flip, surviving)
                if best["value"] is None or value > best["value"]:
                    cell = [0] * n
                    for f, v in zip(search.order, assignment):
                        cell[f] = v
                    best["value"] = value
                    best["cell"] = tuple(cell)
            return
        feature = search.order[pos]
        for value in range(inst.domain.interval_count(feature)):
            assignment[pos] = value
            dfs(pos + 1, search.filtered(surviving, feature, value))

    dfs(0, surviving0)
    if best["value"] is None or best["value"] < flip.rhs:
        return SeparationResult(status="unsat", nodes_explored=search.nodes,
                                propagations=search.propagations,
                                objective=best["value"])
    return SeparationResult(status="witness", cell=best["cell"],
                            nodes_explored=search.nodes,
                            propagations=search.propagations,
                            objective=best["value"])


def brute_force_oracle(inst: SeparationInstance,
                       cap: int = 10**6) -> SeparationResult:
    """Exhaustive reference oracle: routes raw representatives through the
    source trees, independent of the guard-box search machinery."""
    dom = inst.domain
    if dom.cell_count() > cap:
        raise ValueError(f"domain has {dom.cell_count()} cells, above cap {cap}")
    checked = 0
    for cell in itertools.product(*[range(dom.interval_count(i))
                                    for i in range(dom.n_features)]):
        checked += 1
        raw = representative(dom, cell)
        ok = True
        leaf_of = [ct.leaf_index_by_id[id(ct.source.route(raw))]
                   for ct in inst.trees]
        for c in inst.constraints:
            total = sum(coeffs[leaf_of[pos]] for pos, coeffs in c.coeffs.items())
            if total < c.rhs:
                ok = False
                break
        if ok:
            return SeparationResult(status="witness", cell=cell,
                                    nodes_explored=checked)
    return SeparationResult(status="unsat", nodes_explored=checked)


def find_all_pairs(orig: WeightedEnsemble, current: WeightedEnsemble,
                   forest: IsolationForest | None, dom: DiscreteDomain,
                   eta: float, delta_raw: float, digits: int = 9,
                   node_budget: int | None = None,
                   objective_mode: bool = False,
                   ) -> list[tuple[tuple[int, int], SeparationResult]]:
    """Run the oracle for every ordered pair of distinct labels.

    An empty witness list certifies faithfulness over the restricted region.
    """
    if orig.label_count < 2:
        raise ValueError("need at least two labels")
    solver = find_max_disagreement if objective_mode else find_witness
    results = []
    for y_o in range(orig.label_count):
        for y in range(orig.label_count):
            if y == y_o:
                continue
            inst = build_instance(orig, current, forest, dom, eta, delta_raw,
                                  (y_o, y), digits)
            results.append(((y_o, y), solver(inst, node_budget)))
    return results
