"""Two-phase orchestration: generate improving learners, then prune.

Phase 1 alternates master solves, separation sweeps (witness cells become
new rows), and pricing (improving learners become new columns) until no
improving learner exists. Phase 2 alternates minimum-support solves with
separation sweeps until the sparse ensemble is certified faithful over
the restricted region.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import master as master_mod
from .discretize import DiscreteDomain, build_domain, encode, representative, scale
from .ensemble import Sample, Tree, WeightedEnsemble, tree_scores, vote
from .errors import BudgetExceededError, InternalConsistencyError
from .iforest import IsolationForest, path_length, plausibility, resolve_delta
from .l0prune import solve_l0, verify_support
from .pricing import (TreeFamilyConfig, is_improving, price_exact_stumps,
                      price_heuristic, trees_identical)
from .separation import find_all_pairs

WEIGHT_TOL = 1e-8


@dataclass
class PaceConfig:
    eta: float = 0.0
    delta_kind: str = "fraction"  # "raw" | "scaled" | "fraction"
    delta_value: float = 0.0
    mode: str = "full"  # "full" | "generate_only" | "prune_only"
    pricer: str = "exact_stumps"  # "exact_stumps" | "heuristic"
    max_depth: int = 1  # heuristic pricer depth
    tol_reduced_cost: float = 1e-6
    max_generated: int = 200
    time_limit: float = 300.0
    seed: int = 0
    digits: int = 9
    separation_node_budget: int | None = None
    objective_separation: bool = False  # Appendix-style max-disagreement mode

    def __post_init__(self):
        if self.eta < 0:
            raise ValueError("eta must be nonnegative")
        if self.max_generated < 0:
            raise ValueError("max_generated must be nonnegative")
        if not 1 <= self.digits <= 15:
            raise ValueError("digits must lie in [1, 15]")


@dataclass
class CompressionReport:
    final: WeightedEnsemble | None = None
    support: list[int] = field(default_factory=list)
    size: int = 0
    generated_fraction: float = 0.0
    wall_time: float = 0.0
    eta: float = 0.0
    delta_raw: float = 0.0
    masters_solved: int = 0
    l0_solved: int = 0
    separation_instances: int = 0
    witnesses_added: int = 0
    learners_generated: int = 0
    phase1_certified: bool = False
    phase2_certified: bool = False
    pricing_complete: bool = True
    empty_vote_warning: bool = False
    mode: str = "full"
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        from .model_json import ensemble_to_dict
        return {
            "size": self.size,
            "generated_fraction": self.generated_fraction,
            "wall_time": self.wall_time,
            "eta": self.eta,
            "delta_raw": self.delta_raw,
            "mode": self.mode,
            "counters": {
                "masters_solved": self.masters_solved,
                "l0_solved": self.l0_solved,
                "separation_instances": self.separation_instances,
                "witnesses_added": self.witnesses_added,
                "learners_generated": self.learners_generated,
            },
            "certificate": {
                "phase1": self.phase1_certified,
                "phase2": self.phase2_certified,
                "pricing_complete": self.pricing_complete,
            },
            "empty_vote_warning": self.empty_vote_warning,
            "notes": self.notes,
            "final_model": ensemble_to_dict(self.final) if self.final else None,
        }


def _scaled_leaf_scores(tree: Tree, sample: Sample, digits: int) -> list[int]:
    return [scale(float(s), digits) for s in tree_scores(tree, sample)]


def scaled_scores(ens: WeightedEnsemble, sample: Sample, digits: int) -> list[int]:
    """Aggregate label scores on the exact integer lattice (units 10^-2d)."""
    totals = [0] * ens.label_count
    for tree, w in zip(ens.trees, ens.weights):
        w_s = scale(float(w), digits)
        if w_s == 0:
            continue
        leaf = _scaled_leaf_scores(tree, sample, digits)
        for y in range(ens.label_count):
            totals[y] += w_s * leaf[y]
    return totals


def scaled_vote(ens: WeightedEnsemble, sample: Sample, digits: int) -> int:
    totals = scaled_scores(ens, sample, digits)
    best = max(totals)
    return totals.index(best)  # lowest index on ties


def in_region(orig: WeightedEnsemble, forest: IsolationForest | None,
              sample: Sample, eta: float, delta_raw: float,
              digits: int) -> tuple[bool, int]:
    """Membership in the confidence-and-plausibility region, on the same
    integer lattice the separation oracle uses. Returns (member, y_orig)."""
    totals = scaled_scores(orig, sample, digits)
    y_o = totals.index(max(totals))
    eta_s = scale(eta, 2 * digits)
    for rival in range(orig.label_count):
        if rival != y_o and totals[y_o] - totals[rival] < eta_s + 1:
            return False, y_o
    if delta_raw > 0:
        if forest is None:
            return False, y_o
        total_b = sum(scale(path_length(t, sample), digits) for t in forest.trees)
        if total_b < scale(delta_raw, digits):
            return False, y_o
    return True, y_o


def init_region(train: list[Sample], orig: WeightedEnsemble,
                forest: IsolationForest | None, eta: float, delta_raw: float,
                digits: int = 9) -> tuple[list[Sample], list[int]]:
    """Training samples whose original vote clears eta against every rival
    and whose plausibility clears delta, tagged with that vote."""
    kept, labels = [], []
    for sample in train:
        member, y_o = in_region(orig, forest, sample, eta, delta_raw, digits)
        if member:
            kept.append(sample)
            labels.append(y_o)
    return kept, labels


class _Clock:
    def __init__(self, limit: float):
        self.start = time.perf_counter()
        self.limit = limit

    def elapsed(self) -> float:
        return time.perf_counter() - self.start

    def expired(self) -> bool:
        return self.elapsed() > self.limit


def _current_ensemble(state: master_mod.MasterState, weights: np.ndarray,
                      label_count: int) -> WeightedEnsemble:
    return WeightedEnsemble(trees=list(state.columns), weights=weights,
                            label_count=label_count,
                            generated=list(state.column_generated))


def _separation_sweep(state: master_mod.MasterState, orig: WeightedEnsemble,
                      current: WeightedEnsemble, forest, dom, config: PaceConfig,
                      report: CompressionReport) -> bool:
    """Add every witness found in one all-pairs pass. True if any was added."""
    results = find_all_pairs(orig, current, forest, dom, config.eta,
                             report.delta_raw, config.digits,
                             node_budget=config.separation_node_budget,
                             objective_mode=config.objective_separation)
    report.separation_instances += len(results)
    added = False
    for (y_o, _y), res in results:
        if res.status != "witness":
            continue
        raw = representative(dom, res.cell)
        sample = Sample(raw=raw, cell=res.cell)
        witness_y_o = scaled_vote(orig, sample, config.digits)
        if witness_y_o != y_o:
            raise InternalConsistencyError(
                "witness cell does not reproduce the claimed original vote"
            )
        if any(s.cell == res.cell for s in state.samples):
            continue  # another pair already contributed this cell this sweep
        state.add_sample(sample, y_o)
        report.witnesses_added += 1
        added = True
    return added


def run_phase1(state: master_mod.MasterState, orig: WeightedEnsemble,
               forest, dom: DiscreteDomain, config: PaceConfig,
               report: CompressionReport, clock: _Clock) -> None:
    """Column generation with separation kept quiescent before each pricing call."""
    family = TreeFamilyConfig(max_depth=config.max_depth, domain=dom)
    state.solve()
    report.masters_solved += 1
    while True:
        # inner witness loop: re-solve until no separating cell remains
        while True:
            current = _current_ensemble(state, state.weights, orig.label_count)
            if not _separation_sweep(state, orig, current, forest, dom, config,
                                     report):
                break
            state.solve()
            report.masters_solved += 1
        report.phase1_certified = True
        if clock.expired() or report.learners_generated >= config.max_generated:
            report.pricing_complete = False
            break
        duals = state.duals_by_row()
        if config.pricer == "exact_stumps":
            outcome = price_exact_stumps(duals, state.samples, state.y_orig,
                                         dom, orig.label_count)
        else:
            outcome = price_heuristic(duals, state.samples, state.y_orig,
                                      family, orig.label_count)
        if not is_improving(outcome, config.tol_reduced_cost):
            break
        if any(trees_identical(outcome.learner, t) for t in state.columns):
            break  # heuristic returned a known tree; treat as non-improving
        prev_obj = state.objective
        state.add_column(outcome.learner, generated=True)
        report.learners_generated += 1
        state.solve()
        report.masters_solved += 1
        if state.objective > prev_obj + 1e-7:
            raise InternalConsistencyError(
                "master objective increased after adding an improving column"
            )


def run_phase2(state: master_mod.MasterState, orig: WeightedEnsemble,
               forest, dom: DiscreteDomain, config: PaceConfig,
               report: CompressionReport, clock: _Clock
               ) -> tuple[list[int], np.ndarray]:
    """Minimum-support solve with separation until the certificate holds."""
    while True:
        support, weights = solve_l0(state.A, tol=WEIGHT_TOL)
        report.l0_solved += 1
        if not verify_support(support, weights, state.A, tol=1e-6):
            raise InternalConsistencyError("l0 support failed verification")
        sparse = _current_ensemble(state, weights, orig.label_count)
        if not _separation_sweep(state, orig, sparse, forest, dom, config,
                                 report):
            report.phase2_certified = True
            return support, weights
        if clock.expired():
            report.notes.append("time limit hit during phase 2; no certificate")
            return support, weights


def run_pace(config: PaceConfig, train: list[Sample], orig: WeightedEnsemble,
             forest: IsolationForest | None,
             extra_levels: dict[int, list[float]] | None = None
             ) -> CompressionReport:
    """Full pipeline: region init, phase 1 (unless prune-only), phase 2
    (unless generate-only), report assembly. Deterministic given the seed."""
    clock = _Clock(config.time_limit)
    report = CompressionReport(mode=config.mode, eta=config.eta)

    n = len(train[0].raw) if train else (forest.trees[0].splits()[0][0] + 1
                                         if forest and forest.trees else 1)
    all_trees = list(orig.trees) + (list(forest.trees) if forest else [])
    dom = build_domain(all_trees, n, extra_levels=extra_levels)

    if config.delta_kind == "fraction" and config.delta_value > 0:
        if forest is None:
            raise ValueError("fraction delta requires an isolation forest")
        scores = np.array([plausibility(forest, s) for s in train])
        threshold = resolve_delta("fraction", config.delta_value, forest, scores)
    else:
        threshold = resolve_delta(config.delta_kind, config.delta_value, forest)
    report.delta_raw = threshold.delta_raw

    region, labels = init_region(train, orig, forest, config.eta,
                                 threshold.delta_raw, config.digits)
    for sample in region:
        if sample.cell is None:
            sample.cell = encode(dom, sample.raw)
    if not region:
        report.notes.append("initial faithfulness region is empty")

    state = master_mod.build(list(orig.trees), region, labels, orig.label_count)

    if config.mode != "prune_only":
        run_phase1(state, orig, forest, dom, config, report, clock)

    if config.mode == "generate_only":
        support = state.support(WEIGHT_TOL)
        weights = state.weights
    else:
        support, weights = run_phase2(state, orig, forest, dom, config,
                                      report, clock)

    final = _current_ensemble(state, weights, orig.label_count)
    report.final = final
    report.support = support
    report.size = len(support)
    if support:
        generated = sum(1 for i in support if state.column_generated[i])
        report.generated_fraction = generated / len(support)
    else:
        report.empty_vote_warning = True
    report.wall_time = clock.elapsed()
    return report


def certify_global(orig: WeightedEnsemble, final: WeightedEnsemble,
                   forest: IsolationForest | None, dom: DiscreteDomain,
                   eta: float, delta_raw: float, digits: int = 9,
                   cap: int = 10**6) -> bool:
    """Exhaustive desk-scale verifier: vote agreement on every region cell."""
    import itertools
    if dom.cell_count() > cap:
        raise BudgetExceededError(
            f"domain has {dom.cell_count()} cells, above cap {cap}"
        )
    for cell in itertools.product(*[range(dom.interval_count(i))
                                    for i in range(dom.n_features)]):
        sample = Sample(raw=representative(dom, cell), cell=cell)
        member, y_o = in_region(orig, forest, sample, eta, delta_raw, digits)
        if member and scaled_vote(final, sample, digits) != y_o:
            return False
    return True
