"""The evolutionary driver over the augmented search space.

One individual couples a learner configuration with a feature group
structure. The main loop is NSGA-II-flavored: binary tournament parent
selection by non-domination rank and crowding distance, paired variation
(uniform crossover + Gaussian mutation on the hyperparameters next to
group-injection crossover + membership mutation on the structures), candidate
evaluation by inner cross-validation with the model-feedback structure
update, and (mu + nu) survival. Ablation toggles switch off the structure
operators, the detectors, or the whole loop (random search).
"""
from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import detectors as det
from . import gbm
from .data import Dataset, stratified_holdout, stratified_kfold
from .groupstruct import (GroupStructure, Group, Monotonicity, build,
                          format_structure, gga_crossover, gga_mutate,
                          to_constraints, validate)
from .measures import FEATURELESS_POINT, ObjectiveVector, auc, evaluate_candidate, nf, ni, nnm
from .moo import ArchiveEntry, ParetoArchive, crowding_distance, nondominated_sort

log = logging.getLogger("eagga")

REFERENCE_POINT = (0.0, 1.0, 1.0, 1.0)


class TooFewEligibleError(Exception):
    pass


class BudgetZeroError(Exception):
    pass


@dataclass
class Individual:
    hp: gbm.HyperparamConfig
    g: GroupStructure
    objectives: ObjectiveVector | None = None
    eval_index: int | None = None

    @property
    def evaluated(self) -> bool:
        return self.objectives is not None


@dataclass(frozen=True)
class RunConfig:
    mu: int = 100
    nu: int = 10
    p_crossover: float = 0.7
    p_mutation: float = 0.3
    p_uniform_swap: float = 0.5
    sigma_gauss: float = 0.1
    p_param_mut: float = 0.2
    max_evaluations: int | None = None
    max_seconds: float | None = None
    seed: int = 0
    random_search: bool = False
    no_gga_crossover: bool = False
    no_gga_mutation: bool = False
    no_detectors: bool = False
    fixed_max_depth: int | None = None
    workers: int = 1
    holdout_ratio: float = 2.0 / 3.0
    inner_folds: int = 5
    detector_bins: int = 10
    mono_repeats: int = 10
    mono_subsample: float = 0.5
    detector_tree_depth: int = 5
    detector_tree_min_obs: int = 10
    geometric_success: float = 0.5

    def validate(self):
        if self.mu < 2 or self.nu < 1:
            raise ValueError("need mu >= 2 and nu >= 1")
        for name in ("p_crossover", "p_mutation", "p_uniform_swap", "p_param_mut"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must be a probability")
        if self.max_evaluations is None and self.max_seconds is None:
            raise BudgetZeroError("no budget: set max_evaluations and/or max_seconds")
        if (self.max_evaluations is not None and self.max_evaluations < 1) or (
                self.max_seconds is not None and self.max_seconds <= 0):
            raise BudgetZeroError("budget must be positive")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass
class EvalRecord:
    eval_index: int
    objectives: ObjectiveVector
    structure: str
    hp: gbm.HyperparamConfig
    accepted: bool
    hypervolume: float


@dataclass
class TestEntry:
    eval_index: int
    auc: float
    nf: float
    ni: float
    nnm: float
    model: gbm.BoostedModel
    hp: gbm.HyperparamConfig
    groups: GroupStructure


@dataclass
class RunResult:
    archive: ParetoArchive
    hv_trace: list
    eval_log: list
    test_front: list
    sign_flip: np.ndarray
    feature_names: tuple
    eval_count: int
    config: RunConfig


def _rng_for(seed: int, *key) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=tuple(key)))


# ---------------------------------------------------------------------------
# operators on the learner's hyperparameters

def hp_crossover(a: gbm.HyperparamConfig, b: gbm.HyperparamConfig, rng,
                 p_swap: float = 0.5):
    """Uniform crossover: each field independently swapped between children."""
    da, db = a.as_dict(), b.as_dict()
    for name in gbm.HP_FIELDS:
        if rng.random() < p_swap:
            da[name], db[name] = db[name], da[name]
    return gbm.HyperparamConfig(**da), gbm.HyperparamConfig(**db)


def hp_mutate(a: gbm.HyperparamConfig, rng, p_mut: float = 0.2,
              sigma: float = 0.1) -> gbm.HyperparamConfig:
    """Gaussian mutation on the min-max scaled (log-scaled where flagged)
    image of each field, clamped to [0, 1] and re-transformed; integer
    fields round to the closest integer."""
    d = a.as_dict()
    for name in gbm.HP_FIELDS:
        if rng.random() < p_mut:
            pr = gbm.PARAM_RANGES[name]
            u = pr.to_unit(d[name]) + rng.normal(0.0, sigma)
            d[name] = pr.from_unit(u)
    return gbm.HyperparamConfig(**d)


def _apply_overrides(hp: gbm.HyperparamConfig, cfg: RunConfig) -> gbm.HyperparamConfig:
    if cfg.fixed_max_depth is not None:
        return hp.replace(max_depth=cfg.fixed_max_depth)
    return hp


# ---------------------------------------------------------------------------
# initialization

@dataclass
class DetectorBundle:
    filter: det.FilterScores
    interactions: det.InteractionScores
    monotonicity: det.MonotonicityScores


def _random_structure(p: int, rng) -> GroupStructure:
    """Detector-free initialization: uniform selected count, random
    partition by uniform labels, uniform attributes."""
    s_count = int(rng.integers(1, p + 1))
    selected = rng.choice(p, size=s_count, replace=False)
    labels = rng.integers(0, s_count, size=s_count)
    members = {}
    for f, lab in zip(selected, labels):
        members.setdefault(int(lab), set()).add(int(f))
    groups = []
    for _, mem in sorted(members.items()):
        attr = Monotonicity.INCREASING if rng.integers(0, 2) == 1 else Monotonicity.UNCONSTRAINED
        groups.append(Group(frozenset(mem), attr))
    return build(set(range(p)) - set(int(f) for f in selected), groups)


def _sample_structure(p: int, cfg: RunConfig, dets: DetectorBundle | None, rng) -> GroupStructure:
    if dets is None:
        return _random_structure(p, rng)
    return det.sample_initial_structure(p, dets.filter, dets.interactions,
                                        dets.monotonicity, rng,
                                        success_p=cfg.geometric_success)


def initialize_population(ds: Dataset, cfg: RunConfig, rng,
                          dets: DetectorBundle | None) -> list:
    """Member 0 carries the exact default hyperparameters; the others carry
    mutated defaults. All group structures are sampled fresh."""
    default = _apply_overrides(gbm.HyperparamConfig.default(), cfg)
    pop = []
    for i in range(cfg.mu):
        hp = default if i == 0 else _apply_overrides(
            hp_mutate(default, rng, cfg.p_param_mut, cfg.sigma_gauss), cfg)
        pop.append(Individual(hp, _sample_structure(ds.p, cfg, dets, rng)))
    return pop


# ---------------------------------------------------------------------------
# selection, variation, survival

def rank_and_crowding(pop: list):
    points = [tuple(ind.objectives) for ind in pop]
    fronts = nondominated_sort(points)
    rank = [0] * len(pop)
    crowd = [0.0] * len(pop)
    for r, front in enumerate(fronts):
        dists = crowding_distance([points[i] for i in front])
        for i, d in zip(front, dists):
            rank[i] = r
            crowd[i] = d
    return rank, crowd


def tournament_select(pop: list, rng, _precomputed=None) -> Individual:
    """Binary tournament among individuals with a nonempty selection: lower
    non-domination rank wins, ties go to the larger crowding distance, then
    to a coin flip."""
    eligible = [i for i, ind in enumerate(pop) if ind.g.selected]
    if len(eligible) < 2:
        raise TooFewEligibleError("need at least 2 individuals with nonempty selections")
    rank, crowd = rank_and_crowding(pop) if _precomputed is None else _precomputed
    a, b = rng.choice(len(eligible), size=2, replace=False)
    ia, ib = eligible[int(a)], eligible[int(b)]
    if rank[ia] != rank[ib]:
        return pop[ia] if rank[ia] < rank[ib] else pop[ib]
    if crowd[ia] != crowd[ib]:
        return pop[ia] if crowd[ia] > crowd[ib] else pop[ib]
    return pop[ia] if rng.random() < 0.5 else pop[ib]


def _select_pair(pop: list, cfg: RunConfig, rng, precomputed):
    """Two distinct parents; falls back to uniform draws when fewer than two
    individuals have nonempty selections (pathological but live)."""
    eligible = [ind for ind in pop if ind.g.selected]
    if len(eligible) < 2:
        idx = rng.choice(len(pop), size=2, replace=False)
        return pop[int(idx[0])], pop[int(idx[1])]
    first = tournament_select(pop, rng, precomputed)
    rest = [ind for ind in pop if ind is not first]
    rest_pre = None
    if precomputed is not None:
        rank, crowd = precomputed
        keep = [i for i, ind in enumerate(pop) if ind is not first]
        rest_pre = ([rank[i] for i in keep], [crowd[i] for i in keep])
    second = tournament_select(rest, rng, rest_pre)
    return first, second


def make_offspring(parents, cfg: RunConfig, rng):
    """Paired variation: one global coin gates crossover of both genome
    halves, then one coin per child gates mutation of both halves. The GGA
    half obeys the ablation toggles."""
    pa, pb = parents
    hp1, hp2 = pa.hp, pb.hp
    g1, g2 = pa.g, pb.g
    if rng.random() < cfg.p_crossover:
        hp1, hp2 = hp_crossover(hp1, hp2, rng, cfg.p_uniform_swap)
        if not cfg.no_gga_crossover:
            g1, g2 = gga_crossover(g1, g2, rng)
    children = []
    for hp, g in ((hp1, g1), (hp2, g2)):
        if rng.random() < cfg.p_mutation:
            hp = hp_mutate(hp, rng, cfg.p_param_mut, cfg.sigma_gauss)
            if not cfg.no_gga_mutation:
                g = gga_mutate(g, rng)
        children.append(Individual(_apply_overrides(hp, cfg), g))
    return children[0], children[1]


def survival(pool: list, mu: int) -> list:
    """(mu + nu) survival: whole fronts in rank order, the splitting front
    truncated by descending crowding distance."""
    points = [tuple(ind.objectives) for ind in pool]
    fronts = nondominated_sort(points)
    out = []
    for front in fronts:
        if len(out) + len(front) <= mu:
            out.extend(pool[i] for i in front)
        else:
            dists = crowding_distance([points[i] for i in front])
            order = sorted(range(len(front)), key=lambda k: -dists[k])
            for k in order[: mu - len(out)]:
                out.append(pool[front[k]])
            break
        if len(out) == mu:
            break
    return out


# ---------------------------------------------------------------------------
# the run pipeline

def _tightens(new: GroupStructure, old: GroupStructure) -> bool:
    return new.selected <= old.selected and new.within_group_pairs() <= old.within_group_pairs()


def run(ds: Dataset, cfg: RunConfig) -> RunResult:
    """Full optimization pipeline on one dataset.

    Outer stratified holdout, detector-driven sign flip and initialization,
    inner k-fold CV fixed once, then the evolutionary loop under the
    evaluation/wall-clock budget. The archive always contains the
    featureless anchor point, so the anytime hypervolume starts at 0.5 and
    never decreases. Finally every archive entry is refit on the full outer
    training split and re-evaluated on the held-out test set.
    """
    cfg.validate()
    t_start = time.monotonic()
    outer = stratified_holdout(ds, cfg.holdout_ratio, _derived_seed(cfg.seed, 0))
    ds_train_raw = ds.subset(outer.train_indices)

    sign = np.ones(ds.p, dtype=np.int64)
    dets = None
    if not cfg.no_detectors:
        mono_probe = det.monotonicity_scores(
            ds_train_raw, cfg.mono_repeats, cfg.mono_subsample,
            _rng_for(cfg.seed, 1), cfg.detector_tree_depth, cfg.detector_tree_min_obs)
        sign = mono_probe.sign
    ds_work = det.apply_sign_flip(ds, sign)
    ds_inner = ds_work.subset(outer.train_indices)
    ds_test = ds_work.subset(outer.test_indices)
    if not cfg.no_detectors:
        dets = DetectorBundle(
            det.information_gain(ds_inner, cfg.detector_bins),
            det.fast_interactions(ds_inner, cfg.detector_bins),
            det.monotonicity_scores(ds_inner, cfg.mono_repeats, cfg.mono_subsample,
                                    _rng_for(cfg.seed, 2), cfg.detector_tree_depth,
                                    cfg.detector_tree_min_obs),
        )
    folds = stratified_kfold(ds_inner, cfg.inner_folds, _derived_seed(cfg.seed, 3))

    archive = ParetoArchive()
    anchor_structure = build(set(range(ds.p)), [])
    archive.insert(ArchiveEntry(FEATURELESS_POINT,
                                _apply_overrides(gbm.HyperparamConfig.default(), cfg),
                                anchor_structure, 0))
    hv_trace = []
    eval_log = []
    current_hv = archive.hypervolume(REFERENCE_POINT)

    state = {"evals": 0}

    def budget_open() -> bool:
        if cfg.max_evaluations is not None and state["evals"] >= cfg.max_evaluations:
            return False
        if cfg.max_seconds is not None and time.monotonic() - t_start >= cfg.max_seconds:
            return False
        return True

    def evaluate_batch(batch: list):
        """Evaluate candidates (possibly concurrently) and commit results in
        submission order; writes the feedback-tightened structure back into
        each individual."""
        nonlocal current_hv
        first_index = state["evals"] + 1

        def job(args):
            offset, ind = args
            rng = _rng_for(cfg.seed, 4, first_index + offset)
            return evaluate_candidate(ds_inner, folds, ind.hp, ind.g, rng)

        jobs = list(enumerate(batch))
        if cfg.workers > 1 and len(batch) > 1:
            with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
                results = list(pool.map(job, jobs))
        else:
            results = [job(j) for j in jobs]
        for ind, (objectives, updated) in zip(batch, results):
            state["evals"] += 1
            idx = state["evals"]
            assert _tightens(updated, ind.g), "feedback update must tighten the structure"
            assert not validate(updated, ds.p), "feedback produced an invalid structure"
            ind.objectives = objectives
            ind.g = updated
            ind.eval_index = idx
            accepted = archive.insert(ArchiveEntry(objectives, ind.hp, updated, idx))
            if accepted:
                new_hv = archive.hypervolume(REFERENCE_POINT)
                assert new_hv >= current_hv - 1e-12, "hypervolume must not decrease"
                current_hv = max(new_hv, current_hv)
            assert current_hv >= 0.5 - 1e-12, "featureless anchor bounds the hypervolume"
            hv_trace.append((idx, current_hv))
            eval_log.append(EvalRecord(idx, objectives, format_structure(updated),
                                       ind.hp, accepted, current_hv))

    loop_rng = _rng_for(cfg.seed, 5)
    population = initialize_population(ds_inner, cfg, loop_rng, dets)
    head = population if cfg.max_evaluations is None else population[: cfg.max_evaluations]
    evaluate_batch(head)
    population = head

    generation = 0
    while budget_open():
        generation += 1
        if cfg.random_search:
            default = _apply_overrides(gbm.HyperparamConfig.default(), cfg)
            children = [
                Individual(
                    _apply_overrides(hp_mutate(default, loop_rng, cfg.p_param_mut,
                                               cfg.sigma_gauss), cfg),
                    _sample_structure(ds.p, cfg, dets, loop_rng))
                for _ in range(cfg.nu)
            ]
        else:
            precomputed = rank_and_crowding(population)
            children = []
            for _ in range(math.ceil(cfg.nu / 2)):
                pair = _select_pair(population, cfg, loop_rng, precomputed)
                children.extend(make_offspring(pair, cfg, loop_rng))
            children = children[: cfg.nu]
        if cfg.max_evaluations is not None:
            children = children[: cfg.max_evaluations - state["evals"]]
        if not children:
            break
        evaluate_batch(children)
        if not cfg.random_search:
            population = survival(population + children, cfg.mu)
        log.debug("generation %d done: %d evaluations, hv=%.6f",
                  generation, state["evals"], current_hv)

    test_front = _test_reevaluation(archive, ds_inner, ds_test, cfg)
    log.info("run complete: %d evaluations, %d archive entries, final hv=%.6f",
             state["evals"], len(archive.entries), current_hv)
    return RunResult(archive, hv_trace, eval_log, test_front, sign,
                     ds.feature_names, state["evals"], cfg)


def _test_reevaluation(archive: ParetoArchive, ds_inner: Dataset,
                       ds_test: Dataset, cfg: RunConfig) -> list:
    """Refit every archive entry on the full outer-train split and score it
    on the held-out test set."""
    out = []
    for e in archive.entries:
        cs = to_constraints(e.groups, ds_inner.p)
        model = gbm.fit(ds_inner, e.hp, cs, _rng_for(cfg.seed, 6, e.eval_index))
        if e.groups.selected:
            scores = gbm.predict_raw(model, ds_test.features)
            test_auc = auc(ds_test.target, scores)
        else:
            test_auc = 0.5
        out.append(TestEntry(e.eval_index, test_auc, nf(model, ds_inner.p),
                             ni(model, ds_inner.p), nnm(model, e.groups, ds_inner.p),
                             model, e.hp, e.groups))
    return out


def _derived_seed(seed: int, tag: int) -> int:
    return int(np.random.SeedSequence(entropy=seed, spawn_key=(tag,)).generate_state(1)[0])
