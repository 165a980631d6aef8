import math

import numpy as np
import pytest

from eagga.data import Dataset
from eagga.gbm import HyperparamConfig, PARAM_RANGES
from eagga.groupstruct import parse_structure, validate
from eagga.evolution import (BudgetZeroError, DetectorBundle, Individual,
                             RunConfig, TooFewEligibleError, hp_crossover,
                             hp_mutate, initialize_population, make_offspring,
                             rank_and_crowding, run, survival, tournament_select)
from eagga.measures import ObjectiveVector
from conftest import make_synthetic, random_structure


def cfg_small(**kw):
    base = dict(mu=8, nu=4, seed=0, max_evaluations=30)
    base.update(kw)
    return RunConfig(**base)


class Zeros:
    """rng stub driving every probability gate closed."""

    def random(self):
        return 1.0

    def normal(self, mu, sigma):
        return 0.0


class Ones:
    """rng stub forcing every swap/mutation on."""

    def __init__(self, shift=0.0):
        self.shift = shift

    def random(self):
        return 0.0

    def normal(self, mu, sigma):
        return self.shift


# -- hyperparameter operators --------------------------------------------------

def test_hp_crossover_identical_parents():
    rng = np.random.default_rng(0)
    a = HyperparamConfig.default()
    c1, c2 = hp_crossover(a, a, rng)
    assert c1 == a and c2 == a


def test_hp_crossover_forced_full_swap():
    a = HyperparamConfig.default()
    b = hp_mutate(a, np.random.default_rng(1), p_mut=1.0)
    c1, c2 = hp_crossover(a, b, Ones())
    assert c1 == b and c2 == a


def test_hp_crossover_property_in_range():
    rng = np.random.default_rng(2)
    a = HyperparamConfig.default()
    for _ in range(2000):
        a2 = hp_mutate(a, rng, p_mut=0.5)
        b2 = hp_mutate(a, rng, p_mut=0.5)
        c1, c2 = hp_crossover(a2, b2, rng)
        c1.validate()
        c2.validate()


def test_hp_mutate_identity_at_zero_probability():
    a = HyperparamConfig.default()
    assert hp_mutate(a, Zeros(), p_mut=0.2) == a
    assert hp_mutate(a, np.random.default_rng(0), p_mut=0.0) == a


def test_hp_mutate_clamps_at_bound():
    a = HyperparamConfig.default().replace(eta=1.0)
    out = hp_mutate(a, Ones(shift=0.5), p_mut=1.0)
    assert out.eta == 1.0  # positive perturbation at the upper bound stays put


def test_hp_mutate_log_image():
    assert PARAM_RANGES["nrounds"].to_unit(100) == pytest.approx(0.5406, abs=1e-4)
    # a forced +0.1 sigma step on the unit log scale lands near 5000**0.6406
    out = hp_mutate(HyperparamConfig.default(), Ones(shift=0.1), p_mut=1.0)
    assert out.nrounds == int(min(5000, max(1, math.floor(5000 ** (0.54068 + 0.1) + 0.5))))


def test_hp_mutate_integer_rounding():
    rng = np.random.default_rng(3)
    for _ in range(500):
        out = hp_mutate(HyperparamConfig.default(), rng, p_mut=1.0)
        assert isinstance(out.nrounds, int) and isinstance(out.max_depth, int)
        out.validate()


# -- initialization --------------------------------------------------------------

def _flat_bundle(p):
    from eagga.detectors import FilterScores, InteractionScores, MonotonicityScores
    return DetectorBundle(
        FilterScores(np.ones(p)), InteractionScores(np.zeros((p, p))),
        MonotonicityScores(np.zeros(p), np.full(p, 0.2), np.ones(p, dtype=np.int64)))


def test_initialize_member0_exact_defaults(synthetic_ds):
    pop = initialize_population(synthetic_ds, cfg_small(), np.random.default_rng(0),
                                _flat_bundle(synthetic_ds.p))
    assert pop[0].hp == HyperparamConfig.default()
    assert pop[0].hp.eta == 0.3 and pop[0].hp.max_depth == 6


def test_initialize_mu_one(synthetic_ds):
    cfg = RunConfig(mu=1, nu=1, seed=0, max_evaluations=1)
    pop = initialize_population(synthetic_ds, cfg, np.random.default_rng(0),
                                _flat_bundle(synthetic_ds.p))
    assert len(pop) == 1 and pop[0].hp == HyperparamConfig.default()


def test_initialize_structures_valid(synthetic_ds):
    for dets in (None, _flat_bundle(synthetic_ds.p)):
        cfg = cfg_small(mu=40, no_detectors=dets is None)
        pop = initialize_population(synthetic_ds, cfg, np.random.default_rng(1), dets)
        assert len(pop) == 40
        for ind in pop:
            assert validate(ind.g, synthetic_ds.p) == []


def test_initialize_fixed_max_depth(synthetic_ds):
    cfg = cfg_small(fixed_max_depth=2, mu=20)
    pop = initialize_population(synthetic_ds, cfg, np.random.default_rng(2),
                                _flat_bundle(synthetic_ds.p))
    assert all(ind.hp.max_depth == 2 for ind in pop)


# -- tournament -------------------------------------------------------------------

def _ind(objectives, p=4, seed=0):
    rng = np.random.default_rng(seed)
    g = random_structure(p, rng)
    while not g.selected:
        g = random_structure(p, rng)
    return Individual(HyperparamConfig.default(), g, ObjectiveVector(*objectives), 1)


def test_tournament_rank_wins():
    better = _ind((-0.9, 0.1, 0.1, 0.1), seed=1)
    worse = _ind((-0.5, 0.5, 0.5, 0.5), seed=2)
    for s in range(20):
        assert tournament_select([better, worse], np.random.default_rng(s)) is better


def test_tournament_crowding_breaks_rank_ties():
    # three mutually non-dominated points; the middle one has finite distance
    a = _ind((-0.9, 0.5, 0.1, 0.1), seed=1)
    b = _ind((-0.7, 0.3, 0.1, 0.1), seed=2)
    c = _ind((-0.5, 0.1, 0.1, 0.1), seed=3)
    pop = [a, b, c]
    rank, crowd = rank_and_crowding(pop)
    assert rank == [0, 0, 0]
    assert crowd[1] < crowd[0] and crowd[1] < crowd[2]
    wins_b = 0
    for s in range(300):
        rng = np.random.default_rng(s)
        w = tournament_select(pop, rng)
        wins_b += w is b
    assert wins_b < 100  # b only wins when paired against itself: impossible -> only by coin vs equal


def test_tournament_coin_flip_on_full_tie():
    a = _ind((-0.5, 0.2, 0.2, 0.2), seed=1)
    b = _ind((-0.5, 0.2, 0.2, 0.2), seed=2)
    rng = np.random.default_rng(0)
    wins_a = sum(tournament_select([a, b], rng) is a for _ in range(10_000))
    assert abs(wins_a / 10_000 - 0.5) < 0.02


def test_tournament_excludes_empty_selection():
    from eagga.groupstruct import build
    empty = Individual(HyperparamConfig.default(), build(set(range(4)), []),
                       ObjectiveVector(-0.5, 0, 0, 0), 1)
    good = _ind((-0.6, 0.4, 0.4, 0.4), seed=4)
    with pytest.raises(TooFewEligibleError):
        tournament_select([empty, good], np.random.default_rng(0))


# -- offspring / survival ----------------------------------------------------------

def test_make_offspring_gates_closed_copies():
    rng = np.random.default_rng(5)
    pa = _ind((-0.6, 0.2, 0.2, 0.2), seed=5)
    pb = _ind((-0.7, 0.3, 0.3, 0.3), seed=6)

    class NoGates:
        def random(self):
            return 1.0

    c1, c2 = make_offspring((pa, pb), cfg_small(), NoGates())
    assert c1.hp == pa.hp and c1.g == pa.g
    assert c2.hp == pb.hp and c2.g == pb.g
    assert not c1.evaluated and not c2.evaluated


def test_make_offspring_no_cross_mut_structure_passthrough():
    rng = np.random.default_rng(6)
    cfg = cfg_small(no_gga_crossover=True, no_gga_mutation=True)
    for _ in range(200):
        pa = _ind((-0.6, 0.2, 0.2, 0.2), seed=int(rng.integers(1000)))
        pb = _ind((-0.7, 0.3, 0.3, 0.3), seed=int(rng.integers(1000)))
        c1, c2 = make_offspring((pa, pb), cfg, rng)
        assert c1.g in (pa.g, pb.g) and c2.g in (pa.g, pb.g)


def test_make_offspring_structures_valid():
    rng = np.random.default_rng(7)
    p = 6
    for _ in range(1000):
        pa = _ind((-0.6, 0.2, 0.2, 0.2), p, seed=int(rng.integers(10_000)))
        pb = _ind((-0.7, 0.3, 0.3, 0.3), p, seed=int(rng.integers(10_000)))
        c1, c2 = make_offspring((pa, pb), cfg_small(), rng)
        assert validate(c1.g, p) == [] and validate(c2.g, p) == []


def test_survival_population_unchanged_without_offspring():
    pop = [_ind((-0.9, 0.1, 0.1, 0.1), seed=1), _ind((-0.5, 0.5, 0.5, 0.5), seed=2)]
    out = survival(list(pop), 2)
    assert set(id(i) for i in out) == set(id(i) for i in pop)


def test_survival_rank_then_distance():
    a = _ind((-0.9, 0.1, 0.1, 0.1), seed=1)   # front 0
    b = _ind((-0.8, 0.2, 0.2, 0.2), seed=2)   # dominated by a
    c = _ind((-0.7, 0.05, 0.3, 0.3), seed=3)  # front 0 (trade-off with a)
    out = survival([a, b, c], 2)
    assert a in out and c in out and b not in out


def test_survival_keeps_whole_first_front():
    front0 = [_ind((-0.9 + 0.1 * k, 0.5 - 0.1 * k, 0.2, 0.2), seed=k) for k in range(4)]
    filler = [_ind((-0.1, 0.9, 0.9, 0.9), seed=10 + k) for k in range(4)]
    out = survival(front0 + filler, 6)
    assert all(f in out for f in front0)


# -- run ----------------------------------------------------------------------------

@pytest.fixture(scope="module")
def small_ds():
    return make_synthetic(n=200, p=6, seed=99)


def test_run_budget_equals_mu_is_initial_archive(small_ds):
    cfg = RunConfig(mu=8, nu=4, seed=3, max_evaluations=8)
    res = run(small_ds, cfg)
    assert res.eval_count == 8
    assert len(res.hv_trace) == 8
    assert [idx for idx, _ in res.hv_trace] == list(range(1, 9))


def test_run_deterministic(small_ds):
    cfg = RunConfig(mu=6, nu=3, seed=11, max_evaluations=21)
    r1 = run(small_ds, cfg)
    r2 = run(small_ds, cfg)
    assert r1.hv_trace == r2.hv_trace
    assert [tuple(e.objectives) for e in r1.archive.entries] == \
           [tuple(e.objectives) for e in r2.archive.entries]
    assert [r.structure for r in r1.eval_log] == [r.structure for r in r2.eval_log]


def test_run_hv_trace_anchored_and_monotone(small_ds):
    cfg = RunConfig(mu=6, nu=3, seed=4, max_evaluations=24)
    res = run(small_ds, cfg)
    values = [hv for _, hv in res.hv_trace]
    assert all(v >= 0.5 for v in values)
    assert all(a <= b for a, b in zip(values, values[1:]))
    # archive contains the featureless anchor
    assert any(tuple(e.objectives) == (-0.5, 0.0, 0.0, 0.0) for e in res.archive.entries)


def test_run_feedback_tightening_logged(small_ds):
    cfg = RunConfig(mu=6, nu=3, seed=5, max_evaluations=18)
    res = run(small_ds, cfg)
    for rec in res.eval_log:
        g = parse_structure(rec.structure)
        assert validate(g, small_ds.p) == []


def test_run_no_cross_mut_structures_tighten_initials(small_ds):
    cfg = RunConfig(mu=6, nu=3, seed=6, max_evaluations=30,
                    no_gga_crossover=True, no_gga_mutation=True)
    res = run(small_ds, cfg)
    initials = [parse_structure(r.structure) for r in res.eval_log[: cfg.mu]]
    # with both structure operators off, every structure ever evaluated is a
    # tightening (by the feedback loop) of some initialization structure
    for rec in res.eval_log[cfg.mu:]:
        g = parse_structure(rec.structure)
        assert any(
            g.selected <= init.selected
            and g.within_group_pairs() <= init.within_group_pairs()
            for init in initials
        )


def test_run_random_search_flavor(small_ds):
    cfg = RunConfig(mu=6, nu=3, seed=7, max_evaluations=20, random_search=True)
    res = run(small_ds, cfg)
    assert res.eval_count == 20
    values = [hv for _, hv in res.hv_trace]
    assert all(v >= 0.5 for v in values)


def test_run_workers_match_single_thread(small_ds):
    cfg1 = RunConfig(mu=6, nu=3, seed=8, max_evaluations=15, workers=1)
    cfg2 = RunConfig(mu=6, nu=3, seed=8, max_evaluations=15, workers=3)
    r1 = run(small_ds, cfg1)
    r2 = run(small_ds, cfg2)
    assert r1.hv_trace == r2.hv_trace


def test_run_budget_required():
    with pytest.raises(BudgetZeroError):
        RunConfig(mu=4, nu=2, seed=0).validate()


def test_run_test_front_aligned(small_ds):
    cfg = RunConfig(mu=6, nu=3, seed=9, max_evaluations=12)
    res = run(small_ds, cfg)
    assert len(res.test_front) == len(res.archive.entries)
    by_idx = {t.eval_index for t in res.test_front}
    assert by_idx == {e.eval_index for e in res.archive.entries}
    for t in res.test_front:
        assert 0.0 <= t.auc <= 1.0
        assert 0.0 <= t.nf <= 1.0
