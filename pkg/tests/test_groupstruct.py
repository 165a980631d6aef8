import numpy as np
import pytest

from eagga.groupstruct import (Group, GroupStructure, Monotonicity,
                               PairCrossesGroupsError, PairOutsideSelectionError,
                               build, crossover_at, format_structure, from_pairs,
                               gga_crossover, gga_mutate, parse_structure,
                               to_constraints, update_from_model, validate)
from conftest import random_structure
from oracles import floyd_warshall_components

INC = Monotonicity.INCREASING
UNC = Monotonicity.UNCONSTRAINED


def G(members, attr=UNC):
    return Group(frozenset(members), attr)


def all_indices(g):
    out = list(g.unselected)
    for grp in g.groups:
        out.extend(grp.members)
    return sorted(out)


# -- validate ---------------------------------------------------------------

def test_validate_ok():
    g = build({0}, [G({1, 2}, INC), G({3}, UNC)])
    assert validate(g, 4) == []


def test_validate_overlap():
    g = GroupStructure(frozenset({0}), (G({1, 2}, INC), G({2, 3}, UNC)))
    assert any("duplicated" in v for v in validate(g, 4))


def test_validate_unassigned():
    g = GroupStructure(frozenset(), (G({0, 1, 2}),))
    assert any("index 3 unassigned" in v for v in validate(g, 4))


def test_validate_out_of_range_and_empty():
    g = GroupStructure(frozenset({0}), (G({1, 7}), GroupStructure(frozenset(), ()).groups or G({2}),))
    g = GroupStructure(frozenset({0}), (G({1, 7}), Group(frozenset(), UNC)))
    out = validate(g, 3)
    assert any("out of range" in v for v in out)
    assert any("is empty" in v for v in out)


# -- from_pairs -------------------------------------------------------------

def test_from_pairs_chain():
    g = from_pairs(5, {0, 1, 2, 3}, {(0, 1), (1, 2)})
    assert g.unselected == {4}
    assert [sorted(grp.members) for grp in g.groups] == [[0, 1, 2], [3]]


def test_from_pairs_empty_relation():
    g = from_pairs(3, {0, 1, 2}, set())
    assert len(g.groups) == 3
    assert all(len(grp.members) == 1 for grp in g.groups)


def test_from_pairs_matches_floyd_warshall():
    g = from_pairs(6, set(range(6)), {(0, 1), (2, 3), (3, 4)})
    expected = floyd_warshall_components(6, set(range(6)), {(0, 1), (2, 3), (3, 4)})
    assert [grp.members for grp in g.groups] == expected


def test_from_pairs_random_vs_oracle():
    rng = np.random.default_rng(11)
    for _ in range(60):
        p = int(rng.integers(2, 11))
        sel = set(int(i) for i in rng.choice(p, size=rng.integers(1, p + 1), replace=False))
        sel_list = sorted(sel)
        pairs = set()
        for _ in range(rng.integers(0, 2 * p)):
            a, b = rng.choice(sel_list, size=2, replace=True)
            if a != b:
                pairs.add((min(int(a), int(b)), max(int(a), int(b))))
        g = from_pairs(p, sel, pairs)
        assert [grp.members for grp in g.groups] == floyd_warshall_components(p, sel, pairs)


def test_from_pairs_outside_selection():
    with pytest.raises(PairOutsideSelectionError):
        from_pairs(4, {0, 1}, {(1, 2)})


# -- crossover --------------------------------------------------------------

def test_crossover_worked_example():
    # parents G1 G2 | G3 | G4 and H1 | H2 H3 | H4 H5 with
    # H3 = ({1,2,3}, UNC) and the injected G3 = ({3}, INC)
    a = build({0}, [G({1, 2}, UNC), G({3}, INC), G({4, 5, 6, 7}, UNC)])
    b = build({4}, [G({0}, UNC), G({1, 2, 3}, UNC), G({5, 6}, INC), G({7}, UNC)])
    child1, _ = crossover_at(a, b, (2, 3), (1, 3))
    got = {(tuple(sorted(grp.members)), grp.monotonicity) for grp in child1.groups}
    assert ((3,), INC) in got          # injected group survives with its attribute
    assert ((1, 2), UNC) in got        # H3 lost the duplicated index
    assert validate(child1, 8) == []


def test_crossover_identical_parents_idempotent():
    rng = np.random.default_rng(5)
    for _ in range(200):
        g = random_structure(8, rng)
        c1, c2 = gga_crossover(g, g, rng)
        assert c1 == g and c2 == g


def test_crossover_property_valid_partitions():
    rng = np.random.default_rng(17)
    p = 12
    for _ in range(2000):
        a = random_structure(p, rng)
        b = random_structure(p, rng)
        c1, c2 = gga_crossover(a, b, rng)
        assert validate(c1, p) == []
        assert validate(c2, p) == []
        assert all_indices(c1) == list(range(p))
        assert all_indices(c2) == list(range(p))


def test_crossover_unselected_injection():
    a = build({0, 1}, [G({2, 3}, INC)])
    b = build(set(), [G({0, 2}, UNC), G({1, 3}, UNC)])
    # inject a's unselected item (position 0..1) into b
    c1, _ = crossover_at(a, b, (0, 1), (0, 0))
    assert {0, 1} <= c1.unselected
    assert validate(c1, 4) == []


# -- mutate -----------------------------------------------------------------

def test_mutate_zero_probability_identity():
    rng = np.random.default_rng(0)
    g = build({0}, [G({1, 2}, INC), G({3}, UNC)])
    assert gga_mutate(g, rng, p_move=0.0, p_attr=0.0) == g


class ForceUnselected:
    """rng stub: always move, destination always the unselected set."""

    def random(self):
        return 0.0

    def integers(self, lo, hi):
        return lo


def test_mutate_forced_all_unselected():
    g = build({0}, [G({1, 2}, INC), G({3}, UNC)])
    out = gga_mutate(g, ForceUnselected(), p_move=1.0, p_attr=0.0)
    assert out.unselected == {0, 1, 2, 3}
    assert out.groups == ()


def test_mutate_property_valid():
    rng = np.random.default_rng(23)
    p = 12
    for _ in range(2000):
        g = random_structure(p, rng)
        out = gga_mutate(g, rng)
        assert validate(out, p) == []
        assert all_indices(out) == list(range(p))


# -- constraints ------------------------------------------------------------

def test_to_constraints_basic():
    g = build({0}, [G({1, 2}, INC)])
    cs = to_constraints(g, 3)
    assert cs.selected_mask.tolist() == [False, True, True]
    assert cs.interaction_groups == (frozenset({1, 2}),)
    assert cs.monotone_mask.tolist() == [0, 1, 1]


def test_to_constraints_empty():
    cs = to_constraints(build({0, 1}, []), 2)
    assert not cs.selected_mask.any()
    assert cs.interaction_groups == ()


def test_to_constraints_mixed():
    g = build(set(), [G({0}, UNC), G({1}, INC)])
    assert to_constraints(g, 2).monotone_mask.tolist() == [0, 1]


# -- feedback update --------------------------------------------------------

def test_update_tightens():
    g = build({3}, [G({0, 1, 2}, INC)])
    out = update_from_model(g, {0, 1}, {(0, 1)})
    assert out.unselected == {2, 3}
    assert [(sorted(grp.members), grp.monotonicity) for grp in out.groups] == [([0, 1], INC)]


def test_update_fixed_point():
    g = build({4}, [G({0, 1}, INC), G({2, 3}, UNC)])
    out = update_from_model(g, {0, 1, 2, 3}, {(0, 1), (2, 3)})
    assert out == g


def test_update_splits_group_inheriting_attr():
    g = build(set(), [G({0, 1, 2}, INC)])
    out = update_from_model(g, {0, 1, 2}, {(0, 1)})
    assert [sorted(grp.members) for grp in out.groups] == [[0, 1], [2]]
    assert all(grp.monotonicity is INC for grp in out.groups)


def test_update_rejects_cross_group_pair():
    g = build(set(), [G({0, 1}, UNC), G({2}, UNC)])
    with pytest.raises(PairCrossesGroupsError):
        update_from_model(g, {0, 2}, {(0, 2)})


def test_update_monotone_tightening_property():
    rng = np.random.default_rng(31)
    for _ in range(300):
        p = 9
        g = random_structure(p, rng)
        sel = sorted(g.selected)
        if not sel:
            continue
        used = set(int(i) for i in rng.choice(sel, size=rng.integers(0, len(sel) + 1), replace=False))
        pairs = {pair for pair in g.within_group_pairs()
                 if pair[0] in used and pair[1] in used and rng.random() < 0.5}
        out = update_from_model(g, used, pairs)
        assert validate(out, p) == []
        assert out.selected <= g.selected
        assert out.within_group_pairs() <= g.within_group_pairs()


# -- canonical text ---------------------------------------------------------

def test_format_and_parse_round_trip():
    rng = np.random.default_rng(41)
    for _ in range(200):
        g = random_structure(7, rng)
        assert parse_structure(format_structure(g)) == g


def test_format_example():
    g = build({0, 4}, [G({1, 2}, INC), G({3}, UNC)])
    assert format_structure(g) == "unselected:[0,4];group:[1,2]:INC;group:[3]:UNC"
