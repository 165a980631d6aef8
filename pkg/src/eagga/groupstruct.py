"""Feature group structures and the grouping-genetic operators on them.

A group structure partitions the feature indices {0..p-1} into an
"unselected" set plus interaction groups. Features inside one group are
allowed to interact in a model; each group carries a monotonicity attribute
shared by all its members. Crossover injects whole groups between parents,
mutation reassigns individual feature indices, and the model-feedback update
tightens a structure to what a fitted model actually used.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping

import numpy as np


class Monotonicity(Enum):
    UNCONSTRAINED = "UNC"
    INCREASING = "INC"


class PairOutsideSelectionError(Exception):
    pass


class PairCrossesGroupsError(Exception):
    """A realized interaction pair spans two groups: the learner violated its constraints."""


@dataclass(frozen=True)
class Group:
    """One interaction equivalence class with its monotonicity attribute."""

    members: frozenset
    monotonicity: Monotonicity = Monotonicity.UNCONSTRAINED

    def __post_init__(self):
        object.__setattr__(self, "members", frozenset(int(i) for i in self.members))


@dataclass(frozen=True)
class GroupStructure:
    """Partition of feature indices: unselected set + attributed groups.

    Groups are kept in canonical order (sorted by smallest member) and never
    empty; use :func:`build` to normalize raw parts.
    """

    unselected: frozenset
    groups: tuple

    def __post_init__(self):
        object.__setattr__(self, "unselected", frozenset(int(i) for i in self.unselected))
        object.__setattr__(self, "groups", tuple(self.groups))

    @property
    def selected(self) -> frozenset:
        out = frozenset()
        for g in self.groups:
            out |= g.members
        return out

    def group_of(self, feature: int):
        for g in self.groups:
            if feature in g.members:
                return g
        return None

    def attribute_of(self, feature: int):
        g = self.group_of(feature)
        return None if g is None else g.monotonicity

    def within_group_pairs(self) -> set:
        """All unordered pairs of features allowed to interact."""
        pairs = set()
        for g in self.groups:
            mem = sorted(g.members)
            for i in range(len(mem)):
                for j in range(i + 1, len(mem)):
                    pairs.add((mem[i], mem[j]))
        return pairs


def build(unselected: Iterable[int], groups: Iterable[Group]) -> GroupStructure:
    """Normalize: drop empty groups, sort by smallest member, freeze."""
    kept = [g for g in groups if g.members]
    kept.sort(key=lambda g: min(g.members))
    return GroupStructure(frozenset(unselected), tuple(kept))


def validate(g: GroupStructure, p: int) -> list:
    """Return every violated partition invariant (empty list when valid)."""
    violations = []
    seen = {}
    parts = [("unselected", g.unselected)] + [
        (f"group {k}", grp.members) for k, grp in enumerate(g.groups)
    ]
    for name, members in parts:
        if name != "unselected" and not members:
            violations.append(f"{name} is empty")
        for i in members:
            if not 0 <= i < p:
                violations.append(f"index {i} in {name} out of range [0, {p})")
            elif i in seen:
                violations.append(f"index {i} duplicated in {seen[i]} and {name}")
            else:
                seen[i] = name
    for i in range(p):
        if i not in seen:
            violations.append(f"index {i} unassigned")
    return violations


class _UnionFind:
    def __init__(self, nodes):
        self.parent = {n: n for n in nodes}

    def find(self, a):
        root = a
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[a] != root:
            self.parent[a], a = root, self.parent[a]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def connected_components(nodes: Iterable[int], pairs: Iterable[tuple]) -> list:
    """Components of the reflexive-symmetric-transitive closure, sorted by smallest member."""
    nodes = sorted(set(int(n) for n in nodes))
    uf = _UnionFind(nodes)
    for a, b in pairs:
        uf.union(int(a), int(b))
    comps = {}
    for n in nodes:
        comps.setdefault(uf.find(n), set()).add(n)
    return [frozenset(c) for _, c in sorted(comps.items())]


def from_pairs(p, selected, pairs, attributes=None) -> GroupStructure:
    """Build a structure whose groups are the equivalence classes of `pairs`.

    `pairs` is a set of unordered index pairs within `selected`; the groups
    are the connected components of the induced graph (singletons included).
    `attributes` maps a component (frozenset) to its monotonicity, either as
    a mapping or a callable; components are visited in canonical order.
    """
    selected = set(int(i) for i in selected)
    for a, b in pairs:
        if a not in selected or b not in selected:
            raise PairOutsideSelectionError(f"pair ({a}, {b}) not within the selected set")
    comps = connected_components(selected, pairs)
    if attributes is None:
        attr_of = lambda members: Monotonicity.UNCONSTRAINED
    elif isinstance(attributes, Mapping):
        attr_of = lambda members: attributes.get(members, Monotonicity.UNCONSTRAINED)
    else:
        attr_of = attributes
    groups = [Group(c, attr_of(c)) for c in comps]
    return build(set(range(p)) - selected, groups)


# ---------------------------------------------------------------------------
# grouping-genetic operators

def _items(g: GroupStructure) -> list:
    # item 0 is the unselected set, remaining items are the groups
    return [("unsel", g.unselected)] + [("group", grp) for grp in g.groups]


def _inject(recipient: GroupStructure, section: list) -> GroupStructure:
    """Insert donor items into the recipient, then drop duplicated indices
    from the recipient's own parts (the injected copies win)."""
    injected_idx = set()
    injected_groups = []
    injected_unsel = set()
    for kind, payload in section:
        if kind == "unsel":
            injected_unsel |= payload
            injected_idx |= payload
        else:
            injected_groups.append(payload)
            injected_idx |= payload.members
    unselected = (recipient.unselected - injected_idx) | injected_unsel
    groups = list(injected_groups)
    for grp in recipient.groups:
        remaining = grp.members - injected_idx
        if remaining:
            groups.append(Group(remaining, grp.monotonicity))
    return build(unselected, groups)


def crossover_at(a: GroupStructure, b: GroupStructure, sites_a: tuple, sites_b: tuple):
    """Deterministic crossover given the two crossing sites of each parent."""
    items_a, items_b = _items(a), _items(b)
    ia, ja = sorted(sites_a)
    ib, jb = sorted(sites_b)
    section_a = items_a[ia:ja]
    section_b = items_b[ib:jb]
    child1 = _inject(b, section_a)
    child2 = _inject(a, section_b)
    return child1, child2


def gga_crossover(a: GroupStructure, b: GroupStructure, rng):
    """Falkenauer-style group crossover.

    Two crossing sites are drawn uniformly without replacement over each
    parent's group-list boundaries (the unselected set counts as position
    0's group). The first parent's crossing section is injected into the
    second parent and duplicated feature indices are removed from the old
    groups; the second child swaps the parent roles. Injected groups keep
    their monotonicity attributes; an injected unselected set merges into
    the child's unselected set.
    """
    sites_a = tuple(rng.choice(len(a.groups) + 2, size=2, replace=False))
    sites_b = tuple(rng.choice(len(b.groups) + 2, size=2, replace=False))
    return crossover_at(a, b, sites_a, sites_b)


def gga_mutate(g: GroupStructure, rng, p_move: float = 0.2, p_attr: float = 0.2) -> GroupStructure:
    """Reassign each feature index with probability `p_move` to a uniformly
    chosen destination among the unselected set, the existing groups, and a
    fresh singleton group; then resample each surviving group's attribute
    with probability `p_attr` uniformly over {UNCONSTRAINED, INCREASING}."""
    old_groups = list(g.groups)
    k = len(old_groups)
    members = [set() for _ in range(k)]
    for gi, grp in enumerate(old_groups):
        members[gi] = set(grp.members)
    unselected = set(g.unselected)
    fresh = []
    p_total = len(g.unselected) + sum(len(grp.members) for grp in old_groups)
    for i in range(p_total):
        if rng.random() >= p_move:
            continue
        # destination 0 = unselected, 1..k = existing groups, k+1 = fresh singleton
        dest = int(rng.integers(0, k + 2))
        unselected.discard(i)
        for m in members:
            m.discard(i)
        if dest == 0:
            unselected.add(i)
        elif dest <= k:
            members[dest - 1].add(i)
        else:
            fresh.append(i)
    groups = [
        Group(frozenset(m), old_groups[gi].monotonicity)
        for gi, m in enumerate(members)
        if m
    ]
    groups += [Group(frozenset([i])) for i in fresh]
    out = build(unselected, groups)
    resampled = []
    for grp in out.groups:
        attr = grp.monotonicity
        if rng.random() < p_attr:
            attr = Monotonicity.INCREASING if rng.integers(0, 2) == 1 else Monotonicity.UNCONSTRAINED
        resampled.append(Group(grp.members, attr))
    return build(out.unselected, resampled)


# ---------------------------------------------------------------------------
# constraint derivation and model feedback

@dataclass(frozen=True)
class ConstraintSet:
    """Learner-facing view: selection mask, interaction groups, monotone mask."""

    selected_mask: np.ndarray
    interaction_groups: tuple
    monotone_mask: np.ndarray

    def __post_init__(self):
        sel = np.asarray(self.selected_mask, dtype=bool)
        mono = np.asarray(self.monotone_mask, dtype=np.int8)
        sel.flags.writeable = False
        mono.flags.writeable = False
        object.__setattr__(self, "selected_mask", sel)
        object.__setattr__(self, "monotone_mask", mono)
        object.__setattr__(
            self, "interaction_groups", tuple(frozenset(g) for g in self.interaction_groups)
        )


def to_constraints(g: GroupStructure, p: int) -> ConstraintSet:
    """Translate a structure into the masks the learner consumes."""
    selected = np.zeros(p, dtype=bool)
    monotone = np.zeros(p, dtype=np.int8)
    groups = []
    for grp in g.groups:
        mem = sorted(grp.members)
        groups.append(frozenset(mem))
        for i in mem:
            selected[i] = True
            if grp.monotonicity is Monotonicity.INCREASING:
                monotone[i] = 1
    return ConstraintSet(selected, tuple(groups), monotone)


def update_from_model(g: GroupStructure, used, realized_pairs) -> GroupStructure:
    """Tighten a structure to the features and interactions a model realized.

    The new groups are the transitive closure of the realized pairs over the
    used features; each inherits the attribute of the (unique) old group
    containing its members. Selected-but-unused features become unselected.
    The group structure only imposes an upper constraint, so `used` must lie
    within the selection and every realized pair within a single group.
    """
    used = set(int(i) for i in used)
    selected = g.selected
    if not used <= selected:
        raise PairCrossesGroupsError(
            f"model used features outside the selection: {sorted(used - selected)}"
        )
    for a, b in realized_pairs:
        ga, gb = g.group_of(a), g.group_of(b)
        if ga is None or gb is None or ga is not gb:
            raise PairCrossesGroupsError(f"realized pair ({a}, {b}) crosses groups")
    p = len(g.unselected) + sum(len(grp.members) for grp in g.groups)

    def inherit(members):
        return g.group_of(next(iter(members))).monotonicity

    return from_pairs(p, used, set(realized_pairs), attributes=inherit)


# ---------------------------------------------------------------------------
# canonical textual form

def format_structure(g: GroupStructure) -> str:
    """Canonical string: `unselected:[i,...];group:[i,...]:INC|UNC;...`."""
    parts = ["unselected:[%s]" % ",".join(str(i) for i in sorted(g.unselected))]
    for grp in g.groups:
        idx = ",".join(str(i) for i in sorted(grp.members))
        parts.append(f"group:[{idx}]:{grp.monotonicity.value}")
    return ";".join(parts)


def parse_structure(text: str) -> GroupStructure:
    """Inverse of :func:`format_structure`; validates the partition."""
    parts = text.strip().split(";")
    if not parts or not parts[0].startswith("unselected:["):
        raise ValueError(f"malformed structure string: {text!r}")

    def parse_indices(blob):
        blob = blob.strip()
        if not (blob.startswith("[") and blob.endswith("]")):
            raise ValueError(f"malformed index list: {blob!r}")
        inner = blob[1:-1].strip()
        return frozenset(int(t) for t in inner.split(",")) if inner else frozenset()

    unselected = parse_indices(parts[0][len("unselected:"):])
    groups = []
    for part in parts[1:]:
        if not part.startswith("group:"):
            raise ValueError(f"malformed group entry: {part!r}")
        body = part[len("group:"):]
        close = body.rindex("]")
        members = parse_indices(body[: close + 1])
        attr = body[close + 2:]
        groups.append(Group(members, Monotonicity(attr)))
    g = build(unselected, groups)
    p = len(g.unselected) + sum(len(grp.members) for grp in g.groups)
    problems = validate(g, p)
    if problems:
        raise ValueError(f"structure string violates the partition invariant: {problems}")
    return g
