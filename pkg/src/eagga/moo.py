"""Multi-objective primitives: dominance, sorting, crowding, hypervolume,
and a Pareto archive. Everything minimizes; objective vectors are plain
4-tuples of floats.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence


def dominates(a: Sequence[float], b: Sequence[float]) -> bool:
    """True iff a <= b componentwise with strict improvement somewhere."""
    strict = False
    for x, y in zip(a, b):
        if x > y:
            return False
        if x < y:
            strict = True
    return strict


def nondominated_sort(points: Sequence[Sequence[float]]) -> list:
    """Fast non-dominated sorting (domination counts + dominated sets);
    returns fronts as lists of indices into `points`."""
    n = len(points)
    dominated_by = [[] for _ in range(n)]
    count = [0] * n
    for i in range(n):
        for j in range(i + 1, n):
            if dominates(points[i], points[j]):
                dominated_by[i].append(j)
                count[j] += 1
            elif dominates(points[j], points[i]):
                dominated_by[j].append(i)
                count[i] += 1
    fronts = []
    current = [i for i in range(n) if count[i] == 0]
    while current:
        fronts.append(current)
        nxt = []
        for i in current:
            for j in dominated_by[i]:
                count[j] -= 1
                if count[j] == 0:
                    nxt.append(j)
        current = nxt
    return fronts


def crowding_distance(front: Sequence[Sequence[float]]) -> list:
    """NSGA-II crowding distance within one mutually non-dominated front.

    Per objective the boundary points get +inf and interior points
    accumulate the normalized gap between their neighbors; an objective with
    zero range contributes nothing to interior points.
    """
    n = len(front)
    if n == 0:
        return []
    m = len(front[0])
    dist = [0.0] * n
    for k in range(m):
        order = sorted(range(n), key=lambda i: front[i][k])
        lo = front[order[0]][k]
        hi = front[order[-1]][k]
        dist[order[0]] = float("inf")
        dist[order[-1]] = float("inf")
        span = hi - lo
        if span <= 0:
            continue
        for pos in range(1, n - 1):
            i = order[pos]
            if dist[i] != float("inf"):
                dist[i] += (front[order[pos + 1]][k] - front[order[pos - 1]][k]) / span
    return dist


# ---------------------------------------------------------------------------
# hypervolume: recursive dimension sweep (slice on the last objective, solve
# the 2-d base case by a plane sweep)

def _nondominated(points: list) -> list:
    out = []
    for i, a in enumerate(points):
        if any(dominates(b, a) for b in points) or a in points[:i]:
            continue
        out.append(a)
    return out


def _hv2(points: list, ref0: float, ref1: float) -> float:
    pts = sorted(points)
    total = 0.0
    best1 = ref1
    for x0, x1 in pts:
        if x1 < best1:
            total += (ref0 - x0) * (best1 - x1)
            best1 = x1
    return total


def _hv_recursive(points: list, ref: tuple, cache: dict) -> float:
    d = len(ref)
    if not points:
        return 0.0
    if d == 1:
        return ref[0] - min(x[0] for x in points)
    if d == 2:
        key = tuple(sorted(points))
        got = cache.get(key)
        if got is None:
            got = _hv2(points, ref[0], ref[1])
            cache[key] = got
        return got
    order = sorted(points, key=lambda x: x[-1])
    total = 0.0
    active = []
    i = 0
    n = len(order)
    while i < n:
        z = order[i][-1]
        while i < n and order[i][-1] == z:
            active.append(order[i][:-1])
            i += 1
        upper = order[i][-1] if i < n else ref[-1]
        if upper > z:
            slab = _nondominated(active)
            total += (upper - z) * _hv_recursive(slab, ref[:-1], cache)
    return total


def hypervolume(points: Sequence[Sequence[float]], ref: Sequence[float] = (0.0, 1.0, 1.0, 1.0)) -> float:
    """Lebesgue measure of the union of boxes [point, ref].

    Points beyond the reference in some dimension are clipped to it (their
    box then has zero measure there); dominated and duplicate points are
    filtered since they do not change the union.
    """
    ref = tuple(float(r) for r in ref)
    clipped = []
    for pt in points:
        q = tuple(min(float(v), r) for v, r in zip(pt, ref))
        if all(v < r for v, r in zip(q, ref)):
            clipped.append(q)
    return _hv_recursive(_nondominated(clipped), ref, {})


# ---------------------------------------------------------------------------
# archive

@dataclass
class ArchiveEntry:
    objectives: tuple
    hp: object
    groups: object
    eval_index: int


@dataclass
class ParetoArchive:
    """Mutually non-dominated entries; insertion evicts newly dominated
    incumbents and rejects duplicates (the earliest eval_index wins)."""

    entries: list = field(default_factory=list)

    def insert(self, entry: ArchiveEntry) -> bool:
        obj = tuple(entry.objectives)
        for e in self.entries:
            if tuple(e.objectives) == obj or dominates(e.objectives, obj):
                return False
        self.entries = [e for e in self.entries if not dominates(obj, e.objectives)]
        self.entries.append(entry)
        return True

    def points(self) -> list:
        return [tuple(e.objectives) for e in self.entries]

    def hypervolume(self, ref: Sequence[float] = (0.0, 1.0, 1.0, 1.0)) -> float:
        return hypervolume(self.points(), ref)


def archive_insert(arch: ParetoArchive, entry: ArchiveEntry):
    """Functional wrapper: returns (archive, accepted flag)."""
    return arch, arch.insert(entry)
