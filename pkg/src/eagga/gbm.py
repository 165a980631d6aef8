"""Gradient-boosted regression trees for binary classification under
feature-selection, interaction-group, and monotonicity constraints.

Second-order boosting on the logistic loss: per observation g = sigma(yhat) - y
and h = sigma(yhat)(1 - sigma(yhat)); leaf weights and split gains use
L2/L1-regularized Newton steps with L1 handled by soft-thresholding of
gradient sums. Split finding is exact greedy over presorted values with
candidate thresholds at midpoints between consecutive distinct values; ties
in gain resolve to the lower feature index, then the lower threshold. Trees
honor the interaction rule (any split below the root is restricted to the
root feature's group) and monotone splits propagate leaf-value bounds, so
fitted models are introspectable and provably constraint-respecting.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, fields as dc_fields

import numpy as np
from scipy.special import expit

from . import _tree
from .data import Dataset
from .groupstruct import ConstraintSet


class InvalidConstraintError(Exception):
    pass


class DimensionMismatchError(Exception):
    pass


@dataclass(frozen=True)
class ParamRange:
    lo: float
    hi: float
    log: bool = False
    integer: bool = False

    def to_unit(self, v: float) -> float:
        if self.log:
            return (math.log(v) - math.log(self.lo)) / (math.log(self.hi) - math.log(self.lo))
        return (v - self.lo) / (self.hi - self.lo)

    def from_unit(self, u: float) -> float:
        u = min(1.0, max(0.0, u))
        if self.log:
            v = math.exp(math.log(self.lo) + u * (math.log(self.hi) - math.log(self.lo)))
        else:
            v = self.lo + u * (self.hi - self.lo)
        if self.integer:
            v = int(min(self.hi, max(self.lo, math.floor(v + 0.5))))
        return v

    def contains(self, v: float) -> bool:
        if self.integer and v != int(v):
            return False
        return self.lo <= v <= self.hi


PARAM_RANGES = {
    "nrounds": ParamRange(1, 5000, log=True, integer=True),
    "eta": ParamRange(1e-4, 1.0, log=True),
    "reg_lambda": ParamRange(1e-4, 1000.0, log=True),
    "gamma": ParamRange(1e-4, 7.0, log=True),
    "reg_alpha": ParamRange(1e-4, 1000.0, log=True),
    "subsample": ParamRange(0.1, 1.0),
    "max_depth": ParamRange(1, 20, integer=True),
    "min_child_weight": ParamRange(1.0, 150.0, log=True),
    "colsample_bytree": ParamRange(0.01, 1.0),
    "colsample_bylevel": ParamRange(0.01, 1.0),
}


@dataclass(frozen=True)
class HyperparamConfig:
    """The learner's native configuration; every field lives in a closed
    range, log-scaled where flagged in PARAM_RANGES."""

    nrounds: int = 100
    eta: float = 0.3
    reg_lambda: float = 1.0
    gamma: float = 1e-4
    reg_alpha: float = 1e-4
    subsample: float = 1.0
    max_depth: int = 6
    min_child_weight: float = math.e
    colsample_bytree: float = 1.0
    colsample_bylevel: float = 1.0

    def validate(self):
        for f in dc_fields(self):
            v = getattr(self, f.name)
            if not PARAM_RANGES[f.name].contains(v):
                raise ValueError(f"hyperparameter {f.name}={v} outside its range")

    def replace(self, **kw) -> "HyperparamConfig":
        d = self.as_dict()
        d.update(kw)
        return HyperparamConfig(**d)

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in dc_fields(self)}

    @classmethod
    def default(cls) -> "HyperparamConfig":
        return cls()


HP_FIELDS = tuple(f.name for f in dc_fields(HyperparamConfig))


@dataclass(frozen=True)
class Tree:
    """One regression tree as flat parallel arrays; feature -1 marks a leaf."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    weight: np.ndarray

    def split_features(self) -> set:
        return set(int(f) for f in self.feature if f >= 0)


@dataclass(frozen=True)
class BoostedModel:
    """Additive ensemble of constrained trees, introspectable for the
    features and interactions it actually realized."""

    trees: tuple
    base_score: float
    constraints: ConstraintSet | None
    shrinkage: float

    def _packed(self):
        if not self.trees:
            return (np.empty(0, np.int64), np.empty(0, np.float64),
                    np.empty(0, np.int64), np.empty(0, np.int64),
                    np.empty(0, np.float64), np.zeros(1, np.int64))
        feat = np.concatenate([t.feature for t in self.trees])
        thr = np.concatenate([t.threshold for t in self.trees])
        left = np.concatenate([t.left for t in self.trees])
        right = np.concatenate([t.right for t in self.trees])
        weight = np.concatenate([t.weight for t in self.trees])
        starts = np.zeros(len(self.trees) + 1, np.int64)
        np.cumsum([t.feature.shape[0] for t in self.trees], out=starts[1:])
        return feat, thr, left, right, weight, starts


def _check_constraints(cs: ConstraintSet, p: int):
    if cs.selected_mask.shape != (p,) or cs.monotone_mask.shape != (p,):
        raise InvalidConstraintError("constraint masks must have length p")
    selected = set(np.flatnonzero(cs.selected_mask).tolist())
    covered = set()
    for grp in cs.interaction_groups:
        for f in grp:
            if not 0 <= f < p:
                raise InvalidConstraintError(f"group feature {f} out of range")
            if f in covered:
                raise InvalidConstraintError(f"feature {f} in two interaction groups")
            covered.add(f)
    if covered != selected:
        raise InvalidConstraintError("interaction groups must cover exactly the selected features")
    if np.any((cs.monotone_mask != 0) & ~cs.selected_mask):
        raise InvalidConstraintError("monotone mask set on an unselected feature")


def _base_score(y: np.ndarray) -> float:
    rate = float(np.mean(y))
    rate = min(max(rate, 1e-12), 1.0 - 1e-12)
    return float(np.clip(math.log(rate / (1.0 - rate)), -10.0, 10.0))


def fit(ds: Dataset, hp: HyperparamConfig, cs: ConstraintSet, rng) -> BoostedModel:
    """Fit a boosted ensemble on the dataset under the given constraints.

    With an empty selection the model is the featureless fallback: zero
    trees, base score at the clamped empirical log-odds.
    """
    hp.validate()
    _check_constraints(cs, ds.p)
    base = _base_score(ds.target)
    selected = np.flatnonzero(cs.selected_mask).astype(np.int64)
    if selected.size == 0:
        return BoostedModel((), base, cs, hp.eta)

    group_id = np.full(ds.p, -1, dtype=np.int64)
    for gi, grp in enumerate(cs.interaction_groups):
        for f in grp:
            group_id[f] = gi
    monotone = (cs.monotone_mask != 0)

    seed = int(rng.integers(1, 2 ** 63))
    feat, thr, left, right, weight, starts = _tree._boost(
        ds.features, ds.target.astype(np.float64),
        int(hp.nrounds), float(hp.eta), float(hp.reg_lambda), float(hp.gamma),
        float(hp.reg_alpha), float(hp.subsample), int(hp.max_depth),
        float(hp.min_child_weight), float(hp.colsample_bytree),
        float(hp.colsample_bylevel), selected, group_id, monotone, base, seed,
    )
    trees = []
    for t in range(starts.shape[0] - 1):
        s, e = starts[t], starts[t + 1]
        trees.append(Tree(feat[s:e], thr[s:e], left[s:e], right[s:e], weight[s:e]))
    return BoostedModel(tuple(trees), base, cs, hp.eta)


def predict_raw(model: BoostedModel, X) -> np.ndarray:
    """Additive log-odds: base score plus the leaf weight of every tree."""
    X = np.ascontiguousarray(np.asarray(X, dtype=np.float64))
    if X.ndim != 2:
        raise DimensionMismatchError("X must be 2-d")
    if model.constraints is not None:
        p = len(model.constraints.selected_mask)
        if X.shape[1] != p:
            raise DimensionMismatchError(f"X has {X.shape[1]} columns, model expects {p}")
    else:
        top = max((int(t.feature.max(initial=-1)) for t in model.trees), default=-1)
        if top >= X.shape[1]:
            raise DimensionMismatchError(
                f"X has {X.shape[1]} columns, model splits on feature {top}")
    if not np.all(np.isfinite(X)):
        raise DimensionMismatchError("X must be finite")
    out = np.full(X.shape[0], model.base_score, dtype=np.float64)
    if model.trees:
        feat, thr, left, right, weight, starts = model._packed()
        _tree._predict_many(X, feat, thr, left, right, weight, starts, out)
    return out


def predict_proba(model: BoostedModel, X) -> np.ndarray:
    return expit(predict_raw(model, X))


def used_features(model: BoostedModel) -> set:
    """Exact set of features appearing in at least one split."""
    out = set()
    for t in model.trees:
        out |= t.split_features()
    return out


def realized_pairs(model: BoostedModel) -> set:
    """Unordered pairs of distinct features co-occurring within one tree."""
    out = set()
    for t in model.trees:
        for a, b in itertools.combinations(sorted(t.split_features()), 2):
            out.add((a, b))
    return out


# ---------------------------------------------------------------------------
# JSON round trip

def _node_dict(tree: Tree, i: int) -> dict:
    if tree.feature[i] < 0:
        return {"weight": float(tree.weight[i])}
    return {
        "feature": int(tree.feature[i]),
        "threshold": float(tree.threshold[i]),
        "left": _node_dict(tree, int(tree.left[i])),
        "right": _node_dict(tree, int(tree.right[i])),
    }


def model_to_dict(model: BoostedModel) -> dict:
    return {
        "base_score": float(model.base_score),
        "eta": float(model.shrinkage),
        "trees": [_node_dict(t, 0) for t in model.trees],
    }


def _flatten_node(node: dict, arrays: list) -> int:
    feat, thr, left, right, weight = arrays
    slot = len(feat)
    if "weight" in node:
        feat.append(-1)
        thr.append(0.0)
        left.append(-1)
        right.append(-1)
        weight.append(float(node["weight"]))
        return slot
    feat.append(int(node["feature"]))
    thr.append(float(node["threshold"]))
    left.append(-1)
    right.append(-1)
    weight.append(0.0)
    left[slot] = _flatten_node(node["left"], arrays)
    right[slot] = _flatten_node(node["right"], arrays)
    return slot


def model_from_dict(d: dict) -> BoostedModel:
    trees = []
    for node in d["trees"]:
        arrays = ([], [], [], [], [])
        _flatten_node(node, arrays)
        trees.append(Tree(
            np.array(arrays[0], dtype=np.int64),
            np.array(arrays[1], dtype=np.float64),
            np.array(arrays[2], dtype=np.int64),
            np.array(arrays[3], dtype=np.int64),
            np.array(arrays[4], dtype=np.float64),
        ))
    return BoostedModel(tuple(trees), float(d["base_score"]), None, float(d["eta"]))
