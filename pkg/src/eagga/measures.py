"""The four objectives: AUC plus the interpretability measures NF, NI, NNM.

All three interpretability measures are determined exactly from the fitted
model: NF counts the features appearing in splits, NI counts the transitive
closure of within-tree feature co-occurrences, and NNM counts used features
whose group carries no monotonicity constraint. Everything is normalized to
[0, 1] and minimized jointly with the negated AUC.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np
from scipy.stats import rankdata

from . import gbm
from .data import Dataset, SingleClassError
from .groupstruct import (GroupStructure, Monotonicity, connected_components,
                          to_constraints, update_from_model)


class ObjectiveVector(NamedTuple):
    neg_auc: float
    nf: float
    ni: float
    nnm: float


#: Constant majority-class predictor: AUC 0.5 and no features, interactions,
#: or non-monotone effects.
FEATURELESS_POINT = ObjectiveVector(-0.5, 0.0, 0.0, 0.0)


def auc(labels, scores) -> float:
    """Probability that a random positive outscores a random negative, ties
    counted one half (the rank-statistic form; O(m log m))."""
    y = np.asarray(labels)
    s = np.asarray(scores, dtype=np.float64)
    n_pos = int((y == 1).sum())
    n_neg = int((y == 0).sum())
    if n_pos == 0 or n_neg == 0:
        raise SingleClassError("AUC needs both classes present")
    ranks = rankdata(s)
    return float((ranks[y == 1].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def nf(model: gbm.BoostedModel, p: int) -> float:
    """Relative number of features used in at least one split."""
    return len(gbm.used_features(model)) / p


def ni(model: gbm.BoostedModel, p: int) -> float:
    """Relative number of interacting pairs after transitive closure of the
    within-tree co-occurrence graph."""
    if p < 2:
        return 0.0
    pairs = gbm.realized_pairs(model)
    nodes = set()
    for a, b in pairs:
        nodes.add(a)
        nodes.add(b)
    closed = sum(len(c) * (len(c) - 1) // 2 for c in connected_components(nodes, pairs))
    return closed / (p * (p - 1) / 2)


def nnm(model: gbm.BoostedModel, g: GroupStructure, p: int) -> float:
    """Relative number of used features in unconstrained groups."""
    count = 0
    for j in gbm.used_features(model):
        attr = g.attribute_of(j)
        if attr is None:
            raise ValueError(f"model used feature {j} outside the group structure")
        if attr is Monotonicity.UNCONSTRAINED:
            count += 1
    return count / p


def evaluate_candidate(ds: Dataset, folds: list, hp: gbm.HyperparamConfig,
                       g: GroupStructure, rng):
    """Cross-validated objectives plus the model-feedback structure update.

    neg_auc is the negated mean test-fold AUC over the precomputed folds.
    The interpretability measures come from one final model refit on all of
    `ds`, which is also the model whose used features and realized pairs
    tighten the group structure. An empty selection short-circuits to the
    featureless point with the structure unchanged.
    """
    if not g.selected:
        return FEATURELESS_POINT, g
    cs = to_constraints(g, ds.p)
    fold_seeds = [int(rng.integers(1, 2 ** 63)) for _ in folds]
    final_seed = int(rng.integers(1, 2 ** 63))
    aucs = []
    for split, seed in zip(folds, fold_seeds):
        train = ds.subset(split.train_indices)
        test = ds.subset(split.test_indices)
        model = gbm.fit(train, hp, cs, np.random.default_rng(seed))
        scores = gbm.predict_raw(model, test.features)
        aucs.append(auc(test.target, scores))
    final = gbm.fit(ds, hp, cs, np.random.default_rng(final_seed))
    objectives = ObjectiveVector(
        -float(np.mean(aucs)),
        nf(final, ds.p),
        ni(final, ds.p),
        nnm(final, g, ds.p),
    )
    updated = update_from_model(g, gbm.used_features(final), gbm.realized_pairs(final))
    return objectives, updated
