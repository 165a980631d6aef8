"""Detectors that seed the initial population's group structures.

Three cheap screens over the training data: an entropy-based information
gain filter for feature importance, a FAST-style residual-sum-of-squares
scan for pairwise interaction strength, and a Spearman-correlation probe for
the direction and strength of monotone effects. Their outputs bias the
sampling of initial group structures toward plausible selections, groupings,
and monotonicity attributes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import spearmanr

from . import _tree
from .data import Dataset
from .groupstruct import GroupStructure, Monotonicity, from_pairs


@dataclass(frozen=True)
class FilterScores:
    scores: np.ndarray  # length p, nonnegative information gain in bits


@dataclass(frozen=True)
class InteractionScores:
    matrix: np.ndarray  # p x p, symmetric, zero diagonal, nonnegative


@dataclass(frozen=True)
class MonotonicityScores:
    signed: np.ndarray       # length p, average Spearman rho in [-1, 1]
    probability: np.ndarray  # 0.2 + 0.6*|signed|, in [0.2, 0.8]
    sign: np.ndarray         # +1 where signed >= 0 else -1


def equal_frequency_bins(x: np.ndarray, n_bins: int):
    """Bin assignments from deduplicated quantile edges.

    Values equal to an edge fall into the lower bin; a constant column gets
    a single bin.
    """
    edges = np.unique(np.quantile(x, np.arange(1, n_bins) / n_bins))
    return np.searchsorted(edges, x, side="left"), edges.size + 1


def _entropy_bits(counts: np.ndarray) -> float:
    total = counts.sum()
    if total == 0:
        return 0.0
    pr = counts[counts > 0] / total
    return float(-(pr * np.log2(pr)).sum())


def information_gain(ds: Dataset, n_bins: int = 10) -> FilterScores:
    """Per feature: H(y) - H(y | equal-frequency bin of the feature), in bits."""
    if n_bins < 2:
        raise ValueError("n_bins must be >= 2")
    y = ds.target
    h_y = _entropy_bits(np.bincount(y, minlength=2))
    scores = np.empty(ds.p)
    for j in range(ds.p):
        bins, nb = equal_frequency_bins(ds.features[:, j], n_bins)
        h_cond = 0.0
        for b in range(nb):
            mask = bins == b
            nb_count = int(mask.sum())
            if nb_count == 0:
                continue
            h_cond += (nb_count / ds.n) * _entropy_bits(np.bincount(y[mask], minlength=2))
        scores[j] = max(0.0, h_y - h_cond)
    return FilterScores(scores)


def _backfit_main_effects(binned, bin_counts, y, passes: int = 3) -> np.ndarray:
    """Residuals of a cyclic equal-frequency-bin mean predictor (a cheap
    backfitting GAM surrogate)."""
    n = y.shape[0]
    offset = float(y.mean())
    effects = [np.zeros(nb) for nb in bin_counts]
    fitted = np.full(n, offset)
    for _ in range(passes):
        for j, bins in enumerate(binned):
            partial = y - (fitted - effects[j][bins])
            sums = np.bincount(bins, weights=partial, minlength=bin_counts[j])
            counts = np.bincount(bins, minlength=bin_counts[j])
            new = np.where(counts > 0, sums / np.maximum(counts, 1), 0.0)
            fitted += new[bins] - effects[j][bins]
            effects[j] = new
    return y - fitted


def _best_quadrant_fit(S: np.ndarray, N: np.ndarray) -> float:
    """Max over axis-aligned split pairs of sum_q S_q^2 / N_q, i.e. the RSS
    drop of the best two-way interaction split on a residual histogram."""
    nb_j, nb_k = S.shape
    if nb_j < 2 or nb_k < 2:
        return 0.0
    PS = S.cumsum(axis=0).cumsum(axis=1)
    PN = N.cumsum(axis=0).cumsum(axis=1)
    tot_s, tot_n = PS[-1, -1], PN[-1, -1]
    A_s = PS[:-1, :-1]
    A_n = PN[:-1, :-1]
    B_s = PS[:-1, -1][:, None] - A_s
    B_n = PN[:-1, -1][:, None] - A_n
    C_s = PS[-1, :-1][None, :] - A_s
    C_n = PN[-1, :-1][None, :] - A_n
    D_s = tot_s - A_s - B_s - C_s
    D_n = tot_n - A_n - B_n - C_n

    def frac(s, c):
        return np.divide(s * s, c, out=np.zeros_like(s, dtype=float), where=c > 0)

    return float((frac(A_s, A_n) + frac(B_s, B_n) + frac(C_s, C_n) + frac(D_s, D_n)).max())


def fast_interactions(ds: Dataset, n_bins: int = 10) -> InteractionScores:
    """Pairwise interaction strength, FAST-style.

    Fit main effects on equal-frequency bins, then for each feature pair
    score the residual-RSS reduction of the best single axis-aligned
    interaction split over the binned residual histogram.
    """
    if n_bins < 2:
        raise ValueError("n_bins must be >= 2")
    if ds.n < n_bins:
        raise ValueError("need at least n_bins observations")
    y = ds.target.astype(np.float64)
    binned, bin_counts = [], []
    for j in range(ds.p):
        b, nb = equal_frequency_bins(ds.features[:, j], n_bins)
        binned.append(b)
        bin_counts.append(nb)
    resid = _backfit_main_effects(binned, bin_counts, y)
    mat = np.zeros((ds.p, ds.p))
    for j in range(ds.p):
        for k in range(j + 1, ds.p):
            flat = binned[j] * bin_counts[k] + binned[k]
            size = bin_counts[j] * bin_counts[k]
            S = np.bincount(flat, weights=resid, minlength=size).reshape(bin_counts[j], bin_counts[k])
            N = np.bincount(flat, minlength=size).reshape(bin_counts[j], bin_counts[k]).astype(float)
            score = _best_quadrant_fit(S, N)
            mat[j, k] = mat[k, j] = score
    return InteractionScores(mat)


def monotonicity_scores(ds: Dataset, repeats: int = 10, subsample_fraction: float = 0.5,
                        rng=None, tree_depth: int = 5, tree_min_obs: int = 10) -> MonotonicityScores:
    """Average Spearman rho between each feature and the predictions of a
    per-feature regression tree fit on subsampled rows."""
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    if not 0.0 < subsample_fraction <= 1.0:
        raise ValueError("subsample_fraction must be in (0, 1]")
    rng = np.random.default_rng() if rng is None else rng
    y = ds.target.astype(np.float64)
    k = max(2, int(math.floor(subsample_fraction * ds.n + 0.5)))
    signed = np.zeros(ds.p)
    for j in range(ds.p):
        acc = 0.0
        for _ in range(repeats):
            sub = np.sort(rng.choice(ds.n, size=k, replace=False)) if k < ds.n else np.arange(ds.n)
            xs = ds.features[sub, j]
            arrays = _tree.fit_variance_tree(xs, y[sub], tree_depth, tree_min_obs)
            preds = _tree.predict_tree_arrays(xs, *arrays)
            rho = spearmanr(xs, preds).statistic
            if not math.isfinite(rho):
                rho = 0.0
            acc += rho
        signed[j] = acc / repeats
    probability = 0.2 + 0.6 * np.abs(signed)
    sign = np.where(signed >= 0, 1, -1).astype(np.int64)
    return MonotonicityScores(signed, probability, sign)


def apply_sign_flip(ds: Dataset, sign) -> Dataset:
    """Negate the columns with sign -1 so that monotone-decreasing effects
    become increasing and only INCREASING constraints are ever needed."""
    sign = np.asarray(sign, dtype=np.float64)
    return Dataset(ds.features * sign[None, :], ds.target, ds.feature_names)


def truncated_geometric(lo: int, hi: int, success_p: float, rng) -> int:
    """Draw k in {lo..hi} with P(k) proportional to (1-success_p)^(k-lo)."""
    if lo > hi:
        raise ValueError(f"empty support: lo={lo} > hi={hi}")
    if not 0.0 < success_p < 1.0:
        raise ValueError("success_p must be in (0, 1)")
    m = hi - lo + 1
    pmf = (1.0 - success_p) ** np.arange(m)
    cdf = np.cumsum(pmf / pmf.sum())
    k = int(np.searchsorted(cdf, rng.random(), side="right"))
    return lo + min(k, m - 1)


def _weighted_draw_without_replacement(weights: np.ndarray, size: int, rng) -> list:
    """Sequential draws with probability proportional to the remaining
    weights; uniform among the remainder once all weights are zero."""
    weights = weights.astype(np.float64).copy()
    avail = list(range(weights.shape[0]))
    chosen = []
    for _ in range(size):
        w = weights[avail]
        total = w.sum()
        if total > 0:
            probs = w / total
        else:
            probs = np.full(len(avail), 1.0 / len(avail))
        pick = int(rng.choice(len(avail), p=probs))
        chosen.append(avail.pop(pick))
    return chosen


def sample_initial_structure(p: int, filter_scores: FilterScores,
                             interactions: InteractionScores,
                             monotonicity: MonotonicityScores, rng,
                             success_p: float = 0.5) -> GroupStructure:
    """Sample one group structure biased by the detector outputs.

    The selected-feature count and the interaction count are drawn from
    truncated geometric distributions; features are drawn weighted by the
    filter scores; the groups are the equivalence classes of the top-ranked
    interaction pairs restricted to the selection (skipped pairs are not
    replaced); each group turns INCREASING with probability equal to the
    mean of its members' monotonicity probabilities.
    """
    s_count = truncated_geometric(1, p, success_p, rng)
    selected = _weighted_draw_without_replacement(filter_scores.scores, s_count, rng)
    selset = set(selected)
    pairs = set()
    max_pairs = p * (p - 1) // 2
    if max_pairs >= 1:
        i_count = truncated_geometric(1, max_pairs, success_p, rng)
        ranked = sorted(
            ((j, k) for j in range(p) for k in range(j + 1, p)),
            key=lambda jk: (-interactions.matrix[jk[0], jk[1]], jk[0], jk[1]),
        )
        for j, k in ranked[:i_count]:
            if j in selset and k in selset:
                pairs.add((j, k))

    def draw_attr(members):
        prob = float(np.mean(monotonicity.probability[sorted(members)]))
        return Monotonicity.INCREASING if rng.random() < prob else Monotonicity.UNCONSTRAINED

    return from_pairs(p, selset, pairs, attributes=draw_attr)
