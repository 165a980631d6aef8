"""Multi-objective optimization of boosted-tree performance and
interpretability over an augmented search space of hyperparameters and
feature group structures."""

__version__ = "0.1.0"

from .data import Dataset, ResamplingSplit, load_csv, stratified_holdout, stratified_kfold
from .groupstruct import (ConstraintSet, Group, GroupStructure, Monotonicity,
                          format_structure, from_pairs, gga_crossover, gga_mutate,
                          parse_structure, to_constraints, update_from_model, validate)
from .gbm import BoostedModel, HyperparamConfig, fit, predict_proba, predict_raw, used_features, realized_pairs
from .measures import FEATURELESS_POINT, ObjectiveVector, auc, evaluate_candidate, nf, ni, nnm
from .moo import ParetoArchive, ArchiveEntry, crowding_distance, dominates, hypervolume, nondominated_sort
from .evolution import Individual, RunConfig, RunResult, run

__all__ = [
    "Dataset", "ResamplingSplit", "load_csv", "stratified_holdout", "stratified_kfold",
    "ConstraintSet", "Group", "GroupStructure", "Monotonicity", "format_structure",
    "from_pairs", "gga_crossover", "gga_mutate", "parse_structure", "to_constraints",
    "update_from_model", "validate",
    "BoostedModel", "HyperparamConfig", "fit", "predict_proba", "predict_raw",
    "used_features", "realized_pairs",
    "FEATURELESS_POINT", "ObjectiveVector", "auc", "evaluate_candidate", "nf", "ni", "nnm",
    "ParetoArchive", "ArchiveEntry", "crowding_distance", "dominates", "hypervolume",
    "nondominated_sort",
    "Individual", "RunConfig", "RunResult", "run",
]
