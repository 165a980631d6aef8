"""Figures for the optimizer's exported Pareto fronts and hypervolume traces."""

__version__ = "0.1.0"

from .figures import plot_front, plot_hv
from .io import (ExportFormatError, FrontTable, TraceTable,
                 group_by_seed_pattern, mean_and_standard_error, read_front,
                 read_trace)

__all__ = [
    "plot_front", "plot_hv", "ExportFormatError", "FrontTable", "TraceTable",
    "group_by_seed_pattern", "mean_and_standard_error", "read_front", "read_trace",
]
