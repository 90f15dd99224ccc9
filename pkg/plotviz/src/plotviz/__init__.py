"""Offline figure rendering for simulator metrics CSVs."""

from .figures import (
    feasibility_horizon,
    max_pointwise_gap,
    plot_bond_heatmap,
    plot_correlator,
    plot_cost,
)
from .frame import MetricsFrame, load_frame

__all__ = [
    "MetricsFrame",
    "feasibility_horizon",
    "load_frame",
    "max_pointwise_gap",
    "plot_bond_heatmap",
    "plot_correlator",
    "plot_cost",
]
