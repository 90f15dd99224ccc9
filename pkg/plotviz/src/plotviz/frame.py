"""Parsed metrics tables from the simulator CLI's CSV output.

The normative schema is one row per recorded layer: a step index, one
chi_j column per chain bond, then cost, correlator, cumulative discarded
weight, and wall time. Loading validates the header shape, rejects ragged
rows, and requires strictly increasing steps. A header-only file parses
to an empty frame; the figure functions refuse those.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

TRAILING_COLUMNS = ("cost", "correlator", "discarded_weight_cum", "wall_time_ms")


@dataclass(frozen=True)
class MetricsFrame:
    """One engine's per-step records: bond profile and scalar probes."""

    steps: np.ndarray
    bond_dims: np.ndarray
    cost: np.ndarray
    correlator: np.ndarray
    discarded_weight_cum: np.ndarray
    wall_time_ms: np.ndarray

    def __post_init__(self) -> None:
        n = len(self.steps)
        for name in ("bond_dims", "cost", "correlator", "discarded_weight_cum", "wall_time_ms"):
            rows = len(getattr(self, name))
            if rows != n:
                raise ValueError(f"{name} has {rows} rows, steps has {n}")
        if n and not np.all(np.diff(self.steps) > 0):
            raise ValueError("steps must be strictly increasing")

    @property
    def num_steps(self) -> int:
        return len(self.steps)

    @property
    def num_bonds(self) -> int:
        return self.bond_dims.shape[1]

    @property
    def is_empty(self) -> bool:
        return self.num_steps == 0


def _validate_header(header: list[str], path: Path) -> int:
    """Return the bond-column count after checking the column layout."""
    if len(header) < 2 + len(TRAILING_COLUMNS) or header[0] != "step":
        raise ValueError(f"{path}: expected a 'step' column followed by chi columns")
    num_bonds = len(header) - 1 - len(TRAILING_COLUMNS)
    expected = (
        ["step"]
        + [f"chi_{j}" for j in range(1, num_bonds + 1)]
        + list(TRAILING_COLUMNS)
    )
    if header != expected:
        raise ValueError(f"{path}: header {header} does not match the metrics schema")
    return num_bonds


def load_frame(path: str | Path) -> MetricsFrame:
    """Parse one metrics CSV into arrays, enforcing the schema invariants."""
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: file has no header") from None
        num_bonds = _validate_header(header, path)
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise ValueError(
                    f"{path}:{lineno}: row has {len(row)} fields, header has {len(header)}"
                )
            rows.append(row)
    table = np.array(rows, dtype=float) if rows else np.empty((0, len(header)))
    return MetricsFrame(
        steps=table[:, 0].astype(int),
        bond_dims=table[:, 1 : 1 + num_bonds].astype(int),
        cost=table[:, 1 + num_bonds],
        correlator=table[:, 2 + num_bonds],
        discarded_weight_cum=table[:, 3 + num_bonds],
        wall_time_ms=table[:, 4 + num_bonds],
    )
