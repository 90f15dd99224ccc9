"""The three figure types rendered from metrics frames.

Correlator overlay, bond-dimension heatmap, and cost-vs-step curves. All
inputs are validated before any figure is built, so a rejected call never
leaves a partial file behind. Output format follows the file suffix.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib
import numpy as np

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .frame import MetricsFrame


def _require_rows(frame: MetricsFrame, role: str) -> None:
    if frame.is_empty:
        raise ValueError(f"{role} frame has no rows")


def _require_shared_steps(tebd: MetricsFrame, tdvp: MetricsFrame) -> None:
    _require_rows(tebd, "tebd")
    _require_rows(tdvp, "tdvp")
    if not np.array_equal(tebd.steps, tdvp.steps):
        raise ValueError("frames do not share a step axis")


def max_pointwise_gap(tebd: MetricsFrame, tdvp: MetricsFrame) -> float:
    """Largest per-step correlator disagreement between the two frames."""
    return float(np.max(np.abs(tebd.correlator - tdvp.correlator)))


def feasibility_horizon(
    frames: list[MetricsFrame] | tuple[MetricsFrame, ...], chi_max: int
) -> int | None:
    """First recorded step at which any frame's bond profile hits chi_max."""
    hits = []
    for frame in frames:
        saturated = np.nonzero(frame.bond_dims.max(axis=1) >= chi_max)[0]
        if saturated.size:
            hits.append(int(frame.steps[saturated[0]]))
    return min(hits) if hits else None


def plot_correlator(
    tebd: MetricsFrame,
    tdvp: MetricsFrame,
    out_path: str | Path,
    chi_max: int | None = None,
) -> Path:
    """Overlay both engines' correlator series with the worst gap annotated."""
    _require_shared_steps(tebd, tdvp)
    gap = max_pointwise_gap(tebd, tdvp)

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(tebd.steps, tebd.correlator, marker="o", fillstyle="none", label="tebd")
    ax.plot(tdvp.steps, tdvp.correlator, marker="x", linestyle="--", label="tdvp")
    if chi_max is not None:
        horizon = feasibility_horizon((tebd, tdvp), chi_max)
        if horizon is not None:
            ax.axvline(horizon, color="gray", linestyle=":", linewidth=1.0)
            ax.text(
                horizon, 0.02, f" chi hits {chi_max}",
                transform=ax.get_xaxis_transform(), color="gray", fontsize=8,
            )
    ax.set_xlabel("step")
    ax.set_ylabel("XX correlator")
    ax.set_title(f"max pointwise gap {gap:.2e}")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return Path(out_path)


def plot_bond_heatmap(
    frame: MetricsFrame, out_path: str | Path, chi_max: int | None = None
) -> Path:
    """Bond dimension as color over the (step, bond) grid."""
    _require_rows(frame, "input")

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    steps = frame.steps
    bonds = np.arange(1, frame.num_bonds + 1)
    image = ax.imshow(
        frame.bond_dims.T,
        origin="lower",
        aspect="auto",
        extent=(steps[0] - 0.5, steps[-1] + 0.5, 0.5, frame.num_bonds + 0.5),
        cmap="viridis",
    )
    fig.colorbar(image, ax=ax, label="chi")
    if chi_max is not None and bool((frame.bond_dims >= chi_max).any()):
        mask = (frame.bond_dims >= chi_max).astype(float)
        if frame.num_steps >= 2 and frame.num_bonds >= 2:
            ax.contour(steps, bonds, mask.T, levels=[0.5], colors="red", linewidths=1.0)
        else:
            rows, cols = np.nonzero(mask)
            ax.scatter(steps[rows], bonds[cols], marker="x", color="red", s=30)
        ax.set_title(f"saturated cells outlined at chi = {chi_max}")
    ax.set_xlabel("step")
    ax.set_ylabel("bond")
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return Path(out_path)


def plot_cost(tebd: MetricsFrame, tdvp: MetricsFrame, out_path: str | Path) -> Path:
    """Contraction-cost curves for both engines on a log-scaled y axis."""
    _require_shared_steps(tebd, tdvp)

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(tebd.steps, tebd.cost, marker="o", fillstyle="none", label="tebd")
    ax.plot(tdvp.steps, tdvp.cost, marker="x", linestyle="--", label="tdvp")
    ax.set_yscale("log")
    ax.set_xlabel("step")
    ax.set_ylabel("cost (sum of chi^3)")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return Path(out_path)
