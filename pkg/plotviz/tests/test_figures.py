"""Figure rendering on the archived desk-scale runs.

The archived CSVs came from the simulator CLI on the twelve-qubit open
Heisenberg benchmark at chi_max = 64; both engines saturate the cap at
step 10. Pixel comparisons use the decoded image, not the file bytes.
"""

from pathlib import Path

import numpy as np
import pytest
from PIL import Image

from plotviz.figures import (
    feasibility_horizon,
    max_pointwise_gap,
    plot_bond_heatmap,
    plot_correlator,
    plot_cost,
)
from plotviz.frame import MetricsFrame, load_frame

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="module")
def tebd():
    return load_frame(DATA / "desk_scale_tebd.csv")


@pytest.fixture(scope="module")
def tdvp():
    return load_frame(DATA / "desk_scale_tdvp.csv")


def take_rows(frame: MetricsFrame, rows: slice) -> MetricsFrame:
    return MetricsFrame(
        steps=frame.steps[rows],
        bond_dims=frame.bond_dims[rows],
        cost=frame.cost[rows],
        correlator=frame.correlator[rows],
        discarded_weight_cum=frame.discarded_weight_cum[rows],
        wall_time_ms=frame.wall_time_ms[rows],
    )


def empty_frame(num_bonds: int = 2) -> MetricsFrame:
    return MetricsFrame(
        steps=np.empty(0, dtype=int),
        bond_dims=np.empty((0, num_bonds), dtype=int),
        cost=np.empty(0),
        correlator=np.empty(0),
        discarded_weight_cum=np.empty(0),
        wall_time_ms=np.empty(0),
    )


# ---- the three figure types on the archived runs


def test_three_figure_types_render_from_archived_csvs(tebd, tdvp, tmp_path):
    outputs = [
        plot_correlator(tebd, tdvp, tmp_path / "correlator.png", chi_max=64),
        plot_bond_heatmap(tebd, tmp_path / "heatmap.png", chi_max=64),
        plot_cost(tebd, tdvp, tmp_path / "cost.png"),
    ]
    for out in outputs:
        assert out.exists() and out.stat().st_size > 0


def test_cost_series_respects_bond_economy(tebd, tdvp):
    economy_held = tdvp.bond_dims.sum(axis=1) <= 1.05 * tebd.bond_dims.sum(axis=1)
    assert economy_held.all()
    assert (tdvp.cost[economy_held] <= tebd.cost[economy_held]).all()


def test_archived_correlators_agree_before_the_horizon(tebd, tdvp):
    horizon = feasibility_horizon((tebd, tdvp), 64)
    early = tebd.steps < horizon
    gap = np.max(np.abs(tebd.correlator[early] - tdvp.correlator[early]))
    assert gap <= 1e-4


# ---- correlator overlay


def test_identical_frames_have_zero_gap(tebd, tmp_path):
    assert max_pointwise_gap(tebd, tebd) == 0.0
    out = plot_correlator(tebd, tebd, tmp_path / "same.png")
    assert out.exists()


def test_mismatched_step_axes_are_rejected_without_output(tebd, tmp_path):
    out = tmp_path / "mismatch.png"
    with pytest.raises(ValueError, match="step axis"):
        plot_correlator(tebd, take_rows(tebd, slice(0, 10)), out)
    assert not out.exists()


def test_empty_frame_is_rejected_without_output(tmp_path):
    out = tmp_path / "empty.png"
    with pytest.raises(ValueError, match="no rows"):
        plot_correlator(empty_frame(), empty_frame(), out)
    assert not out.exists()


def test_feasibility_horizon_matches_fixture_saturation(tebd, tdvp):
    assert feasibility_horizon((tebd, tdvp), 64) == 10
    assert feasibility_horizon((tebd, tdvp), 1 << 30) is None


# ---- bond heatmap


def test_single_step_frame_renders_one_column(tebd, tmp_path):
    one = take_rows(tebd, slice(0, 1))
    assert one.bond_dims.shape == (1, 11)
    out = plot_bond_heatmap(one, tmp_path / "one.png", chi_max=4)
    assert out.exists()


def test_empty_heatmap_is_rejected(tmp_path):
    out = tmp_path / "empty.png"
    with pytest.raises(ValueError, match="no rows"):
        plot_bond_heatmap(empty_frame(), out)
    assert not out.exists()


# ---- cost curves


def test_empty_cost_is_rejected(tebd, tmp_path):
    out = tmp_path / "empty.png"
    with pytest.raises(ValueError, match="no rows"):
        plot_cost(tebd, empty_frame(11), out)
    assert not out.exists()


# ---- determinism


def test_identical_inputs_yield_identical_pixels(tebd, tdvp, tmp_path):
    first = plot_correlator(tebd, tdvp, tmp_path / "a.png", chi_max=64)
    second = plot_correlator(tebd, tdvp, tmp_path / "b.png", chi_max=64)
    a = np.asarray(Image.open(first))
    b = np.asarray(Image.open(second))
    assert np.array_equal(a, b)
