"""Rendering: every kind draws, is deterministic, and refuses empty input."""
from __future__ import annotations

import pytest
from conftest import synth_records, write_aggregate_file, write_trace_file

from liftplots.io import EmptyInput
from liftplots.plots import KINDS, PlotJob, render
from liftplots import plots as plots_mod

TRACE_KINDS = ("trajectory", "tension-series", "tension-violin", "energy")


def job_for(kind: str, trace, aggregate, out) -> PlotJob:
    source = str(aggregate) if kind == "error-violin" else str(trace)
    return PlotJob(inputs=[source], kind=kind, out=str(out), warmup=0.5)


# ===========================================================================
# every kind renders
# ===========================================================================
class TestRender:
    @pytest.mark.parametrize("kind", KINDS)
    def test_writes_png_and_svg(self, kind, trace_file, aggregate_file,
                                tmp_path):
        written = render(job_for(kind, trace_file, aggregate_file,
                                 tmp_path / "fig.png"))
        assert [p.suffix for p in written] == [".png", ".svg"]
        for path in written:
            assert path.exists() and path.stat().st_size > 0

    @pytest.mark.parametrize("kind", KINDS)
    def test_same_job_twice_identical_bytes(self, kind, trace_file,
                                            aggregate_file, tmp_path):
        first = render(job_for(kind, trace_file, aggregate_file,
                               tmp_path / "one" / "fig.png"))
        second = render(job_for(kind, trace_file, aggregate_file,
                                tmp_path / "two" / "fig.png"))
        for a, b in zip(first, second):
            assert a.read_bytes() == b.read_bytes(), a.name

    def test_svg_carries_no_date(self, trace_file, aggregate_file, tmp_path):
        written = render(job_for("tension-series", trace_file, aggregate_file,
                                 tmp_path / "fig.png"))
        svg_text = written[1].read_text(encoding="utf-8")
        assert "dc:date" not in svg_text


# ===========================================================================
# figure structure
# ===========================================================================
class TestFigureContent:
    def test_tension_series_one_line_per_robot_plus_event_mark(
        self, unplug_trace_file
    ):
        fig = plots_mod._fig_tension_series(
            PlotJob(inputs=[str(unplug_trace_file)], kind="tension-series",
                    out="unused.png")
        )
        ax = fig.axes[0]
        # 4 robots + 1 event line (axvline adds a Line2D)
        assert len(ax.lines) == 5
        # The unplugged robot's tension data drops to zero after the event.
        tension_lines = ax.lines[:4]
        ydata = tension_lines[2].get_ydata()
        assert ydata[-1] == 0.0 and ydata[0] > 0.0

    def test_error_violin_panel_per_scenario(self, aggregate_file):
        fig = plots_mod._fig_error_violin(
            PlotJob(inputs=[str(aggregate_file)], kind="error-violin",
                    out="unused.png")
        )
        visible = [ax for ax in fig.axes if ax.get_visible()]
        assert len(visible) == 4
        for ax in visible:
            assert ax.get_ylabel() == "tracking error [m]"

    def test_error_violin_concatenates_inputs(self, tmp_path):
        a = write_aggregate_file(tmp_path / "a.csv", scenarios=("cell-a",))
        b = write_aggregate_file(tmp_path / "b.csv", scenarios=("cell-b",))
        fig = plots_mod._fig_error_violin(
            PlotJob(inputs=[str(a), str(b)], kind="error-violin",
                    out="unused.png")
        )
        titles = {ax.get_title() for ax in fig.axes if ax.get_visible()}
        assert titles == {"cell-a", "cell-b"}

    def test_trajectory_labels_axes_with_units(self, trace_file):
        fig = plots_mod._fig_trajectory(
            PlotJob(inputs=[str(trace_file)], kind="trajectory",
                    out="unused.png")
        )
        labels = {ax.get_xlabel() for ax in fig.axes if ax.get_xlabel()}
        assert {"x [m]", "y [m]"} <= labels


# ===========================================================================
# refusal paths
# ===========================================================================
class TestRefusals:
    def test_unknown_kind(self, trace_file):
        with pytest.raises(ValueError, match="unknown figure kind"):
            render(PlotJob(inputs=[str(trace_file)], kind="bogus",
                           out="x.png"))

    def test_trace_kinds_take_one_input(self, trace_file):
        with pytest.raises(ValueError, match="exactly one input"):
            render(PlotJob(inputs=[str(trace_file), str(trace_file)],
                           kind="tension-series", out="x.png"))

    def test_no_inputs(self):
        with pytest.raises(ValueError, match="no input files"):
            render(PlotJob(inputs=[], kind="tension-series", out="x.png"))

    def test_all_error_aggregate_is_empty(self, tmp_path):
        path = write_aggregate_file(tmp_path / "errs.csv", status="error")
        with pytest.raises(EmptyInput):
            render(PlotJob(inputs=[str(path)], kind="error-violin",
                           out=str(tmp_path / "x.png")))

    def test_energy_requires_header_sidecar(self, tmp_path):
        path = write_trace_file(tmp_path / "nh.ndjson",
                                synth_records(steps=5))
        with pytest.raises(EmptyInput, match="header.json"):
            render(PlotJob(inputs=[str(path)], kind="energy",
                           out=str(tmp_path / "x.png")))
