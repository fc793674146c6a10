"""Figure rendering for trace and aggregate files.

Every kind writes both a PNG and an SVG next to each other and is
deterministic: fixed style, fixed SVG hash salt, no embedded dates, and no
randomized jitter anywhere, so the same job produces byte-identical
images.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.collections import LineCollection  # noqa: E402

from .io import EmptyInput, read_aggregate, read_header, read_trace  # noqa: E402

plt.rcParams["svg.hashsalt"] = "liftplots"

KINDS = (
    "trajectory",
    "tension-series",
    "tension-violin",
    "error-violin",
    "energy",
)

_PNG_META = {"Software": "liftplots"}
_SVG_META = {"Date": None, "Creator": "liftplots"}

_CONTROLLER_ORDER = ("dissipative", "formation", "leader")


@dataclass
class PlotJob:
    """One figure request: inputs, kind, output image path, styling."""

    inputs: list[str]
    kind: str
    out: str
    dpi: int = 150
    title: str | None = None
    warmup: float = 5.0  # s of trace discarded by distribution kinds


def render(job: PlotJob) -> list[Path]:
    """Render one job; returns the written image paths (PNG, SVG)."""
    if job.kind not in KINDS:
        raise ValueError(f"unknown figure kind {job.kind!r}; choose from {KINDS}")
    if not job.inputs:
        raise ValueError("no input files given")
    if job.kind != "error-violin" and len(job.inputs) != 1:
        raise ValueError(f"kind {job.kind!r} takes exactly one input trace")

    fig = _FIGURES[job.kind](job)
    if job.title:
        fig.suptitle(job.title)
    out = Path(job.out)
    png = out.with_suffix(".png")
    svg = out.with_suffix(".svg")
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(png, dpi=job.dpi, metadata=_PNG_META)
    fig.savefig(svg, metadata=_SVG_META)
    plt.close(fig)
    return [png, svg]


# ---------------------------------------------------------------------------
# Trace-based kinds
# ---------------------------------------------------------------------------
def _trace_arrays(path: str) -> dict[str, Any]:
    _, records = read_trace(path)
    return {
        "t": np.array([r["t"] for r in records]),
        "robot_pos": np.array([r["p"] for r in records]),  # (T, n, 3)
        "robot_vel": np.array([r["v"] for r in records]),
        "payload_pos": np.array([r["payload"]["p"] for r in records]),
        "payload_vel": np.array([r["payload"]["v"] for r in records]),
        "tension": np.array([r["tension"] for r in records]),  # (T, n, 3)
        "header": read_header(path),
    }


def _speed_colored_path(ax, xy: np.ndarray, speed: np.ndarray, norm):
    segments = np.stack([xy[:-1], xy[1:]], axis=1)
    lc = LineCollection(segments, cmap="viridis", norm=norm)
    lc.set_array(0.5 * (speed[:-1] + speed[1:]))
    lc.set_linewidth(2.0)
    ax.add_collection(lc)
    return lc


def _fig_trajectory(job: PlotJob):
    data = _trace_arrays(job.inputs[0])
    pp = data["payload_pos"]
    speed = np.linalg.norm(data["payload_vel"], axis=1)
    norm = plt.Normalize(vmin=0.0, vmax=max(float(speed.max()), 1e-9))

    fig, axes = plt.subplots(1, 3, figsize=(13, 4))
    views = [("x [m]", "y [m]", (0, 1)), ("x [m]", "z [m]", (0, 2)),
             ("y [m]", "z [m]", (1, 2))]
    lc = None
    for ax, (xl, yl, (i, j)) in zip(axes, views):
        for rid in range(data["robot_pos"].shape[1]):
            ax.plot(
                data["robot_pos"][:, rid, i], data["robot_pos"][:, rid, j],
                color="0.75", linewidth=0.8, zorder=1,
            )
        lc = _speed_colored_path(ax, pp[:, (i, j)], speed, norm)
        ax.set_xlabel(xl)
        ax.set_ylabel(yl)
        ax.autoscale()
        ax.set_aspect("equal", adjustable="datalim")
    cbar = fig.colorbar(lc, ax=axes, shrink=0.9)
    cbar.set_label("payload speed [m/s]")
    return fig


def _fig_tension_series(job: PlotJob):
    data = _trace_arrays(job.inputs[0])
    t = data["t"]
    mags = np.linalg.norm(data["tension"], axis=2)  # (T, n)

    fig, ax = plt.subplots(figsize=(9, 4.5))
    for rid in range(mags.shape[1]):
        ax.plot(t, mags[:, rid], linewidth=1.2, label=f"robot {rid}")
    header = data["header"]
    if header:
        for ev in header.get("events", []):
            ax.axvline(ev["time"], color="0.4", linestyle="--", linewidth=1.0)
    ax.set_xlabel("time [s]")
    ax.set_ylabel("cable tension [N]")
    ax.legend(loc="upper right", fontsize=8, ncol=2)
    fig.tight_layout()
    return fig


def _fig_tension_violin(job: PlotJob):
    data = _trace_arrays(job.inputs[0])
    keep = data["t"] >= job.warmup
    if not np.any(keep):
        keep = np.ones_like(data["t"], dtype=bool)
    mags = np.linalg.norm(data["tension"][keep], axis=2)  # (T', n)
    n = mags.shape[1]

    fig, ax = plt.subplots(figsize=(max(6, 0.9 * n), 4.5))
    ax.violinplot([mags[:, rid] for rid in range(n)],
                  positions=np.arange(n), showmedians=True)
    ax.set_xticks(np.arange(n), [f"robot {rid}" for rid in range(n)])
    ax.set_ylabel("cable tension [N]")
    fig.tight_layout()
    return fig


def _fig_energy(job: PlotJob):
    data = _trace_arrays(job.inputs[0])
    header = data["header"]
    if not header:
        raise EmptyInput(
            f"{job.inputs[0]}: the energy figure needs the trace's "
            ".header.json sidecar for the body masses"
        )
    masses = np.asarray(header["masses"], dtype=float)
    payload_mass = float(header["payload_mass"])
    v2_robots = np.sum(data["robot_vel"] ** 2, axis=2)  # (T, n)
    ke = 0.5 * v2_robots @ masses
    ke = ke + 0.5 * payload_mass * np.sum(data["payload_vel"] ** 2, axis=1)

    fig, ax = plt.subplots(figsize=(9, 4.5))
    ax.plot(data["t"], ke, linewidth=1.4)
    ax.set_xlabel("time [s]")
    ax.set_ylabel("kinetic energy [J]")
    fig.tight_layout()
    return fig


# ---------------------------------------------------------------------------
# Aggregate-based kind
# ---------------------------------------------------------------------------
def _fig_error_violin(job: PlotJob):
    rows: list[dict[str, Any]] = []
    for path in job.inputs:
        rows.extend(read_aggregate(path))
    rows = [r for r in rows if r["status"] == "ok"
            and r["tracking_median"] is not None]
    if not rows:
        raise EmptyInput("aggregate holds no successful rows to plot")

    scenarios = sorted({r["scenario"] for r in rows})
    controllers = [c for c in _CONTROLLER_ORDER
                   if any(r["controller"] == c for r in rows)]
    controllers += sorted(
        {r["controller"] for r in rows} - set(controllers)
    )

    ncols = 2 if len(scenarios) >= 4 else len(scenarios)
    nrows = int(np.ceil(len(scenarios) / ncols))
    fig, axes = plt.subplots(
        nrows, ncols, figsize=(4.5 * ncols, 3.6 * nrows), squeeze=False
    )
    for idx, scenario in enumerate(scenarios):
        ax = axes[idx // ncols][idx % ncols]
        groups = []
        labels = []
        for ctrl in controllers:
            vals = [r["tracking_median"] for r in rows
                    if r["scenario"] == scenario and r["controller"] == ctrl]
            if vals:
                groups.append(vals)
                labels.append(ctrl)
        ax.violinplot(groups, positions=np.arange(len(groups)),
                      showmedians=True)
        ax.set_xticks(np.arange(len(labels)), labels, fontsize=8)
        ax.set_ylabel("tracking error [m]")
        ax.set_title(scenario, fontsize=10)
    for idx in range(len(scenarios), nrows * ncols):
        axes[idx // ncols][idx % ncols].set_visible(False)
    fig.tight_layout()
    return fig


_FIGURES = {
    "trajectory": _fig_trajectory,
    "tension-series": _fig_tension_series,
    "tension-violin": _fig_tension_violin,
    "error-violin": _fig_error_violin,
    "energy": _fig_energy,
}
