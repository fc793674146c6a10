"""Quantitative evaluation of simulation traces.

All metrics are pure functions of (records, header): recomputing them from a
stored trace reproduces the values computed during the run.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import DegenerateHull, EmptyTrace

HULL_EPS = 1e-9


# ---------------------------------------------------------------------------
# Convex hull geometry (2-D, horizontal plane)
# ---------------------------------------------------------------------------
def convex_hull_2d(points: np.ndarray) -> np.ndarray:
    """Convex hull of 2-D points via the monotone chain, counter-clockwise.

    Raises DegenerateHull when fewer than 3 distinct points or all collinear.
    """
    pts = np.unique(np.asarray(points, dtype=float)[:, :2], axis=0)
    if pts.shape[0] < 3:
        raise DegenerateHull(
            f"need >= 3 distinct points for a 2-D hull, got {pts.shape[0]}"
        )
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    pts = pts[order]

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list[np.ndarray] = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= HULL_EPS:
            lower.pop()
        lower.append(p)
    upper: list[np.ndarray] = []
    for p in pts[::-1]:
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= HULL_EPS:
            upper.pop()
        upper.append(p)
    hull = np.array(lower[:-1] + upper[:-1])
    if hull.shape[0] < 3:
        raise DegenerateHull("points are collinear; hull is degenerate")
    return hull


def _segment_distance(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    ab = b - a
    denom = float(ab @ ab)
    t = 0.0 if denom == 0.0 else float((p - a) @ ab) / denom
    t = min(1.0, max(0.0, t))
    closest = a + t * ab
    return float(np.linalg.norm(p - closest))


def point_hull_distance(hull: np.ndarray, p: np.ndarray) -> tuple[float, bool]:
    """(distance outside, inside flag) for a point against a CCW hull."""
    p = np.asarray(p, dtype=float)[:2]
    n = hull.shape[0]
    inside = True
    for i in range(n):
        a, b = hull[i], hull[(i + 1) % n]
        cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])
        if cross < -HULL_EPS:
            inside = False
            break
    if inside:
        return 0.0, True
    dist = min(
        _segment_distance(p, hull[i], hull[(i + 1) % n]) for i in range(n)
    )
    return dist, False


@dataclass
class HullResult:
    """Payload-vs-node-hull diagnosis for one snapshot."""

    residual: float  # distance outside the hull, 0 when inside
    inside: bool
    combination_error: float  # nan when total weight vanishes
    combination_point: np.ndarray | None
    combination_weights: np.ndarray | None = None
    note: str = ""


def convex_hull_residual(
    nodes: np.ndarray,
    payload_pos: np.ndarray,
    l_load0: np.ndarray | None = None,
) -> HullResult:
    """Test the payload's horizontal position against the node hull.

    When initial load-leg lengths are supplied, also evaluates the convex
    combination with weights (1 - l0/l) normalized to unit sum and reports
    the combination error.
    """
    nodes = np.asarray(nodes, dtype=float)
    payload_pos = np.asarray(payload_pos, dtype=float)
    hull = convex_hull_2d(nodes[:, :2])
    residual, inside = point_hull_distance(hull, payload_pos[:2])

    comb_err = float("nan")
    comb_point = None
    weights = None
    note = ""
    if l_load0 is not None:
        l_load0 = np.asarray(l_load0, dtype=float)
        lengths = np.linalg.norm(nodes - payload_pos[None, :], axis=1)
        raw = 1.0 - l_load0 / np.maximum(lengths, 1e-12)
        total = float(raw.sum())
        if abs(total) < 1e-12:
            note = "combination weights sum to zero (all load legs at rest)"
        else:
            weights = raw / total
            comb_point = weights @ nodes[:, :2]
            comb_err = float(np.linalg.norm(payload_pos[:2] - comb_point))
    return HullResult(
        residual=residual,
        inside=inside,
        combination_error=comb_err,
        combination_point=comb_point,
        combination_weights=weights,
        note=note,
    )


# ---------------------------------------------------------------------------
# Spring potential of the (1 - l0/l) force law
# ---------------------------------------------------------------------------
def spring_potential(length: float, rest: float, k: float) -> float:
    """Potential of the force k*(1 - rest/l) along the spring axis.

    Integrating gives k*(l - rest*ln l) + C; the constant is chosen to zero
    the potential at l = rest, i.e. U = k*((l - rest) - rest*ln(l/rest)),
    which is convex and non-negative with its minimum at the rest length.
    """
    length = max(float(length), 1e-12)
    if rest <= 0.0:
        return k * length
    return k * ((length - rest) - rest * math.log(length / rest))


# ---------------------------------------------------------------------------
# Trace-level metrics
# ---------------------------------------------------------------------------
def _require_records(records: list[dict[str, Any]]) -> None:
    if not records:
        raise EmptyTrace("no records in trace")


def _times(records: list[dict[str, Any]]) -> np.ndarray:
    return np.array([rec["t"] for rec in records], dtype=float)


def tracking_error(
    records: list[dict[str, Any]], warmup: float = 5.0
) -> tuple[np.ndarray, np.ndarray, dict[str, float]]:
    """Per-record payload-vs-reference distance and post-warmup summary."""
    _require_records(records)
    times = _times(records)
    errors = np.array(
        [
            np.linalg.norm(
                np.asarray(rec["payload"]["p"]) - np.asarray(rec["ref"])
            )
            for rec in records
        ]
    )
    window = errors[times >= warmup] if np.any(times >= warmup) else errors
    q25, q75 = np.percentile(window, [25.0, 75.0])
    summary = {
        "median": float(np.median(window)),
        "mean": float(window.mean()),
        "max": float(window.max()),
        "iqr": float(q75 - q25),
    }
    return times, errors, summary


def steady_window_start(
    records: list[dict[str, Any]], convergence: float | None
) -> float:
    """Steady window start: final 20% of the run or post-convergence,
    whichever window is longer (i.e. the earlier of the two starts)."""
    times = _times(records)
    t_end = float(times[-1])
    tail_start = float(times[0]) + 0.8 * (t_end - float(times[0]))
    if convergence is None:
        return tail_start
    return min(tail_start, convergence)


def tension_stats(
    records: list[dict[str, Any]], convergence: float | None = None
) -> dict[str, Any]:
    """Per-robot tension magnitude summaries and the steady imbalance index.

    The imbalance index is (max mean - min mean) / overall mean over robots
    that remain attached throughout the steady window.
    """
    _require_records(records)
    times = _times(records)
    n_final = len(records[-1]["tension"])
    start = steady_window_start(records, convergence)

    per_robot: dict[int, list[float]] = {i: [] for i in range(n_final)}
    steady: dict[int, list[float]] = {i: [] for i in range(n_final)}
    attached_throughout = [True] * n_final
    for rec, t in zip(records, times):
        mags = [float(np.linalg.norm(v)) for v in rec["tension"]]
        for i, m in enumerate(mags):
            per_robot[i].append(m)
        if t >= start:
            for i, m in enumerate(mags):
                steady[i].append(m)
                if i < len(rec["attached"]) and not rec["attached"][i]:
                    attached_throughout[i] = False

    robots = []
    for i in range(n_final):
        series = np.array(per_robot[i])
        q25, median, q75 = np.percentile(series, [25.0, 50.0, 75.0])
        robots.append(
            {
                "mean": float(series.mean()),
                "median": float(median),
                "q25": float(q25),
                "q75": float(q75),
                "max": float(series.max()),
                "steady_mean": float(np.mean(steady[i])) if steady[i] else 0.0,
                "attached_steady": attached_throughout[i],
            }
        )
    steady_means = [
        r["steady_mean"] for r in robots if r["attached_steady"]
    ]
    if steady_means and np.mean(steady_means) > 1e-12:
        imbalance = (max(steady_means) - min(steady_means)) / float(
            np.mean(steady_means)
        )
    else:
        imbalance = float("nan")
    return {"robots": robots, "imbalance": float(imbalance),
            "steady_start": start}


def energy_ledger(
    records: list[dict[str, Any]], header: dict[str, Any]
) -> tuple[np.ndarray, np.ndarray]:
    """Node-system energy V(t) and its per-record increments.

    V = kinetic energy of nodes relative to their centroid (robot masses)
      + pair-spring potentials over the recorded connectivity edges
      + center-spring and node-robot leg potentials,
    using the logarithmic potential of the (1 - l0/l) force law, zeroed at
    the locked rest lengths.
    """
    _require_records(records)
    gains = header.get("gains", {})
    k_pair = float(gains.get("k_pair", 8.0))
    k_center = float(gains.get("k_center", k_pair))
    k_leg = float(gains.get("k_leg", 30.0))
    rest_pair = np.asarray(header["rest_pair"], dtype=float)
    rest_leg = np.asarray(header["rest_leg"], dtype=float)
    masses = np.asarray(header["masses"], dtype=float)

    out = np.zeros(len(records))
    for idx, rec in enumerate(records):
        nodes = np.asarray(rec["nodes"], dtype=float)
        node_vels = np.asarray(rec["node_vels"], dtype=float)
        alive = np.asarray(rec["alive"], dtype=bool)
        attached = np.asarray(rec.get("attached", alive), dtype=bool)
        n_here = nodes.shape[0]
        m_here = masses[:n_here] if masses.size >= n_here else np.ones(n_here)

        act = np.flatnonzero(alive & attached)
        if act.size == 0:
            continue
        center = nodes[act].mean(axis=0)
        center_vel = node_vels[act].mean(axis=0)

        kinetic = 0.5 * float(
            (m_here[act] * ((node_vels[act] - center_vel) ** 2).sum(axis=1)).sum()
        )

        potential = 0.0
        for i, j in rec["edges"]:
            if i >= rest_pair.shape[0] - 1 or j >= rest_pair.shape[0] - 1:
                continue
            length = float(np.linalg.norm(nodes[i] - nodes[j]))
            potential += spring_potential(length, rest_pair[i + 1, j + 1],
                                          k_pair)
        pos = np.asarray(rec["p"], dtype=float)
        for i in act:
            if i < rest_pair.shape[0] - 1:
                length = float(np.linalg.norm(nodes[i] - center))
                potential += spring_potential(length, rest_pair[i + 1, 0],
                                              k_center)
            if i < rest_leg.size:
                leg = float(np.linalg.norm(nodes[i] - pos[i]))
                potential += spring_potential(leg, rest_leg[i], k_leg)
        out[idx] = kinetic + potential
    deltas = np.diff(out, prepend=out[0])
    return out, deltas


def convergence_time(
    records: list[dict[str, Any]], tol: float = 1e-2, hold: float = 2.0
) -> float | None:
    """First time from which the invariant-set residual stays below tol for
    a sustained ``hold`` seconds; None if that never happens."""
    if not records:
        return None
    times = _times(records)
    residuals = np.array([rec["residual"] for rec in records], dtype=float)
    below = residuals < tol
    i = 0
    n = len(records)
    while i < n:
        if not below[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and below[j + 1]:
            j += 1
        if times[j] - times[i] >= hold:
            return float(times[i])
        i = j + 1
    return None


@dataclass
class RunMetrics:
    """Everything measured from one run."""

    times: np.ndarray
    tracking_series: np.ndarray
    tracking_summary: dict[str, float]
    tension_series: list[list[float]]
    tension_summary: dict[str, Any]
    convergence_time: float | None
    steady_hull_residual: float
    steady_combination_error: float
    energy_series: np.ndarray
    energy_deltas: np.ndarray
    event_times: list[float] = field(default_factory=list)

    def summary_dict(self) -> dict[str, Any]:
        return {
            "tracking": self.tracking_summary,
            "tension_imbalance": self.tension_summary["imbalance"],
            "convergence_time": self.convergence_time,
            "steady_hull_residual": self.steady_hull_residual,
            "steady_combination_error": self.steady_combination_error,
            "final_energy": float(self.energy_series[-1]),
            "event_times": self.event_times,
        }


def compute_metrics(
    records: list[dict[str, Any]],
    header: dict[str, Any],
    warmup: float = 5.0,
    residual_tol: float = 1e-2,
) -> RunMetrics:
    """Assemble the full metric set from a trace."""
    _require_records(records)
    times, errors, summary = tracking_error(records, warmup=warmup)
    conv = convergence_time(records, tol=residual_tol)
    tensions = tension_stats(records, convergence=conv)

    l_load0 = np.asarray(header["l_load0"], dtype=float)
    start = steady_window_start(records, conv)
    hull_max = 0.0
    comb_max = 0.0
    for rec, t in zip(records, times):
        if t < start:
            continue
        nodes = np.asarray(rec["nodes"], dtype=float)
        alive = np.asarray(rec["alive"], dtype=bool)
        attached = np.asarray(rec["attached"], dtype=bool)
        act = alive & attached
        if act.sum() < 3:
            continue
        try:
            res = convex_hull_residual(
                nodes[act],
                np.asarray(rec["payload"]["p"], dtype=float),
                l_load0[: nodes.shape[0]][act] if l_load0.size else None,
            )
        except DegenerateHull:
            continue
        hull_max = max(hull_max, res.residual)
        if not math.isnan(res.combination_error):
            comb_max = max(comb_max, res.combination_error)

    energy, deltas = energy_ledger(records, header)
    tension_series = [
        [float(np.linalg.norm(v)) for v in rec["tension"]] for rec in records
    ]
    return RunMetrics(
        times=times,
        tracking_series=errors,
        tracking_summary=summary,
        tension_series=tension_series,
        tension_summary=tensions,
        convergence_time=conv,
        steady_hull_residual=hull_max,
        steady_combination_error=comb_max,
        energy_series=energy,
        energy_deltas=deltas,
        event_times=[float(ev["time"]) for ev in header.get("events", [])],
    )
