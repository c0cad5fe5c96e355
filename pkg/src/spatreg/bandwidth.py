"""Data-driven bandwidth selection from adjacent sup-distances over a grid.

The rule scans candidate bandwidths l * pilot / L for l = 1..L, computes the
sup-distance between consecutive curves, and picks the earliest candidate
whose adjacent distance drops strictly below threshold times the minimum
adjacent distance. The variance bandwidth is chosen in a second stage with
residuals frozen at the selected mean bandwidth.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .data import CurveEstimate, SpatialDataset
from .errors import AllDegenerateError
from .estimators import jackknife_mean, jackknife_residuals, variance_estimate
from .kernels import EPANECHNIKOV, Kernel

__all__ = [
    "BandwidthGrid",
    "SelectionTrace",
    "TwoStageSelection",
    "adjacent_distances",
    "select_bandwidth",
    "select_two_stage",
]


@dataclass(frozen=True)
class BandwidthGrid:
    """Candidate bandwidths l * pilot / count for l = 1..count."""

    pilot: float
    count: int
    threshold: float = 2.0

    def __post_init__(self):
        if not self.pilot > 0:
            raise ValueError("pilot bandwidth must be positive")
        if self.count < 2:
            raise ValueError("grid needs at least two candidates")
        if not self.threshold > 1:
            raise ValueError("threshold must exceed 1")

    @property
    def values(self) -> np.ndarray:
        return self.pilot * np.arange(1, self.count + 1) / self.count


@dataclass
class SelectionTrace:
    """Adjacent sup-distances (grid indices 2..count) and the chosen entry.

    chosen_index is the 1-based grid index, always within [2, count].
    """

    adjacent_distances: np.ndarray
    chosen_index: int
    chosen_bandwidth: float


@dataclass
class TwoStageSelection:
    """Selected mean and variance bandwidths with their selection traces."""

    b_hat: float
    h_hat: float
    mean_trace: SelectionTrace
    variance_trace: SelectionTrace


def adjacent_distances(estimates: Sequence[CurveEstimate]) -> np.ndarray:
    """Sup-distance between consecutive curves sharing one design grid.

    Design points where either curve is degenerate (NaN) are excluded from
    the maximum; a curve with no valid point at all raises AllDegenerateError.
    """
    if len(estimates) < 2:
        raise ValueError("need at least two curves")
    base = estimates[0].design_points
    for i, est in enumerate(estimates):
        if not np.array_equal(est.design_points, base):
            raise ValueError("all curves must share the same design points")
        if not np.isfinite(est.values).any():
            raise AllDegenerateError(f"curve {i} has no valid design point")
    out = np.empty(len(estimates) - 1)
    for i in range(1, len(estimates)):
        diff = np.abs(estimates[i].values - estimates[i - 1].values)
        finite = np.isfinite(diff)
        if not finite.any():
            raise AllDegenerateError(
                f"curves {i - 1} and {i} share no valid design point"
            )
        out[i - 1] = diff[finite].max()
    return out


def select_bandwidth(distances, grid: BandwidthGrid) -> SelectionTrace:
    """Earliest grid index (l >= 2) with distance strictly below threshold * min.

    The minimum runs over all adjacent distances including the candidate
    itself, so a selection always exists. When the minimum is zero the strict
    inequality is unsatisfiable and the first exact stabilization (distance
    zero) is chosen instead.
    """
    d = np.asarray(distances, dtype=float)
    if d.shape != (grid.count - 1,):
        raise ValueError(
            f"expected {grid.count - 1} adjacent distances, got {d.shape}"
        )
    if not np.isfinite(d).all() or (d < 0).any():
        raise ValueError("adjacent distances must be finite and non-negative")
    minimum = d.min()
    if minimum == 0.0:
        position = int(np.argmax(d == 0.0))
    else:
        position = int(np.argmax(d < grid.threshold * minimum))
    index = position + 2
    return SelectionTrace(d, index, float(grid.values[index - 1]))


def select_two_stage(
    dataset: SpatialDataset,
    design_points,
    mean_grid: BandwidthGrid,
    variance_grid: BandwidthGrid,
    kernel: Kernel = EPANECHNIKOV,
) -> TwoStageSelection:
    """Select the mean bandwidth from bias-corrected mean curves, then the
    variance bandwidth from variance curves with residuals frozen at it."""
    mean_curves = [
        jackknife_mean(dataset, design_points, b, kernel) for b in mean_grid.values
    ]
    mean_trace = select_bandwidth(adjacent_distances(mean_curves), mean_grid)
    residuals = jackknife_residuals(dataset, mean_trace.chosen_bandwidth, kernel)
    variance_curves = [
        variance_estimate(
            dataset,
            design_points,
            h,
            mean_trace.chosen_bandwidth,
            kernel,
            residuals=residuals,
        )
        for h in variance_grid.values
    ]
    variance_trace = select_bandwidth(adjacent_distances(variance_curves), variance_grid)
    return TwoStageSelection(
        mean_trace.chosen_bandwidth,
        variance_trace.chosen_bandwidth,
        mean_trace,
        variance_trace,
    )
