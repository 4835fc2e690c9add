"""Observation sequences from a fused magnitude image."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .sampling import SamplingPlan, scan_order


@dataclass
class ObservationSequence:
    values: np.ndarray
    source_id: str = ""

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 1:
            raise ValueError(f"observations must be 1-d, got shape {self.values.shape}")

    def __len__(self) -> int:
        return int(self.values.shape[0])


def global_mean(gf: np.ndarray) -> float:
    """Mean over all pixels of the feature image."""
    gf = np.asarray(gf, dtype=np.float64)
    if gf.ndim != 2 or gf.size == 0:
        raise ValueError(f"feature image must be 2-d and non-empty, got shape {gf.shape}")
    return float(gf.mean())


def block_feature(
    gf: np.ndarray,
    x0: int,
    y0: int,
    block_k: int,
    g_bar: float,
    fallback_scale: float | None = None,
) -> float:
    """Sum of block pixels at or above the global mean.

    An all-below block falls back to fallback_scale * g_bar so the value
    stays on the same scale; fallback_scale defaults to the block side.
    """
    gf = np.asarray(gf, dtype=np.float64)
    h, w = gf.shape
    if not (0 <= x0 and 0 <= y0 and x0 + block_k <= w and y0 + block_k <= h):
        raise ValueError(
            f"block ({x0},{y0}) side {block_k} exceeds image {w}x{h}"
        )
    if fallback_scale is None:
        fallback_scale = float(block_k)
    block = gf[y0 : y0 + block_k, x0 : x0 + block_k]
    mask = block >= g_bar
    if not mask.any():
        return fallback_scale * g_bar
    return float(block[mask].sum())


def extract_observations(
    gf: np.ndarray,
    plan: SamplingPlan,
    order: list[int] | None = None,
    source_id: str = "",
    fallback_scale: float | None = None,
) -> ObservationSequence:
    """Scan the plan's blocks over gf and emit one value per block.

    order defaults to the serpentine scan of the plan. The threshold is
    the global mean of gf, computed once.
    """
    gf = np.asarray(gf, dtype=np.float64)
    if gf.shape != (plan.image_h, plan.image_w):
        raise ValueError(
            f"feature image shape {gf.shape} does not match plan "
            f"{plan.image_h}x{plan.image_w}"
        )
    if order is None:
        order = scan_order(plan, mode="serpentine")
    if sorted(order) != list(range(plan.n_blocks)):
        raise ValueError("order must be a permutation of all block indices")
    g_bar = global_mean(gf)
    values = np.empty(len(order), dtype=np.float64)
    for t, idx in enumerate(order):
        x0, y0 = plan.blocks[idx]
        values[t] = block_feature(gf, x0, y0, plan.block_k, g_bar, fallback_scale)
    return ObservationSequence(values=values, source_id=source_id)
