"""Overlapping block layout and scan orders over a feature image.

The image is cut into horizontal strips, each strip into square blocks,
with a shared overlap between neighbors both ways. Scanning the blocks in
a fixed order turns the image into a sequence.
"""

from __future__ import annotations

from dataclasses import dataclass, field

SCAN_MODES = ("serpentine", "zigzag")


@dataclass(frozen=True)
class SamplingPlan:
    """Block layout for one image geometry.

    blocks holds (x0, y0) top-left corners, row-major top to bottom,
    left to right. n_rows counts block rows across all strips.
    """

    image_w: int
    image_h: int
    block_k: int
    overlap_p: int
    strip_h: int
    n_rows: int
    n_cols: int
    blocks: tuple[tuple[int, int], ...] = field(repr=False)

    @property
    def n_blocks(self) -> int:
        return len(self.blocks)


def plan_sampling(
    image_w: int,
    image_h: int,
    block_k: int = 16,
    overlap_p: int = 12,
    strip_h: int | None = None,
) -> SamplingPlan:
    """Lay out overlapping blocks over a w x h image.

    Strips of height strip_h (default block_k) tile the image vertically
    with overlap_p; inside each strip, block rows and columns advance by
    block_k - overlap_p. Every block lies fully inside the image.
    """
    if strip_h is None:
        strip_h = block_k
    if block_k < 1:
        raise ValueError(f"block side must be >= 1, got {block_k}")
    if not 0 <= overlap_p < block_k:
        raise ValueError(f"overlap must satisfy 0 <= p < k, got p={overlap_p} k={block_k}")
    if strip_h < block_k:
        raise ValueError(f"strip height {strip_h} smaller than block side {block_k}")
    if image_w < block_k or image_h < strip_h:
        raise ValueError(
            f"image {image_w}x{image_h} too small for blocks {block_k} and strips {strip_h}"
        )

    step = block_k - overlap_p
    n_cols = (image_w - overlap_p) // step
    n_strips = (image_h - overlap_p) // (strip_h - overlap_p)
    rows_per_strip = (strip_h - overlap_p) // step

    blocks: list[tuple[int, int]] = []
    for s in range(n_strips):
        ys = s * (strip_h - overlap_p)
        for r in range(rows_per_strip):
            y0 = ys + r * step
            for c in range(n_cols):
                blocks.append((c * step, y0))

    return SamplingPlan(
        image_w=image_w,
        image_h=image_h,
        block_k=block_k,
        overlap_p=overlap_p,
        strip_h=strip_h,
        n_rows=n_strips * rows_per_strip,
        n_cols=n_cols,
        blocks=tuple(blocks),
    )


def scan_order(plan: SamplingPlan, mode: str = "serpentine") -> list[int]:
    """Permutation of block indices giving the scan sequence.

    zigzag reads every row left to right; serpentine alternates direction
    per row so consecutive blocks stay spatially adjacent.
    """
    if mode not in SCAN_MODES:
        raise ValueError(f"scan mode must be one of {SCAN_MODES}, got {mode!r}")
    order: list[int] = []
    for row in range(plan.n_rows):
        start = row * plan.n_cols
        idx = range(start, start + plan.n_cols)
        if mode == "serpentine" and row % 2 == 1:
            idx = reversed(idx)
        order.extend(idx)
    return order
