import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gaborhmm.sampling import plan_sampling, scan_order


def test_default_plan_geometry():
    plan = plan_sampling(92, 112, block_k=16, overlap_p=12, strip_h=16)
    assert plan.n_rows == 25
    assert plan.n_cols == 20
    assert plan.n_blocks == 500
    # columns step by block minus overlap
    assert plan.blocks[0] == (0, 0)
    assert plan.blocks[1] == (4, 0)
    assert plan.blocks[20] == (0, 4)
    assert plan.blocks[-1] == (76, 96)


def test_single_block_plan():
    plan = plan_sampling(16, 16, block_k=16, overlap_p=0, strip_h=16)
    assert plan.n_blocks == 1
    assert plan.blocks == ((0, 0),)


def test_blocks_stay_inside_and_overlap_exactly():
    plan = plan_sampling(92, 112)
    for x0, y0 in plan.blocks:
        assert 0 <= x0 and x0 + plan.block_k <= plan.image_w
        assert 0 <= y0 and y0 + plan.block_k <= plan.image_h
    for row in range(plan.n_rows):
        start = row * plan.n_cols
        xs = [plan.blocks[start + c][0] for c in range(plan.n_cols)]
        assert all(b - a == plan.block_k - plan.overlap_p for a, b in zip(xs, xs[1:]))


def test_taller_strips_pack_multiple_block_rows():
    plan = plan_sampling(40, 40, block_k=8, overlap_p=4, strip_h=12)
    # strips advance by 8, block rows inside a strip advance by 4
    ys = sorted({y for _, y in plan.blocks})
    assert ys == [0, 4, 8, 12, 16, 20, 24, 28]


def test_scan_serpentine_is_hamiltonian_and_adjacent():
    plan = plan_sampling(92, 112)
    order = scan_order(plan, mode="serpentine")
    assert sorted(order) == list(range(plan.n_blocks))
    step = plan.block_k - plan.overlap_p
    for a, b in zip(order, order[1:]):
        ax, ay = plan.blocks[a]
        bx, by = plan.blocks[b]
        # consecutive scan positions touch: one step sideways, or straight
        # down at a row turn
        if ay == by:
            assert abs(bx - ax) == step
        else:
            assert ax == bx and by - ay == step


def test_zigzag_is_row_major():
    plan = plan_sampling(92, 112)
    assert scan_order(plan, mode="zigzag") == list(range(plan.n_blocks))


def test_zigzag_2x3_reference_order():
    plan = plan_sampling(12, 8, block_k=4, overlap_p=0, strip_h=4)
    assert plan.n_rows == 2 and plan.n_cols == 3
    assert scan_order(plan, mode="zigzag") == [0, 1, 2, 3, 4, 5]
    assert scan_order(plan, mode="serpentine") == [0, 1, 2, 5, 4, 3]


def test_serpentine_differs_from_zigzag_exactly_on_odd_rows():
    plan = plan_sampling(92, 112)
    serp = scan_order(plan, mode="serpentine")
    zig = scan_order(plan, mode="zigzag")
    for row in range(plan.n_rows):
        sl = slice(row * plan.n_cols, (row + 1) * plan.n_cols)
        if row % 2 == 0:
            assert serp[sl] == zig[sl]
        else:
            assert serp[sl] == zig[sl][::-1]
            assert serp[sl] != zig[sl]


def test_single_row_scan_is_left_to_right():
    plan = plan_sampling(92, 16, block_k=16, overlap_p=12, strip_h=16)
    assert plan.n_rows == 1
    assert scan_order(plan, "serpentine") == scan_order(plan, "zigzag")


def test_scan_mode_validation():
    plan = plan_sampling(92, 112)
    with pytest.raises(ValueError):
        scan_order(plan, mode="spiral")


def test_plan_validation():
    with pytest.raises(ValueError):
        plan_sampling(92, 112, block_k=16, overlap_p=16)
    with pytest.raises(ValueError):
        plan_sampling(92, 112, block_k=0, overlap_p=0)
    with pytest.raises(ValueError):
        plan_sampling(92, 112, block_k=16, overlap_p=-1)
    with pytest.raises(ValueError):
        plan_sampling(92, 112, block_k=16, overlap_p=12, strip_h=8)
    with pytest.raises(ValueError):
        plan_sampling(12, 112, block_k=16, overlap_p=12)
    with pytest.raises(ValueError):
        plan_sampling(92, 12, block_k=16, overlap_p=4, strip_h=16)


@settings(max_examples=200, deadline=None)
@given(
    block_k=st.integers(min_value=1, max_value=24),
    overlap_p=st.integers(min_value=0, max_value=23),
    extra_strip=st.integers(min_value=0, max_value=20),
    extra_w=st.integers(min_value=0, max_value=60),
    extra_h=st.integers(min_value=0, max_value=60),
    mode=st.sampled_from(["serpentine", "zigzag"]),
)
def test_plan_properties_hold_for_arbitrary_geometry(
    block_k, overlap_p, extra_strip, extra_w, extra_h, mode
):
    if overlap_p >= block_k:
        overlap_p = block_k - 1
    strip_h = block_k + extra_strip
    image_w = block_k + extra_w
    image_h = strip_h + extra_h
    plan = plan_sampling(image_w, image_h, block_k=block_k,
                         overlap_p=overlap_p, strip_h=strip_h)
    step = block_k - overlap_p
    assert plan.n_cols == (image_w - overlap_p) // step
    assert plan.n_blocks == plan.n_rows * plan.n_cols
    for x0, y0 in plan.blocks:
        assert 0 <= x0 <= image_w - block_k
        assert 0 <= y0 <= image_h - block_k
    assert len(set(plan.blocks)) == plan.n_blocks
    order = scan_order(plan, mode=mode)
    assert sorted(order) == list(range(plan.n_blocks))
