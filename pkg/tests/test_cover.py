"""Good covers of periodic fibers, their components, and partitions of unity."""

import numpy as np
import pytest

from cylcoh import circle_cover, cylinder, torus_cover
from cylcoh.cover import GoodCover


def test_circle_cover_three_arcs():
    dom = cylinder([0, 1], [[0, 1]], [9, 32])
    cov = circle_cover(dom)
    assert len(cov) == 3
    r = 32 // 16
    assert cov.axis_arcs[1] == [(0, 6 * r + 1), (5 * r, 6 * r + 1), (10 * r, 7 * r + 1)]
    # every patch spans the t axis fully
    for i in range(3):
        assert cov.patch_runs(i)[0] == (0, 9)


def test_circle_cover_nerve():
    dom = cylinder([0, 1], [[0, 1]], [9, 32])
    cov = circle_cover(dom)
    # pairwise overlaps are single short runs, one of them through the seam
    assert cov.components((0, 1)) == [((0, 9), (10, 3))]
    assert cov.components((1, 2)) == [((0, 9), (20, 3))]
    assert cov.components((0, 2)) == [((0, 9), (0, 3))]
    # empty triple intersection is what makes the cover good
    assert cov.components((0, 1, 2)) == []


def test_component_domain_unrolls_seam():
    dom = cylinder([0, 1], [[0, 1]], [9, 32])
    cov = circle_cover(dom)
    comp = cov.components((2,))[0]
    chart = cov.component_domain(comp)
    assert chart.kind == "box"
    assert chart.grid == (9, 15)
    lo, hi = chart.bounds[1]
    # arc 2 starts at node 20 and runs past the seam to node 34
    assert lo == pytest.approx(20 / 32)
    assert hi == pytest.approx(34 / 32)


def test_torus_cover_components():
    dom = cylinder([0, 1], [[0, 1], [0, 1]], [5, 32, 32])
    cov = torus_cover(dom)
    assert len(cov) == 4
    # patches 0 and 1 share the full first arc but meet in two runs on the
    # second axis, so their intersection has two components
    comps = cov.components((0, 1))
    assert len(comps) == 2
    seconds = sorted(c[2] for c in comps)
    assert seconds == [(0, 3), (16, 3)]
    # the quadruple overlap splits into a 2x2 grid of small squares
    assert len(cov.components((0, 1, 2, 3))) == 4


def test_restrict_array_broadcast():
    dom = cylinder([0, 1], [[0, 1]], [9, 32])
    cov = circle_cover(dom)
    comp = cov.components((0, 1))[0]
    full = np.arange(9 * 32, dtype=float).reshape(9, 32)
    sub = cov.restrict_array(full, comp)
    assert sub.shape == (9, 3)
    assert np.array_equal(sub[:, 0], full[:, 10])
    # size-1 axes stay size 1 so partition fields keep broadcasting
    rho = np.ones((1, 32))
    assert cov.restrict_array(rho, comp).shape == (1, 3)


def test_slice_between_and_find_parent():
    dom = cylinder([0, 1], [[0, 1]], [9, 32])
    cov = circle_cover(dom)
    parents = cov.components((2,))
    child = cov.components((1, 2))[0]
    par = cov.find_parent(parents, child)
    assert par == parents[0]
    sl = cov.slice_between(par, child)
    assert sl[0] == slice(None)
    assert sl[1] == slice(0, 3)

    other = cov.components((0,))[0]
    with pytest.raises(ValueError, match="not contained"):
        cov.slice_between(child, other)
    with pytest.raises(ValueError, match="no parent"):
        cov.find_parent([child], other)


def test_partition_of_unity():
    for dom, make in [
        (cylinder([0, 1], [[0, 1]], [9, 32]), circle_cover),
        (cylinder([0, 1], [[0, 1], [0, 1]], [5, 16, 16]), torus_cover),
    ]:
        cov = make(dom)
        pou = cov.partition_of_unity()
        assert pou.validate()
        total = sum(pou.fields)
        assert np.max(np.abs(total - 1.0)) <= 1e-12
        for f in pou.fields:
            assert f.min() >= 0.0
            assert f.shape[0] == 1, "bumps must broadcast along t"


def test_bumps_vanish_at_arc_endpoints():
    dom = cylinder([0, 1], [[0, 1]], [9, 32])
    cov = circle_cover(dom)
    pou = cov.partition_of_unity()
    for i in range(len(cov)):
        s, c = cov.patch_runs(i)[1]
        prof = pou.fields[i][0]
        assert prof[s % 32] == 0.0
        assert prof[(s + c - 1) % 32] == 0.0


def test_cover_validation():
    dom = cylinder([0, 1], [[0, 1]], [9, 30])
    with pytest.raises(ValueError, match="multiple of 16"):
        circle_cover(dom)

    dom = cylinder([0, 1], [[0, 1]], [9, 32])
    with pytest.raises(ValueError, match="at least two cells"):
        GoodCover(dom, [None, [(0, 2), (1, 31)]])
    with pytest.raises(ValueError, match="do not cover"):
        GoodCover(dom, [None, [(0, 8), (8, 8)]])
    with pytest.raises(ValueError, match="not periodic"):
        GoodCover(dom, [[(0, 5)], [(0, 20), (16, 20)]])
    box_dom = cylinder([0, 1], [[0, 1]], [9, 32], periodic_fiber=False)
    with pytest.raises(ValueError, match="one periodic axis"):
        circle_cover(box_dom)
    with pytest.raises(ValueError, match="two periodic axes"):
        torus_cover(dom)
