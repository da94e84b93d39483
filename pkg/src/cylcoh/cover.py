"""Fiber covers of periodic cylinders and their partitions of unity.

Patches are products of node-index runs (arcs) on the periodic fiber
axes.  A run (start, count) means nodes start .. start+count-1 taken mod
the axis size; unrolling a run gives a plain box chart, so every patch
and every intersection component is a box on which the cone-type
operators apply.  All restrictions are exact index slices, which is what
keeps the gluing recursion free of resampling error.
"""

import itertools
import math

import numpy as np

from .domain import box


def _mask_runs(mask):
    """Maximal circular runs of True in a boolean mask, as (start, count)."""
    m = len(mask)
    if mask.all():
        return [(0, m)]
    if not mask.any():
        return []
    starts = np.where(mask & ~np.roll(mask, 1))[0]
    out = []
    for s in starts:
        c = 0
        while mask[(s + c) % m]:
            c += 1
        out.append((int(s), c))
    return sorted(out)


def _run_mask(run, m):
    mask = np.zeros(m, dtype=bool)
    mask[(run[0] + np.arange(run[1])) % m] = True
    return mask


def _bump_values(run, m):
    """C^2 bump profile of an arc at the axis nodes, zero outside.

    u(1-u) cubed has triple zeros at the arc endpoints, so products
    extended by zero stay twice differentiable across the seam.
    """
    s, c = run
    ell = (np.arange(m) - s) % m
    vals = np.zeros(m)
    inside = ell <= c - 1
    u = ell[inside] / (c - 1)
    vals[inside] = (u * (1.0 - u)) ** 3
    return vals


class PartitionOfUnity:
    """Normalized bump functions rho_j subordinate to the cover patches,
    sampled on the fiber grid and lifted t-independently (the arrays
    broadcast along every non-periodic axis)."""

    def __init__(self, cover, fields):
        self.cover = cover
        self.fields = fields

    def validate(self):
        total = sum(self.fields)
        if np.max(np.abs(total - 1.0)) > 1e-10:
            raise ValueError("partition does not sum to 1")
        for i, f in enumerate(self.fields):
            if f.min() < 0:
                raise ValueError("negative bump value")
            runs = self.cover.patch_runs(i)
            for ax in range(self.cover.domain.dim):
                if not self.cover.domain.periodic[ax]:
                    continue
                m = self.cover.domain.grid[ax]
                outside = ~_run_mask(runs[ax], m)
                sl = [0] * f.ndim
                sl[ax] = slice(None)
                prof = np.max(np.abs(f), axis=tuple(a for a in range(f.ndim) if a != ax))
                if np.any(prof[outside] > 0):
                    raise ValueError(f"bump {i} leaks outside its patch on axis {ax}")
        return True


class GoodCover:
    """Cover of a cylinder by products of arcs on its periodic axes.

    axis_arcs has one entry per axis: None on non-periodic axes (patches
    span them fully), a list of (start, count) runs on periodic ones.
    Patches are all combinations of one arc choice per periodic axis.
    Intersections may be disconnected; everything downstream works per
    connected component, each of which is again a box.
    """

    def __init__(self, domain, axis_arcs):
        if len(axis_arcs) != domain.dim:
            raise ValueError("need one arc list per axis")
        for ax, arcs in enumerate(axis_arcs):
            if domain.periodic[ax] and not arcs:
                raise ValueError(f"periodic axis {ax} needs arcs")
            if not domain.periodic[ax] and arcs is not None:
                raise ValueError(f"axis {ax} is not periodic")
        self.domain = domain
        self.axis_arcs = axis_arcs
        choices = [range(len(a)) if a is not None else [None] for a in axis_arcs]
        self.patch_labels = list(itertools.product(*choices))
        self._check_interior_coverage()

    def __len__(self):
        return len(self.patch_labels)

    def _check_interior_coverage(self):
        for ax, arcs in enumerate(self.axis_arcs):
            if arcs is None:
                continue
            m = self.domain.grid[ax]
            covered = np.zeros(m, dtype=bool)
            for s, c in arcs:
                if c < 3 or c > m:
                    raise ValueError("arc must span at least two cells")
                covered[(s + 1 + np.arange(c - 2)) % m] = True
            if not covered.all():
                raise ValueError(f"arc interiors do not cover axis {ax}")

    def patch_runs(self, i):
        label = self.patch_labels[i]
        runs = []
        for ax in range(self.domain.dim):
            if label[ax] is None:
                runs.append((0, self.domain.grid[ax]))
            else:
                runs.append(self.axis_arcs[ax][label[ax]])
        return tuple(runs)

    def components(self, I):
        """Connected components of V_I as tuples of per-axis runs."""
        per_axis = []
        for ax in range(self.domain.dim):
            if self.axis_arcs[ax] is None:
                per_axis.append([(0, self.domain.grid[ax])])
                continue
            m = self.domain.grid[ax]
            mask = np.ones(m, dtype=bool)
            for i in I:
                mask &= _run_mask(self.patch_runs(i)[ax], m)
            runs = _mask_runs(mask)
            if not runs:
                return []
            per_axis.append(runs)
        return [tuple(c) for c in itertools.product(*per_axis)]

    def component_domain(self, comp):
        """The unrolled box chart of one component."""
        bounds = []
        grid = []
        for ax, (s, c) in enumerate(comp):
            lo, hi = self.domain.bounds[ax]
            if not self.domain.periodic[ax]:
                bounds.append((lo, hi))
                grid.append(self.domain.grid[ax])
                continue
            if c < 2:
                raise ValueError("component has no interior; refine the grid")
            h = self.domain.spacing(ax)
            bounds.append((lo + s * h, lo + (s + c - 1) * h))
            grid.append(c)
        return box(bounds, tuple(grid))

    def _index_arrays(self, comp):
        out = []
        for ax, (s, c) in enumerate(comp):
            m = self.domain.grid[ax]
            if self.domain.periodic[ax]:
                out.append((s + np.arange(c)) % m)
            else:
                out.append(np.arange(m))
        return out

    def restrict_array(self, arr, comp):
        """Slice an array to a component; size-1 axes stay broadcastable."""
        idxs = []
        for ax, run in enumerate(comp):
            if arr.shape[ax] == 1:
                idxs.append(np.zeros(1, dtype=int))
            elif self.domain.periodic[ax]:
                s, c = run
                idxs.append((s + np.arange(c)) % self.domain.grid[ax])
            else:
                idxs.append(np.arange(self.domain.grid[ax]))
        return arr[np.ix_(*idxs)]

    def slice_between(self, parent, child):
        """Index slices picking the child component out of the parent's
        unrolled array.  child must be contained in parent."""
        slices = []
        for ax in range(self.domain.dim):
            ps, pc = parent[ax]
            cs, cc = child[ax]
            if not self.domain.periodic[ax]:
                slices.append(slice(None))
                continue
            m = self.domain.grid[ax]
            off = (cs - ps) % m
            if off + cc > pc:
                raise ValueError("component is not contained in the parent")
            slices.append(slice(off, off + cc))
        return tuple(slices)

    def find_parent(self, parents, child):
        """The unique component among `parents` containing `child`."""
        for par in parents:
            try:
                self.slice_between(par, child)
            except ValueError:
                continue
            return par
        raise ValueError("no parent component contains the child")

    def partition_of_unity(self):
        dim = self.domain.dim
        bump_tables = []
        for ax, arcs in enumerate(self.axis_arcs):
            if arcs is None:
                bump_tables.append(None)
                continue
            bump_tables.append([_bump_values(run, self.domain.grid[ax]) for run in arcs])
        fields = []
        for label in self.patch_labels:
            f = np.ones([1] * dim)
            for ax in range(dim):
                if label[ax] is None:
                    continue
                shape = [1] * dim
                shape[ax] = -1
                f = f * bump_tables[ax][label[ax]].reshape(shape)
            fields.append(f)
        total = sum(fields)
        if total.min() <= 0:
            raise ValueError("cover bumps leave part of the fiber uncovered")
        return PartitionOfUnity(self, [f / total for f in fields])


def _granularity(domain, ax):
    m = domain.grid[ax]
    if m % 16:
        raise ValueError("periodic axis size must be a multiple of 16")
    return m // 16


def circle_cover(domain):
    """Three arcs on the unique periodic axis; pairwise overlaps are single
    runs and the triple intersection is empty, so the nerve is a circle."""
    per = [ax for ax in range(domain.dim) if domain.periodic[ax]]
    if len(per) != 1:
        raise ValueError("circle cover needs exactly one periodic axis")
    r = _granularity(domain, per[0])
    arcs = [(0, 6 * r + 1), (5 * r, 6 * r + 1), (10 * r, 7 * r + 1)]
    return GoodCover(domain, [arcs if ax == per[0] else None for ax in range(domain.dim)])


def torus_cover(domain):
    """Two overlapping arcs per periodic axis, four patches in total.

    Pairwise intersections on each axis have two runs, so patch overlaps
    are disconnected; components carry the bookkeeping.
    """
    per = [ax for ax in range(domain.dim) if domain.periodic[ax]]
    if len(per) != 2:
        raise ValueError("torus cover needs exactly two periodic axes")
    axis_arcs = []
    for ax in range(domain.dim):
        if ax in per:
            r = _granularity(domain, ax)
            axis_arcs.append([(0, 9 * r + 1), (8 * r, 9 * r + 1)])
        else:
            axis_arcs.append(None)
    return GoodCover(domain, axis_arcs)
