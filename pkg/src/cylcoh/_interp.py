"""Separable Lagrange interpolation of sampled fields.

Point evaluation uses a cubic 4-point stencil per axis (one-sided at the
closed ends, wrapped on periodic axes) so that finite differences of
interpolated quantities stay second-order accurate; axes shorter than 4
nodes fall back to linear.  The antiderivative tables further down stay
piecewise-linear on purpose: they make the uniform-weight averaging
pipeline exact on multilinear coefficient fields.
"""

import itertools

import numpy as np


def _axis_locate(domain, ax, coords):
    """Per-axis cell index and fraction, clamped (wrapped when periodic)."""
    lo, hi = domain.bounds[ax]
    m = domain.grid[ax]
    h = domain.spacing(ax)
    c = np.asarray(coords, dtype=float)
    if domain.periodic[ax]:
        u = np.mod(c - lo, hi - lo) / h
        i = np.minimum(u.astype(int), m - 1)
        return i, (i + 1) % m, u - i
    u = (np.clip(c, lo, hi) - lo) / h
    i = np.clip(u.astype(int), 0, m - 2)
    return i, i + 1, u - i


def _axis_stencil(domain, ax, coords):
    """Interpolation taps along one axis: (indices, weights), shape (taps, n).

    Cubic Lagrange on 4 consecutive nodes where the axis allows it,
    otherwise the 2-point linear stencil.
    """
    m = domain.grid[ax]
    if m < 4:
        i, ip1, frac = _axis_locate(domain, ax, coords)
        return np.stack([i, ip1]), np.stack([1.0 - frac, frac])
    lo, hi = domain.bounds[ax]
    h = domain.spacing(ax)
    c = np.asarray(coords, dtype=float)
    if domain.periodic[ax]:
        u = np.mod(c - lo, hi - lo) / h
        b = np.minimum(np.floor(u).astype(int), m - 1)
        start = b - 1
        idx = np.stack([(start + r) % m for r in range(4)])
    else:
        u = (np.clip(c, lo, hi) - lo) / h
        b = np.minimum(u.astype(int), m - 2)
        start = np.clip(b - 1, 0, m - 4)
        idx = np.stack([start + r for r in range(4)])
    xi = u - start
    wts = np.stack([
        -(xi - 1.0) * (xi - 2.0) * (xi - 3.0) / 6.0,
        0.5 * xi * (xi - 2.0) * (xi - 3.0),
        -0.5 * xi * (xi - 1.0) * (xi - 3.0),
        xi * (xi - 1.0) * (xi - 2.0) / 6.0,
    ])
    return idx, wts


def point_eval(field, domain, pts):
    """Evaluate a sampled scalar field at points of shape (m, dim) or (dim,)."""
    pts = np.asarray(pts, dtype=float)
    squeeze = pts.ndim == 1
    pts = np.atleast_2d(pts)
    stencils = [_axis_stencil(domain, ax, pts[:, ax]) for ax in range(domain.dim)]
    out = np.zeros(pts.shape[0])
    for taps in itertools.product(*[range(len(s[0])) for s in stencils]):
        w = np.ones(pts.shape[0])
        ix = []
        for ax, tap in enumerate(taps):
            idx, wts = stencils[ax]
            w = w * wts[tap]
            ix.append(idx[tap])
        out += w * field[tuple(ix)]
    return out[0] if squeeze else out


def take_interp(table, domain, ax, coords):
    """Interpolate `table` along one axis at per-slot coordinates.

    coords is 1-D; slot r of the output axis holds the table interpolated
    at coords[r], so axis ax ends up with len(coords) entries.
    """
    idx, wts = _axis_stencil(domain, ax, coords)
    shape = [1] * table.ndim
    shape[ax] = -1
    out = wts[0].reshape(shape) * np.take(table, idx[0], axis=ax)
    for r in range(1, len(idx)):
        out += wts[r].reshape(shape) * np.take(table, idx[r], axis=ax)
    return out


def scaled_eval(field, domain, y, t):
    """Field values at t*x + (1-t)*y for every grid point x, separably."""
    out = field
    for ax in range(domain.dim):
        c = t * domain.axis_coords(ax) + (1.0 - t) * y[ax]
        out = take_interp(out, domain, ax, c)
    return out


def _axis_table(field, domain, ax, moment):
    """Node table of integrals from lo of the piecewise-linear interpolant
    (weighted by the coordinate when moment is set)."""
    lo, hi = domain.bounds[ax]
    h = domain.spacing(ax)
    m = domain.grid[ax]
    sl_lo = [slice(None)] * field.ndim
    sl_hi = [slice(None)] * field.ndim
    sl_lo[ax] = slice(0, m - 1)
    sl_hi[ax] = slice(1, m)
    f_lo = field[tuple(sl_lo)]
    df = field[tuple(sl_hi)] - f_lo
    if moment:
        xs = lo + h * np.arange(m - 1)
        shape = [1] * field.ndim
        shape[ax] = -1
        cells = xs.reshape(shape) * h * (f_lo + 0.5 * df) + h * h * (
            0.5 * f_lo + df / 3.0
        )
    else:
        cells = h * (f_lo + 0.5 * df)
    pad_shape = list(field.shape)
    pad_shape[ax] = 1
    return np.concatenate([np.zeros(pad_shape), np.cumsum(cells, axis=ax)], axis=ax)


def _axis_antideriv(table, field, domain, ax, coords, moment):
    """Integral of the interpolant of `field` from lo to coords[r], placed
    at slot r of axis ax.  Exact for the interpolant, which keeps the
    whole box-integral pipeline exact on multilinear coefficient fields."""
    lo, hi = domain.bounds[ax]
    h = domain.spacing(ax)
    i, ip1, theta = _axis_locate(domain, ax, coords)
    shape = [1] * field.ndim
    shape[ax] = -1
    th = theta.reshape(shape)
    gi = np.take(table, i, axis=ax)
    fi = np.take(field, i, axis=ax)
    dfi = np.take(field, ip1, axis=ax) - fi
    partial = h * (th * fi + 0.5 * th * th * dfi)
    if moment:
        xi = (lo + h * i).reshape(shape)
        partial = xi * partial + h * h * (0.5 * th * th * fi + th * th * th * dfi / 3.0)
    return gi + partial
