"""Cone homotopy operator K_y and its weighted average A_alpha.

Both act on forms over a convex box by contracting along the straight
lines psi_y(x, t) = t*x + (1-t)*y.  The dt-component of the pullback is

    (psi_y^* omega)_1 = t^(k-1) sum_I f_I(psi) sum_r (-1)^(r-1)
                         (x_{i_r} - y_{i_r}) dx_{I minus i_r}

and K_y omega integrates it over t in [0,1].  A_alpha averages K_y over
centers y against a unit-mass weight; for a uniform weight the y-integral
collapses, after the substitution z = t*x + (1-t)*y, to box integrals of
the coefficients over t*x + (1-t)*D, which cumulative-sum tables evaluate
in O(grid) per quadrature node.
"""

import numpy as np

from ._interp import _axis_antideriv, _axis_table, point_eval, scaled_eval
from .forms import GridForm
from .weights import WeightProfile

DEGREE0_MSG = "K_y is zero on 0-forms; use the identity f - f(y) instead"


def gauss01(n):
    """Gauss-Legendre nodes and weights on (0, 1)."""
    x, w = np.polynomial.legendre.leggauss(int(n))
    return 0.5 * (x + 1.0), 0.5 * w


def _require_box(domain, who):
    if domain.kind != "box" or any(domain.periodic):
        raise ValueError(f"{who} needs a convex box domain (no periodic axes)")


def _inside(domain, pt):
    eps = 1e-12
    return all(
        lo - eps <= c <= hi + eps for c, (lo, hi) in zip(pt, domain.bounds)
    )


def cone_pullback_fiber(omega, y, x, t):
    """Coefficients of (psi_y^* omega)_1 at the point x, parameter t.

    Returns a dict over increasing multi-indices of length k-1.
    """
    dom = omega.domain
    _require_box(dom, "cone pullback")
    if omega.degree == 0:
        raise ValueError(DEGREE0_MSG)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if not _inside(dom, x) or not _inside(dom, y):
        raise ValueError("x or y outside domain")
    psi = t * x + (1.0 - t) * y
    tk = t ** (omega.degree - 1)
    out = {}
    for idx, field in omega.coeffs.items():
        val = point_eval(field, dom, psi)
        for r, a in enumerate(idx):
            sign = -1.0 if r % 2 else 1.0
            jdx = idx[:r] + idx[r + 1 :]
            out[jdx] = out.get(jdx, 0.0) + sign * tk * val * (x[a] - y[a])
    return out


def K_y(omega, y, t_nodes=32):
    """Cone homotopy operator: degree k -> k-1, K_y d + d K_y = id."""
    dom = omega.domain
    _require_box(dom, "K_y")
    if omega.degree == 0:
        raise ValueError(DEGREE0_MSG)
    y = np.asarray(y, dtype=float)
    if not _inside(dom, y):
        raise ValueError("x or y outside domain")
    nodes, wts = gauss01(t_nodes)
    mesh = dom.meshgrid()
    out = GridForm(dom, omega.degree - 1)
    for t, w in zip(nodes, wts):
        scale = w * t ** (omega.degree - 1)
        for idx, field in omega.coeffs.items():
            fval = scaled_eval(field, dom, y, t)
            for r, a in enumerate(idx):
                sign = -1.0 if r % 2 else 1.0
                jdx = idx[:r] + idx[r + 1 :]
                out.coeffs[jdx] += (sign * scale) * fval * (mesh[a] - y[a])
    return out


def _edge_moment_norm(alpha, D, pprime):
    """||alpha(t)|y|||_{p'} for a power law whose pivot is the right t-edge.

    Substituting u = (pivot - t)^(1 - e) with e = lam*p' < 1 removes the
    edge singularity, so plain Gauss-Legendre in u converges.
    """
    lo0, hi0 = D.bounds[0]
    e = alpha.lam * pprime
    big_u = (hi0 - lo0) ** (1.0 - e)
    nodes, wts = gauss01(128)
    tvals = hi0 - (big_u * nodes) ** (1.0 / (1.0 - e))
    axes = [D.axis_coords(a) for a in range(1, D.dim)]
    if axes:
        fibersq = sum(m**2 for m in np.meshgrid(*axes, indexing="ij"))
        g = (tvals.reshape((-1,) + (1,) * len(axes)) ** 2 + fibersq) ** (
            pprime / 2.0
        )
        for a in range(D.dim - 1, 0, -1):
            if D.periodic[a]:
                g = g.sum(axis=-1) * D.spacing(a)
            else:
                g = np.trapezoid(g, dx=D.spacing(a), axis=-1)
    else:
        g = np.abs(tvals) ** pprime
    total = big_u / (1.0 - e) * float((wts * g).sum())
    return total ** (1.0 / pprime)


def check_admissible_weight(alpha, D, p):
    """Admissibility of a centering weight: unit mass and finite dual norms.

    Checks int alpha = 1 (tol 1e-8), ||alpha||_{p'} < inf and
    ||alpha(y)|y||_{p'} < inf with p' = p/(p-1) (sup norm when p = 1).
    Power-law divergence is decided symbolically, not by overflow; a power
    law pivoting at the right t-edge is never sampled on the closed grid.
    """
    p = float(p)
    if p < 1:
        raise ValueError("p must be >= 1")
    pprime = np.inf if p == 1.0 else p / (p - 1.0)

    violations = []
    lo0, hi0 = D.bounds[0]
    fiber_vol = 1.0
    for lo, hi in D.bounds[1:]:
        fiber_vol *= hi - lo

    if alpha.kind == "powerlaw" and alpha.lam > 0 and alpha.pivot <= hi0:
        if alpha.power_integral_finite(1.0, lo0, hi0):
            mass = fiber_vol * (hi0 - lo0) ** (1.0 - alpha.lam) / (1.0 - alpha.lam)
        else:
            mass = np.inf
        if np.isinf(pprime) or not alpha.power_integral_finite(pprime, lo0, hi0):
            anorm = mnorm = np.inf
        else:
            e = alpha.lam * pprime
            anorm = (fiber_vol * (hi0 - lo0) ** (1.0 - e) / (1.0 - e)) ** (
                1.0 / pprime
            )
            mnorm = _edge_moment_norm(alpha, D, pprime)
    else:
        field = alpha.sample_on(D)
        mass = D.integrate(field)
        moment = np.sqrt(sum(c**2 for c in D.meshgrid()))
        if np.isinf(pprime):
            anorm = float(field.max())
            mnorm = float((field * moment).max())
        else:
            anorm = D.integrate(field**pprime) ** (1.0 / pprime)
            mnorm = D.integrate((field * moment) ** pprime) ** (1.0 / pprime)

    if not (np.isfinite(mass) and abs(mass - 1.0) <= 1e-8):
        violations.append(f"unit mass (got {mass:.6g})")
    if not np.isfinite(anorm):
        violations.append("||alpha||_p' divergent")
    if not np.isfinite(mnorm):
        violations.append("||alpha |y|||_p' divergent")

    return {
        "admissible": not violations,
        "violations": violations,
        "mass": mass,
        "alpha_norm": anorm,
        "moment_norm": mnorm,
        "pprime": float(pprime),
    }


def _box_integral(field, domain, t, moment_axis=None):
    """Integral of the interpolant over the shrunken box t*x + (1-t)*D.

    Separable because along each axis the box endpoints
    t*x_a + (1-t)*lo_a and t*x_a + (1-t)*hi_a depend on x_a alone; the
    result is a full grid field indexed by x.  moment_axis weights the
    integrand by that coordinate (for the first-moment terms).
    """
    out = field
    for ax in range(domain.dim):
        lo, hi = domain.bounds[ax]
        xs = domain.axis_coords(ax)
        mom = ax == moment_axis
        table = _axis_table(out, domain, ax, mom)
        upper = _axis_antideriv(table, out, domain, ax, t * xs + (1.0 - t) * hi, mom)
        lower = _axis_antideriv(table, out, domain, ax, t * xs + (1.0 - t) * lo, mom)
        out = upper - lower
    return out


def _a_alpha_uniform(omega, t_nodes):
    """A_alpha for the uniform unit-mass weight, via separable box integrals.

    With alpha = 1/|D| the substitution z = t*x + (1-t)*y turns the
    y-average of K_y into

        (1-t)^(-(dim+1)) / |D| * [x_a * int_B f_I - int_B z_a f_I],

    B = t*x + (1-t)*D, which _box_integral evaluates for all x at once.
    """
    dom = omega.domain
    k = omega.degree
    mesh = dom.meshgrid()
    nodes, wts = gauss01(t_nodes)
    out = GridForm(dom, k - 1)
    for t, w in zip(nodes, wts):
        pref = w * t ** (k - 1) / (dom.volume * (1.0 - t) ** (dom.dim + 1))
        for idx, field in omega.coeffs.items():
            s_box = _box_integral(field, dom, t)
            for r, a in enumerate(idx):
                sign = -1.0 if r % 2 else 1.0
                jdx = idx[:r] + idx[r + 1 :]
                t_box = _box_integral(field, dom, t, moment_axis=a)
                out.coeffs[jdx] += (sign * pref) * (mesh[a] * s_box - t_box)
    return out


def A_alpha(omega, alpha, t_nodes=16, y_grid=None):
    """Averaged homotopy operator A_alpha omega = int alpha(y) K_y omega dy.

    alpha must be a unit-mass weight on the (box) domain.  The uniform
    weight takes the O(grid) cumulative-table path; other weights fall
    back to a tensor-trapezoid y-integration of K_y on a y_grid (default
    at most 9 points per axis), which is markedly slower.
    """
    dom = omega.domain
    _require_box(dom, "A_alpha")
    if omega.degree == 0:
        raise ValueError(DEGREE0_MSG)
    if not isinstance(alpha, WeightProfile):
        raise TypeError("alpha must be a WeightProfile")

    uniform = alpha.kind == "constant" and abs(alpha.value * dom.volume - 1.0) <= 1e-12
    if uniform and y_grid is None:
        return _a_alpha_uniform(omega, t_nodes)

    if y_grid is None:
        y_grid = [min(m, 9) for m in dom.grid]
    ydom = dom.with_grid(tuple(int(m) for m in y_grid))
    aw = alpha.sample_on(ydom)
    wts = np.ones(ydom.grid)
    for ax in range(ydom.dim):
        shape = [1] * ydom.dim
        shape[ax] = -1
        wts = wts * ydom.quad_weights(ax).reshape(shape)
    mass = float((aw * wts).sum())
    if abs(mass - 1.0) > 1e-8:
        raise ValueError(f"alpha is not unit mass on the y-grid (got {mass:.6g})")
    out = GridForm(dom, omega.degree - 1)
    ypts = np.stack([c.ravel() for c in ydom.meshgrid()], axis=-1)
    for yw, y in zip((aw * wts).ravel(), ypts):
        if yw == 0.0:
            continue
        out = out + yw * K_y(omega, y, t_nodes=t_nodes)
    return out
