"""Gluing local primitives on covered cylinders.

The pipeline follows the usual double-complex walk: local primitives on
patches (descent), a constant correction killing the degree-0 cocycle,
then partition-of-unity solves back up to a single global form (ascent).
Cochains are stored per (index tuple, connected component); components
are boxes, so every local solve is a cone-operator call on a box chart.
"""

import itertools
import math

import numpy as np

from .constants import Q_factor, _t_axis_norm
from .forms import GridForm, exterior_derivative, lp_norm
from .homotopy import A_alpha
from .weights import WeightProfile


class HypothesisFailure(ValueError):
    """A gluing hypothesis (weight norm finiteness) does not hold."""


class CechCochain:
    """Degree-k forms indexed by increasing patch tuples and components.

    data maps (I, comp) to a GridForm on the component's unrolled box;
    depth is len(I).  Depth-0 objects are represented by a bare GridForm
    on the full domain, not by this class.
    """

    def __init__(self, cover, depth, degree, data):
        self.cover = cover
        self.depth = depth
        self.degree = degree
        self.data = data

    def entries(self):
        return sorted(self.data.items(), key=lambda kv: kv[0])

    def max_abs(self):
        return max((f.max_abs() for _, f in self.data.items()), default=0.0)

    def map(self, fn):
        return CechCochain(
            self.cover, self.depth, self.degree, {key: fn(f) for key, f in self.data.items()}
        )

    def d(self):
        out = self.map(exterior_derivative)
        out.degree = self.degree + 1
        return out

    def __sub__(self, other):
        if set(self.data) != set(other.data):
            raise ValueError("cochain keys do not match")
        return CechCochain(
            self.cover,
            self.depth,
            self.degree,
            {key: f - other.data[key] for key, f in self.data.items()},
        )

    def components_of(self, I):
        return [comp for (J, comp) in self.data if J == I]

    def __repr__(self):
        return f"CechCochain(depth={self.depth}, degree={self.degree}, entries={len(self.data)})"


def _restrict_global(cover, form, comp):
    dom = cover.component_domain(comp)
    idxs = cover._index_arrays(comp)
    coeffs = {idx: arr[np.ix_(*idxs)] for idx, arr in form.coeffs.items()}
    return GridForm(dom, form.degree, coeffs)


def _restrict_between(cover, form, parent_comp, child_comp):
    dom = cover.component_domain(child_comp)
    sl = cover.slice_between(parent_comp, child_comp)
    coeffs = {idx: arr[sl] for idx, arr in form.coeffs.items()}
    return GridForm(dom, form.degree, coeffs)


def coboundary(lam, cover=None):
    """Alternating sum of restrictions, one Cech depth up.

    Accepts a global GridForm as the depth-0 case (pass the cover along),
    where the result is plain restriction to every patch.
    """
    if isinstance(lam, GridForm):
        if cover is None:
            raise TypeError("depth-0 coboundary needs the cover")
        return coboundary_global(cover, lam)
    cover = lam.cover
    l = len(cover)
    data = {}
    for J in itertools.combinations(range(l), lam.depth + 1):
        for comp in cover.components(J):
            acc = None
            for r in range(len(J)):
                sub = J[:r] + J[r + 1 :]
                parent = cover.find_parent(lam.components_of(sub), comp)
                piece = _restrict_between(cover, lam.data[(sub, parent)], parent, comp)
                if r % 2:
                    piece = -piece
                acc = piece if acc is None else acc + piece
            data[(J, comp)] = acc
    return CechCochain(cover, lam.depth + 1, lam.degree, data)


def coboundary_global(cover, form):
    """Depth 0 to depth 1: restrict a global form to every patch."""
    data = {}
    for i in range(len(cover)):
        for comp in cover.components((i,)):
            data[((i,), comp)] = _restrict_global(cover, form, comp)
    return CechCochain(cover, 1, form.degree, data)


def _cocycle_residual(lam):
    """Sup of the coboundary, skipping one node at each cut edge.

    Entries carry numeric d's of partition-weighted fields; at a node on
    the rim of an intersection the two parent charts differentiate with
    different stencils (one-sided vs central across the rim), which is a
    chart artifact, not a cocycle defect.  One interior node in from the
    rim both charts use the same central stencil, so the residual there
    measures the actual mismatch.
    """
    up = coboundary(lam)
    cover = lam.cover
    worst = 0.0
    for (J, comp), form in up.data.items():
        trims = []
        for ax, (start, count) in enumerate(comp):
            if count < cover.domain.grid[ax]:
                trims.append(slice(1, count - 1))
            else:
                trims.append(slice(None))
        sl = tuple(trims)
        for arr in form.coeffs.values():
            sub = arr[sl]
            if sub.size:
                worst = max(worst, float(np.max(np.abs(sub))))
    scale = max(lam.max_abs(), 1e-30)
    return worst / scale


def solve_coboundary(lam, pou, tol=1e-8):
    """Partition-of-unity preimage: kappa with coboundary(kappa) = lam.

    Requires lam to be a cocycle; the weighted sum kappa_I = sum_j
    rho_j lam_{jI} (extended by zero, sign from sorting j into I) is the
    classical formula and is exact at grid nodes because each rho_j
    vanishes on its patch boundary nodes.
    """
    cover = lam.cover
    res = _cocycle_residual(lam)
    if res > tol:
        raise ValueError(f"input is not a cocycle: coboundary residual {res:.3e}")
    l = len(cover)
    if lam.depth == 1:
        out = GridForm.zeros(cover.domain, lam.degree)
        for ((j,), comp), form in lam.entries():
            rho = cover.restrict_array(pou.fields[j], comp)
            idxs = cover._index_arrays(comp)
            for idx, arr in form.coeffs.items():
                out.coeffs[idx][np.ix_(*idxs)] += rho * arr
        return out
    data = {}
    for I in itertools.combinations(range(l), lam.depth - 1):
        for comp in cover.components(I):
            dom = cover.component_domain(comp)
            acc = GridForm.zeros(dom, lam.degree)
            for j in range(l):
                if j in I:
                    continue
                K = tuple(sorted(I + (j,)))
                sign = (-1) ** K.index(j)
                for kcomp in lam.components_of(K):
                    try:
                        sl = cover.slice_between(comp, kcomp)
                    except ValueError:
                        continue
                    rho = cover.restrict_array(pou.fields[j], kcomp)
                    form = lam.data[(K, kcomp)]
                    for idx, arr in form.coeffs.items():
                        acc.coeffs[idx][sl] += sign * rho * arr
            data[(I, comp)] = acc
    return CechCochain(cover, lam.depth - 1, lam.degree, data)


def _uniform_solve(form, t_nodes):
    alpha = WeightProfile.constant(1.0 / form.domain.volume)
    return A_alpha(form, alpha, t_nodes=t_nodes)


def descend_xi(omega, cover, t_nodes=32, tol=1e-6):
    """Local primitives down the double complex: xi^s of degree k-1-s with
    d(xi^s) = (delta xi^{s-1}) per component, starting from omega itself."""
    k = omega.degree
    if k < 1:
        raise ValueError("need a form of degree at least 1 to glue")
    scale = max(omega.max_abs(), 1e-30)
    if k < omega.domain.dim:
        closed_res = exterior_derivative(omega).max_abs() / scale
        if closed_res > tol:
            raise ValueError(f"omega is not closed: d-residual {closed_res:.3e}")
    xi_list = []
    lam = coboundary_global(cover, omega)
    for s in range(k):
        data = {}
        lam_scale = max(lam.max_abs(), 1e-30)
        for (I, comp), form in lam.entries():
            xi = _uniform_solve(form, t_nodes)
            res = (exterior_derivative(xi) - form).max_abs() / lam_scale
            if res > tol:
                raise ValueError(
                    f"patch solve failed at depth {s} on V_{I}: residual {res:.3e}"
                )
            data[(I, comp)] = xi
        xi_list.append(CechCochain(cover, lam.depth, k - 1 - s, data))
        if s < k - 1:
            lam = coboundary(xi_list[-1])
    return xi_list


def constant_correction(xi_last, tol=1e-8):
    """Constant cochain c with coboundary(c) = coboundary(xi^{k-1}).

    The right side has locally constant components whenever omega was
    exact; the minimal-norm least-squares solution over the nerve
    coboundary matrix plays the role of the cited existence lemma.
    """
    cover = xi_last.cover
    lam = coboundary(xi_last)
    unknowns = sorted(xi_last.data.keys())
    col = {key: i for i, key in enumerate(unknowns)}
    rows = lam.entries()
    A = np.zeros((len(rows), len(unknowns)))
    b = np.zeros(len(rows))
    drift = 0.0
    for rix, ((J, comp), form) in enumerate(rows):
        vals = form.coeffs[()]
        mean = float(vals.mean())
        drift = max(drift, float(np.max(np.abs(vals - mean))))
        b[rix] = mean
        for r in range(len(J)):
            sub = J[:r] + J[r + 1 :]
            parent = cover.find_parent(xi_last.components_of(sub), comp)
            A[rix, col[(sub, parent)]] += (-1) ** r
    if rows:
        sol, *_ = np.linalg.lstsq(A, b, rcond=None)
        res = float(np.max(np.abs(A @ sol - b)))
    else:
        sol = np.zeros(len(unknowns))
        res = 0.0
    if res > tol * max(1.0, float(np.max(np.abs(b))) if len(b) else 1.0):
        raise ValueError(f"cover cocycle obstruction: residual {res:.3e}")
    data = {}
    for key in unknowns:
        dom = cover.component_domain(key[1])
        c = GridForm.zeros(dom, 0)
        c.coeffs[()] += sol[col[key]]
        data[key] = c
    out = CechCochain(cover, xi_last.depth, 0, data)
    return out, {"lstsq_residual": res, "constancy_drift": drift}


def ascend_x(xi_list, c, pou, tol=1e-8):
    """Back up the double complex to a single global primitive."""
    k = len(xi_list)
    try:
        x = solve_coboundary(xi_list[k - 1] - c, pou, tol=tol)
    except ValueError as e:
        raise ValueError(f"ascent stage s={k - 1}: {e}") from e
    for s in range(k - 2, -1, -1):
        rhs = xi_list[s] - x.d()
        try:
            x = solve_coboundary(rhs, pou, tol=tol)
        except ValueError as e:
            raise ValueError(f"ascent stage s={s}: {e}") from e
    return x


def glue_primitive(omega, cover, beta=None, gamma=None, p=2.0, q=2.0, t_nodes=32, tol=1e-6):
    """End-to-end gluing with hypothesis checks and a stage report.

    Returns (xi, report) with d(xi) = omega on the full domain.  Weight
    hypotheses that fail produce a HypothesisFailure naming the culprit
    instead of a numeric answer.
    """
    domain = omega.domain
    lo0, hi0 = domain.bounds[0]
    failures = []
    beta = beta if beta is not None else WeightProfile.constant(1.0)
    beta_norm = _t_axis_norm(beta, q, lo0, hi0)
    if not math.isfinite(beta_norm):
        failures.append("||beta||_{L^q[a,b)} divergent")
    tbeta_norm = _t_axis_norm(beta, q, lo0, hi0, moment_t=True)
    if not math.isfinite(tbeta_norm):
        failures.append("||t beta(t)||_{L^q[a,b)} divergent")
    q_factor = None
    if gamma is not None:
        pbar_tried = sorted({1.0, 0.5 * (1.0 + p), p})
        q_vals = {pb: Q_factor(gamma, p, pb, domain) for pb in pbar_tried}
        finite = {pb: v for pb, v in q_vals.items() if math.isfinite(v)}
        if finite:
            q_factor = min(finite.values())
        else:
            failures.append("||1/gamma|| divergent for every tried pbar")
    if failures:
        raise HypothesisFailure("; ".join(failures))

    xi_list = descend_xi(omega, cover, t_nodes=t_nodes, tol=tol)
    c, corr_info = constant_correction(xi_list[-1], tol=max(tol, 1e-8))
    pou = cover.partition_of_unity()
    xi = ascend_x(xi_list, c, pou, tol=tol)

    resid = (exterior_derivative(xi) - omega).max_abs()
    scale = max(omega.max_abs(), 1e-30)
    beta_w = None if beta.kind == "constant" and beta.value == 1.0 else beta
    gamma_w = gamma
    xi_norm = lp_norm(xi, q, weight=beta_w)
    omega_norm = lp_norm(omega, p, weight=gamma_w)
    report = {
        "residual": resid,
        "relative_residual": resid / scale,
        "xi_norm_q_beta": xi_norm,
        "omega_norm_p_gamma": omega_norm,
        "norm_ratio": xi_norm / max(omega_norm, 1e-30),
        "beta_norm": beta_norm,
        "tbeta_norm": tbeta_norm,
        "constant_correction": corr_info,
        "patches": len(cover),
        "stages": len(xi_list),
    }
    if q_factor is not None:
        report["Q"] = q_factor
    return xi, report
