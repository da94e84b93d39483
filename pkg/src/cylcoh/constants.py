"""Sobolev-Poincare constants for the averaged homotopy operator.

Everything reduces to the t-integral

    C = int_0^1 sup_z ||beta(x) 1_{tx+(1-t)D}(z)||_{L^q(D,dx)}
        t^k (1-t)^(-n/p) dt

(optionally with an |x| moment on beta) plus the dual norms of the
centering weight alpha and, in the two-weight version, the norm of
1/gamma.  The endpoint t -> 1 is singular, so the quadrature uses a
graded mesh and a symbolic exponent pre-check decides finiteness before
any numbers are trusted.
"""

import math

import numpy as np

from ._interp import _axis_antideriv, _axis_locate, _axis_table
from .weights import WeightProfile

DIVERGENCE_THRESHOLD = 1e6


class ConstantRequest:
    """Inputs for the constant evaluations.

    n is the fiber dimension used by the cylinder gate; the integrals
    themselves run over D and use its ambient dimension.
    """

    def __init__(self, k, p, q, D, n=None, pbar=None, beta=None, gamma=None, alpha=None):
        self.k = int(k)
        self.p = float(p)
        self.q = float(q)
        if not 1 <= self.p <= self.q:
            raise ValueError("need q >= p >= 1")
        self.D = D
        self.n = D.dim - 1 if n is None else int(n)
        self.pbar = self.p if pbar is None else float(pbar)
        if not 1 <= self.pbar <= self.p:
            raise ValueError("need 1 <= pbar <= p")
        self.beta = beta if beta is not None else WeightProfile.constant(1.0)
        self.gamma = gamma
        self.alpha = alpha

    def gates(self):
        """Both regime gates, recorded side by side.

        The convex-set route needs 1/p - 1/q < 1/dim(D); the cylinder
        route needs 1/p - 1/q < (q-1)/(q(n+1)).  Scenarios report which
        of the two they pass.
        """
        lhs = 1.0 / self.p - 1.0 / self.q
        return {
            "prop-convex": lhs < 1.0 / self.D.dim,
            "thm-cylinder": lhs < (self.q - 1.0) / (self.q * (self.n + 1.0)),
            "lhs": lhs,
        }

    def to_dict(self):
        d = {
            "k": self.k,
            "p": self.p,
            "q": self.q,
            "pbar": self.pbar,
            "n": self.n,
            "domain": self.D.to_dict(),
            "beta": self.beta.to_dict(),
        }
        if self.gamma is not None:
            d["gamma"] = self.gamma.to_dict()
        if self.alpha is not None:
            d["alpha"] = self.alpha.to_dict()
        return d

    @classmethod
    def from_dict(cls, d, domain_cls):
        def w(key):
            return WeightProfile.from_dict(d[key]) if key in d else None

        return cls(
            d["k"],
            d["p"],
            d["q"],
            domain_cls.from_dict(d["domain"]),
            n=d.get("n"),
            pbar=d.get("pbar"),
            beta=w("beta"),
            gamma=w("gamma"),
            alpha=w("alpha"),
        )


def _pl_primitive(left, right, e):
    """int_right^left u^(e-1) du, elementwise, tolerating zero endpoints
    (an infinite value just means the divergent branch was reached)."""
    left = np.asarray(left, dtype=float)
    right = np.asarray(right, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        if e == 0.0:
            return np.log(left) - np.log(right)
        return (left**e - right**e) / e


def _pl_moments(left, right, mu):
    """(int u^-mu du, int u^(1-mu) du) over [right, left]."""
    return _pl_primitive(left, right, 1.0 - mu), _pl_primitive(left, right, 2.0 - mu)


def _axis0_pl_table(field, D, mu, piv):
    """Cumulative exact integral along axis 0 of (piv-s)^-mu times the
    piecewise-linear interpolant of field.  Node j holds the integral from
    the axis lower bound to node j."""
    xs = D.axis_coords(0)
    h = D.spacing(0)
    out = np.zeros_like(field, dtype=float)
    acc = np.zeros(field.shape[1:])
    for i in range(len(xs) - 1):
        fi = field[i]
        dfi = field[i + 1] - fi
        a = fi + (piv - xs[i]) * dfi / h
        b = dfi / h
        i0, i1 = _pl_moments(piv - xs[i], piv - xs[i + 1], mu)
        acc = acc + a * i0 - b * i1
        out[i + 1] = acc
    return out


def _axis0_pl_antideriv(table, field, D, coords, mu, piv):
    xs = D.axis_coords(0)
    h = D.spacing(0)
    i, ip1, theta = _axis_locate(D, 0, coords)
    shape = [1] * field.ndim
    shape[0] = -1
    si = xs[i].reshape(shape)
    x = np.asarray(coords, dtype=float).reshape(shape)
    fi = field[i]
    dfi = field[ip1] - fi
    a = fi + (piv - si) * dfi / h
    b = dfi / h
    i0, i1 = _pl_moments(piv - si, piv - x, mu)
    return table[i] + a * i0 - b * i1


def _window_mass_field(qfield, D, t, coords_list, pl=None):
    """Integral of the interpolant of qfield over the sliding window

        { x : z in t*x + (1-t)*D }  =  prod_a [ (z_a-(1-t)hi_a)/t, (z_a-(1-t)lo_a)/t ]

    clipped to D, for every z in the tensor grid given by coords_list.
    pl = (mu, pivot) weights axis 0 by the exact power-law factor
    (pivot-s)^-mu instead of treating it as part of the samples."""
    out = qfield
    for ax in range(D.dim):
        lo, hi = D.bounds[ax]
        z = coords_list[ax]
        wl = np.clip((z - (1.0 - t) * hi) / t, lo, hi)
        wu = np.clip((z - (1.0 - t) * lo) / t, lo, hi)
        wu = np.maximum(wu, wl)
        if ax == 0 and pl is not None:
            table = _axis0_pl_table(out, D, *pl)
            upper = _axis0_pl_antideriv(table, out, D, wu, *pl)
            lower = _axis0_pl_antideriv(table, out, D, wl, *pl)
        else:
            table = _axis_table(out, D, ax, False)
            upper = _axis_antideriv(table, out, D, ax, wu, False)
            lower = _axis_antideriv(table, out, D, ax, wl, False)
        out = upper - lower
    return out


def _sup_window_norm(qfield, D, q, t, pl=None):
    """sup_z of the window integral of qfield, to the power 1/q.

    Grid search over z at the sampling resolution plus one local
    refinement pass around the winner.
    """
    coords = [D.axis_coords(ax) for ax in range(D.dim)]
    mass = _window_mass_field(qfield, D, t, coords, pl=pl)
    best = int(np.argmax(mass))
    ij = np.unravel_index(best, mass.shape)
    fine = []
    for ax in range(D.dim):
        lo, hi = D.bounds[ax]
        h = D.spacing(ax)
        c = coords[ax][ij[ax]]
        fine.append(np.clip(np.linspace(c - h, c + h, 9), lo, hi))
    refined = _window_mass_field(qfield, D, t, fine, pl=pl)
    peak = max(float(mass.max()), float(refined.max()))
    return max(peak, 0.0) ** (1.0 / q)


def _powerlaw_axis_mass(beta, q, lo, hi, width):
    """Maximal integral of beta^q over a length-`width` window of [lo, hi]
    for a power-law beta in the axis-0 coordinate.  Exact."""
    lam_q = beta.lam * q
    piv = beta.pivot
    if piv < hi:
        raise ValueError("power-law pivot inside the domain")
    width = min(width, hi - lo)
    if beta.lam > 0:
        left = piv - hi + width
        right = piv - hi
    else:
        left = piv - lo
        right = piv - lo - width
    if lam_q == 1.0:
        if right == 0.0:
            return math.inf
        return math.log(left / right)
    e = 1.0 - lam_q
    if right == 0.0 and e < 0:
        return math.inf
    return (left**e - right**e) / e


def sup_indicator_norm(D, beta, q, t):
    """sup_z || beta(x) 1_{tx+(1-t)D}(z) ||_{L^q(D, dx)}.

    The window t*x + (1-t)*D ni z has per-axis length L_a*(1-t)/t, so the
    overlap with D never exceeds L_a*min(1, (1-t)/t) per axis; constant
    and power-law weights get the exact sliding-window answer, sampled
    weights a grid search.  t = 0 gives ||beta||_{L^q(D)}, t = 1 gives 0.
    """
    if D.kind != "box" or any(D.periodic):
        raise ValueError("sup_indicator_norm needs a box domain")
    q = float(q)
    if t < 0.0 or t > 1.0:
        raise ValueError("t must lie in [0, 1]")
    if t == 1.0:
        return 0.0
    if t == 0.0:
        if beta.kind == "powerlaw":
            m = _powerlaw_axis_mass(beta, q, *D.bounds[0], width=math.inf)
            rest = math.prod(hi - lo for lo, hi in D.bounds[1:])
            return (m * rest) ** (1.0 / q) if math.isfinite(m) else math.inf
        field = beta.sample_on(D) ** q
        return D.integrate(field) ** (1.0 / q)

    shrink = min(1.0, (1.0 - t) / t)
    if beta.kind == "constant":
        overlap = D.volume * shrink**D.dim
        return beta.value * overlap ** (1.0 / q)
    if beta.kind == "powerlaw":
        lo0, hi0 = D.bounds[0]
        m0 = _powerlaw_axis_mass(beta, q, lo0, hi0, width=(hi0 - lo0) * shrink)
        if not math.isfinite(m0):
            return math.inf
        rest = math.prod((hi - lo) * shrink for lo, hi in D.bounds[1:])
        return (m0 * rest) ** (1.0 / q)
    qfield = beta.sample_on(D) ** q
    return _sup_window_norm(qfield, D, q, t)


def _graded_nodes(t_nodes, kappa=3):
    """Gauss-Legendre nodes pushed toward t = 1 by t = 1-(1-u)^kappa."""
    u, w = np.polynomial.legendre.leggauss(int(t_nodes))
    u = 0.5 * (u + 1.0)
    w = 0.5 * w
    t = 1.0 - (1.0 - u) ** kappa
    jac = kappa * (1.0 - u) ** (kappa - 1)
    return t, w * jac


def _c_integral_symbolic(req, moment):
    """Finiteness of the C-integral by endpoint exponent arithmetic.

    Near t = 1 the sup factor decays like (1-t)^(dim/q) for bounded beta;
    a power-law axis weight (b-t)^(-lam) replaces its axis contribution
    (1-t)^(1/q) by (1-t)^((1-lam*q)/q) and needs lam*q < 1 at all.  The
    |x| moment is bounded on D and changes nothing.
    """
    nd = req.D.dim
    beta = req.beta
    singular = (
        beta.kind == "powerlaw"
        and beta.lam > 0
        and beta.pivot <= req.D.bounds[0][1]
    )
    if singular:
        if beta.lam * req.q >= 1.0:
            return False
        decay = (1.0 - beta.lam * req.q) / req.q + (nd - 1) / req.q
    else:
        decay = nd / req.q
    return decay - nd / req.p > -1.0


def C_integral(req, moment="none", t_nodes=64, _skip_precheck=False):
    """The Poincare constant C(k,p,q,n,beta): t-integral of the sup norm.

    moment="|x|" gives the C_2 variant with beta replaced by |x|beta.
    Returns math.inf when the symbolic endpoint test says divergent.
    """
    if moment not in ("none", "|x|"):
        raise ValueError("moment must be 'none' or '|x|'")
    if not _skip_precheck and not _c_integral_symbolic(req, moment):
        return math.inf
    D = req.D
    k, p, q = req.k, req.p, req.q
    beta = req.beta

    qfield = None
    pl = None
    if moment == "|x|" and beta.kind == "powerlaw":
        if beta.lam * q >= 1.0 and beta.pivot <= D.bounds[0][1]:
            return math.inf
        radius = np.sqrt(sum(c**2 for c in D.meshgrid()))
        qfield = radius**q
        pl = (beta.lam * q, beta.pivot)
    elif moment == "|x|" or beta.kind in ("sampled", "sampled-t"):
        radius = np.sqrt(sum(c**2 for c in D.meshgrid()))
        qfield = beta.sample_on(D) ** q
        if moment == "|x|":
            qfield = qfield * radius**q

    total = 0.0
    for t, w in zip(*_graded_nodes(t_nodes)):
        if qfield is None:
            sup = sup_indicator_norm(D, beta, q, t)
        else:
            sup = _sup_window_norm(qfield, D, q, t, pl=pl)
        total += w * sup * t**k * (1.0 - t) ** (-D.dim / p)
    return float(total)


def corollary_box_bound(D, k, p, q, t_nodes=64):
    """Closed upper bound for C(k,p,q,n,1) on a box:

        |D|^(1/q) int_0^1 t^(k-n/q) (1-t)^(-n/p) min(t^(n/q),(1-t)^(n/q)) dt

    with n = dim(D); finite exactly when 1/p - 1/q < 1/n.
    """
    n = D.dim
    if 1.0 / p - 1.0 / q >= 1.0 / n:
        return math.inf
    t, w = _graded_nodes(t_nodes)
    vals = (
        t ** (k - n / q)
        * (1.0 - t) ** (-n / p)
        * np.minimum(t ** (n / q), (1.0 - t) ** (n / q))
    )
    return float(D.volume ** (1.0 / q) * np.sum(w * vals))


def Q_factor(gamma, p, pbar, D):
    """|| 1/gamma ||_{L^r(D)} with r = p*pbar/(p - pbar), sup when pbar = p.

    Power-law divergence is decided symbolically; math.inf signals it.
    """
    p = float(p)
    pbar = float(pbar)
    if not 1.0 <= pbar <= p:
        raise ValueError("need 1 <= pbar <= p")
    inv = gamma**-1.0
    lo0, hi0 = D.bounds[0]
    if pbar == p:
        if inv.kind == "powerlaw":
            if inv.lam > 0:
                if inv.pivot <= hi0:
                    return math.inf
                return float((inv.pivot - hi0) ** (-inv.lam))
            return float((inv.pivot - lo0) ** (-inv.lam))
        if inv.kind == "constant":
            return inv.value
        return float(inv.samples.max())
    r = p * pbar / (p - pbar)
    if inv.kind == "powerlaw":
        if not inv.power_integral_finite(r, lo0, hi0):
            return math.inf
        mass = _powerlaw_axis_mass(inv, r, lo0, hi0, width=math.inf)
        fiber = math.prod(hi - lo for lo, hi in D.bounds[1:])
        return float((mass * fiber) ** (1.0 / r))
    field = inv.sample_on(D) ** r
    return float(D.integrate(field) ** (1.0 / r))


def _t_axis_norm(beta, q, lo, hi, moment_t=False, nodes=256):
    """|| beta ||_{L^q([lo,hi))} (or of t*beta(t)) for a t-only profile."""
    if beta.kind == "powerlaw" and beta.lam > 0:
        if not beta.power_integral_finite(q, lo, hi):
            return math.inf
    if beta.kind == "powerlaw" and not moment_t:
        mass = _powerlaw_axis_mass(beta, q, lo, hi, width=math.inf)
        return float(mass ** (1.0 / q))
    t, w = _graded_nodes(nodes)
    ts = lo + (hi - lo) * t
    vals = beta.eval_t(ts) ** q
    if moment_t:
        vals = vals * np.abs(ts) ** q
    return float(((hi - lo) * np.sum(w * vals)) ** (1.0 / q))


def _dual_exponent(p):
    return math.inf if p == 1.0 else p / (p - 1.0)


def _alpha_norms(alpha, D, p):
    """(||alpha||_{p'}, ||alpha(y)|y|||_{p'}) over D, sup norms when p = 1."""
    pprime = _dual_exponent(p)
    field = alpha.sample_on(D)
    radius = np.sqrt(sum(c**2 for c in D.meshgrid()))
    if math.isinf(pprime):
        return float(field.max()), float((field * radius).max())
    plain = D.integrate(field**pprime) ** (1.0 / pprime)
    moment = D.integrate((field * radius) ** pprime) ** (1.0 / pprime)
    return float(plain), float(moment)


def cylinder_constant(req, t_nodes=64):
    """Cylinder-adapted constants: the |U|^(1/q) ||beta||_{L^q[a,b)} bound
    and the assembled one-weight constant C = ||alpha|y|||_{p'} C1 +
    ||alpha||_{p'} C2.

    Hypothesis failures (divergent beta norms) are reported by name, not
    raised; the gluing pipeline turns them into refusals.
    """
    D = req.D
    beta = req.beta
    if not beta.t_only:
        raise ValueError("cylinder constant needs a t-only beta")
    lo0, hi0 = D.bounds[0]
    fiber_measure = math.prod(hi - lo for lo, hi in D.bounds[1:])

    failures = []
    beta_norm = _t_axis_norm(beta, req.q, lo0, hi0)
    if not math.isfinite(beta_norm):
        failures.append("||beta||_{L^q[a,b)} divergent")
    tbeta_norm = _t_axis_norm(beta, req.q, lo0, hi0, moment_t=True)
    if not math.isfinite(tbeta_norm):
        failures.append("||t beta(t)||_{L^q[a,b)} divergent")

    bound = fiber_measure ** (1.0 / req.q) * beta_norm

    alpha = req.alpha if req.alpha is not None else WeightProfile.constant(1.0 / D.volume)
    anorm, amoment = _alpha_norms(alpha, D, req.p)
    c1 = C_integral(req, moment="none", t_nodes=t_nodes)
    c2 = C_integral(req, moment="|x|", t_nodes=t_nodes)
    if not math.isfinite(c1):
        failures.append("C1 integral divergent")
    if not math.isfinite(c2):
        failures.append("C2 integral divergent")
    full = amoment * c1 + anorm * c2

    out = {
        "cor_bound": bound,
        "beta_norm": beta_norm,
        "tbeta_norm": tbeta_norm,
        "C": full,
        "C1": c1,
        "C2": c2,
        "alpha_norm": anorm,
        "alpha_moment_norm": amoment,
        "gates": req.gates(),
        "hypothesis_failures": failures,
    }
    if req.gamma is not None:
        out["Q"] = Q_factor(req.gamma, req.p, req.pbar, D)
        if not math.isfinite(out["Q"]):
            failures.append("||1/gamma|| divergent for requested pbar")
    return out
