"""Vanishing criterion for twisted-cylinder cohomology.

Two routes to the same decision.  For power-law twisting (b - t)^(-lam)
the admissible (p, q, k) set is a system of rational inequalities in the
maximal integrability exponents, decided exactly over Fractions.  For
anything else the criterion's three weighted norms are evaluated
literally on the sample grid.  A numeric divergence detector (dyadic
shells toward the singular end) bridges the two: it classifies the
power-law integrals by quadrature alone, so the exact region can be
cross-checked without reusing its arithmetic.

The worked power-law example in the source text pins the inequality
orientation: the admissible window is

    (k - 2 + alpha)/n < 1/q <= 1/p < (k - beta)/n,

together with p <= q and q*(n + 1 - p) < n*p.
"""

import math
from fractions import Fraction

import numpy as np

from .homotopy import gauss01
from .weights import WeightProfile

INF = math.inf
SHELLS = 6
SHELL_NODES = 64
BLOWUP = 1e6
SLOPE_TOL = 1e-4


def _frac(x):
    """Exact rational from int/Fraction/float; floats convert exactly."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float) and math.isinf(x):
        return INF
    return Fraction(x)


def sphere_hdr_zero(n, k):
    """H^k_DR(S^n) = 0 table: true away from degrees 0 and n."""
    return k not in (0, n)


class ExponentSummary:
    """Maximal integrability exponents of the twisting profiles.

    s^u is integrable on [a,b) exactly for u < alpha, t*s^u for
    u < alpha1, and g^v for v < beta.  With b finite alpha1 = alpha.
    """

    def __init__(self, alpha, alpha1, beta):
        self.alpha = alpha
        self.alpha1 = alpha1
        self.beta = beta

    def to_dict(self):
        return {"alpha": self.alpha, "alpha1": self.alpha1, "beta": self.beta}

    def __repr__(self):
        return f"ExponentSummary(alpha={self.alpha}, alpha1={self.alpha1}, beta={self.beta})"


def powerlaw_exponents(lam_s, lam_g=None):
    """Exponent summary for s = (b-t)^(-lam_s), g = (b-t)^(-lam_g).

    (b-t)^(-lam*u) is integrable up to the finite endpoint exactly when
    lam*u < 1, so the maximal exponent is 1/lam; nonpositive lam means a
    bounded profile, reported as +inf.  lam_g defaults to lam_s (warped
    product with a single law).
    """
    if lam_g is None:
        lam_g = lam_s
    lam_s = _frac(lam_s)
    lam_g = _frac(lam_g)
    if lam_g > lam_s:
        raise ValueError("s must dominate g: lam_s >= lam_g required")
    alpha = 1 / lam_s if lam_s > 0 else INF
    beta = 1 / lam_g if lam_g > 0 else INF
    return ExponentSummary(alpha, alpha, beta)


class AdmissibleRegion:
    """Exact (1/p, 1/q) window for fixed n, k and exponents alpha, beta.

    Membership and the per-p q-interval are decided over Fractions, so
    rational inputs get tolerance-free answers.
    """

    def __init__(self, n, k, alpha, beta, b_infinite=False):
        self.n = int(n)
        self.k = int(k)
        self.alpha = alpha
        self.beta = beta
        self.b_infinite = bool(b_infinite)
        self.reason = None
        if self.b_infinite:
            self.reason = (
                "b is infinite: the integrability exponents are all negative, "
                "forcing 1/p - 1/q > 2/n against the gate"
            )
            self.left = INF
            self.right = -INF
            return
        # lower bound on 1/q and upper bound on 1/p
        self.left = INF if alpha == INF else Fraction(self.k - 2 + alpha, 1) / self.n
        self.right = -INF if beta == INF else Fraction(self.k, 1) / self.n - Fraction(beta, 1) / self.n
        if alpha == INF or beta == INF:
            self.reason = "bounded twisting profile (infinite integrability exponent)"
        elif alpha + beta > 2:
            self.reason = "alpha + beta exceeds 2"
        elif max(self.left, Fraction(0)) >= min(self.right, Fraction(1)):
            self.reason = "empty (1/q, 1/p] window for these n, k, alpha, beta"

    @property
    def empty(self):
        return self.reason is not None

    def _checks(self, p, q):
        """The five inequality slacks at (p, q); positive means satisfied."""
        p = _frac(p)
        q = _frac(q)
        if p < 1 or q < 1:
            raise ValueError("p and q must be >= 1")
        inv_p, inv_q = 1 / p, 1 / q
        return {
            "order p <= q": inv_p - inv_q,
            "(k-2+alpha)/n < 1/q": INF if self.left == INF else inv_q - self.left,
            "1/q <= 1/p": inv_p - inv_q,
            "1/p < (k-beta)/n": -INF if self.right == -INF else self.right - inv_p,
            "gate q(n+1-p) < np": (q - 1) / (q * (self.n + 1)) - (inv_p - inv_q),
        }

    def contains(self, p, q):
        if self.b_infinite:
            return False
        checks = self._checks(p, q)
        strict = ("(k-2+alpha)/n < 1/q", "1/p < (k-beta)/n", "gate q(n+1-p) < np")
        for name, slack in checks.items():
            if slack == INF:
                return False
            if slack == -INF:
                return False
            if name in strict:
                if not slack > 0:
                    return False
            elif slack < 0:
                return False
        return True

    def margin(self, p, q):
        """Smallest strict-inequality slack at (p, q), as a float.

        Only the inequalities a quadrature path has to estimate count
        (the two divergence thresholds and the gate); the order p <= q
        is decided exactly everywhere.  Negative outside the region;
        magnitudes below a band threshold flag boundary points numeric
        classification cannot be trusted on.
        """
        if self.b_infinite:
            return -INF
        checks = self._checks(p, q)
        strict = ("(k-2+alpha)/n < 1/q", "1/p < (k-beta)/n", "gate q(n+1-p) < np")
        vals = []
        for name in strict:
            v = checks[name]
            vals.append(float(v) if v not in (INF, -INF) else math.copysign(1, -1 if v == -INF else 1) * INF)
        return min(vals)

    def q_interval(self, p):
        """The q's admissible at this p: a pair (lo, hi) meaning [lo, hi), or None.

        hi collects the binding upper constraints: q < n/(k-2+alpha) from
        the left inequality and the gate q < np/(n+1-p) when p < n+1.
        """
        if self.empty:
            return None
        p = _frac(p)
        if p < 1:
            raise ValueError("p must be >= 1")
        if not 1 / p < self.right:
            return None
        uppers = []
        denom = self.k - 2 + self.alpha
        if denom > 0:
            uppers.append(Fraction(self.n, 1) / denom)
        if p < self.n + 1:
            uppers.append(self.n * p / (self.n + 1 - p))
        hi = min(uppers) if uppers else INF
        if hi <= p:
            return None
        return (p, hi)

    def to_dict(self):
        return {
            "n": self.n,
            "k": self.k,
            "alpha": self.alpha,
            "beta": self.beta,
            "empty": self.empty,
            "reason": self.reason,
            "inv_q_lower": self.left if not self.b_infinite else None,
            "inv_p_upper": self.right if not self.b_infinite else None,
        }

    def __repr__(self):
        if self.empty:
            return f"AdmissibleRegion(empty: {self.reason})"
        return f"AdmissibleRegion({self.left} < 1/q <= 1/p < {self.right}, n={self.n}, k={self.k})"


def admissible_region(n, k, alpha, beta, b_infinite=False):
    return AdmissibleRegion(n, k, _frac(alpha) if alpha != INF else INF,
                            _frac(beta) if beta != INF else INF, b_infinite)


class CriterionInput:
    """One vanishing query: fiber dimension, degree, exponents, twisting.

    warp is a t-only WeightProfile for warped products (s = g = h), a
    (s, g) pair of profiles, or a full h sample array with the t-axis
    first (s and g are then fiber max/min).  b = interval[1] may be inf
    only with power-law profiles.
    """

    def __init__(self, n, k, p, q, interval, warp, hdr_zero=None):
        self.n = int(n)
        self.k = int(k)
        self.p = float(p)
        self.q = float(q)
        self.a, self.b = float(interval[0]), float(interval[1])
        if not 1 <= self.p <= self.q:
            raise ValueError("need q >= p >= 1")
        if self.n < 1:
            raise ValueError("fiber dimension must be >= 1")
        if not self.a < self.b:
            raise ValueError("empty interval")
        if isinstance(warp, WeightProfile):
            s_prof = g_prof = warp
        elif isinstance(warp, (tuple, list)) and len(warp) == 2 and all(
            isinstance(w, WeightProfile) for w in warp
        ):
            s_prof, g_prof = warp
        else:
            if math.isinf(self.b):
                raise ValueError("infinite b needs power-law profiles (symbolic mode)")
            h = np.asarray(warp, dtype=float)
            if h.ndim < 2:
                raise ValueError("sampled warp needs a t-axis plus fiber axes")
            if not (h > 0).all():
                raise ValueError("warp samples must be strictly positive")
            ts = np.linspace(self.a, self.b, h.shape[0])
            fiber_axes = tuple(range(1, h.ndim))
            s_prof = WeightProfile.sampled_t(ts, h.max(axis=fiber_axes))
            g_prof = WeightProfile.sampled_t(ts, h.min(axis=fiber_axes))
            self._h_samples = h
        if not (s_prof.t_only and g_prof.t_only):
            raise ValueError("twisting profiles must be functions of t")
        if s_prof.kind == "powerlaw" and g_prof.kind == "powerlaw":
            if s_prof.lam < g_prof.lam:
                raise ValueError("s must dominate g: lam_s >= lam_g required")
        elif s_prof.kind == "sampled-t" and g_prof.kind == "sampled-t":
            if np.array_equal(s_prof.tcoords, g_prof.tcoords) and (
                s_prof.samples < g_prof.samples - 1e-12
            ).any():
                raise ValueError("s must dominate g pointwise")
        self.s = s_prof
        self.g = g_prof
        if math.isinf(self.b) and s_prof.kind != "powerlaw":
            raise ValueError("infinite b needs power-law profiles (symbolic mode)")
        self.hdr_zero = hdr_zero

    @property
    def powerlaw(self):
        return self.s.kind == "powerlaw" and self.g.kind == "powerlaw"


def _shell_integral(fn, a, b):
    """Dyadic-shell quadrature toward b: total, last slope estimate.

    Shell j covers [b - eps_j, b - eps_{j+1}] with eps_j = (b-a) 2^{-j};
    for (b - t)^(-mu) the shell mass ratio is 2^{mu-1}, so the fitted
    slope 1 + log2(ratio) recovers mu and mu >= 1 flags divergence.
    """
    nodes, wts = gauss01(SHELL_NODES)
    masses = []
    width = b - a
    for j in range(SHELLS):
        hi = b - width * 0.5 ** (j + 1)
        lo = b - width * 0.5**j
        ts = lo + (hi - lo) * nodes
        masses.append(float(np.sum(fn(ts) * wts) * (hi - lo)))
    total = sum(masses)
    if masses[-2] <= 0:
        return total, -INF
    slope = 1.0 + math.log2(masses[-1] / masses[-2])
    return total, slope


def _divergent_at_b(fn, a, b):
    total, slope = _shell_integral(fn, a, b)
    return slope >= 1.0 - SLOPE_TOL or total > BLOWUP, total, slope


def _pq_gates(n, p, q):
    lhs = 1.0 / p - 1.0 / q
    gate = (q - 1.0) / (q * (n + 1.0))
    return {"order": p <= q, "gate": lhs < gate, "lhs": lhs, "gate_rhs": gate}


def _powerlaw_conditions(inp):
    """Divergence checks for the three §-style integrals via shells."""
    n, k, p, q = inp.n, inp.k, inp.p, inp.q
    u = n / q - k + 2.0
    v = k - n / p
    s, g = inp.s, inp.g

    conds = {}
    fn1 = lambda ts: s.eval_t(ts) ** u
    div1, tot1, sl1 = _divergent_at_b(fn1, inp.a, inp.b)
    conds["I1: int s^(n/q-k+2) divergent"] = {
        "holds": div1, "total": tot1, "slope": sl1, "exponent": u,
    }
    fn2 = lambda ts: ts * s.eval_t(ts) ** u
    div2, tot2, sl2 = _divergent_at_b(fn2, inp.a, inp.b)
    conds["I2: int t s^(n/q-k+2) divergent"] = {
        "holds": div2, "total": tot2, "slope": sl2, "exponent": u,
    }
    fn3 = lambda ts: g.eval_t(ts) ** v
    div3, tot3, sl3 = _divergent_at_b(fn3, inp.a, inp.b)
    conds["I3: int g^(k-n/p) divergent"] = {
        "holds": div3, "total": tot3, "slope": sl3, "exponent": v,
    }
    return conds


def _profile_power(h_field, e, fiber_axes, maximize):
    powered = h_field**e
    return powered.max(axis=fiber_axes) if maximize else powered.min(axis=fiber_axes)


def _sampled_conditions(inp, pbar_points):
    """Literal norm finiteness of the criterion's three weighted norms."""
    n, k, p, q = inp.n, inp.k, inp.p, inp.q
    h = getattr(inp, "_h_samples", None)
    ts = inp.s.tcoords if inp.s.kind == "sampled-t" else None
    if ts is None:
        ts = np.linspace(inp.a, inp.b, 257)[:-1]
    if h is not None:
        fiber_axes = tuple(range(1, h.ndim))
        F = [
            _profile_power(h, n / q - (k - 2), fiber_axes, True),
            _profile_power(h, n / q - (k - 1), fiber_axes, True),
        ]
        f = [
            _profile_power(h, n / p - (k - 1), fiber_axes, False),
            _profile_power(h, n / p - k, fiber_axes, False),
        ]
    else:
        sv = inp.s.eval_t(ts)
        gv = inp.g.eval_t(ts)
        F = [np.maximum(sv ** (n / q - (k - 2)), gv ** (n / q - (k - 2))),
             np.maximum(sv ** (n / q - (k - 1)), gv ** (n / q - (k - 1)))]
        f = [np.minimum(sv ** (n / p - (k - 1)), gv ** (n / p - (k - 1))),
             np.minimum(sv ** (n / p - k), gv ** (n / p - k))]

    big_f = np.maximum(F[0], F[1])
    small_f = np.minimum(f[0], f[1])
    dt = np.gradient(ts)

    def finite(x):
        return bool(np.isfinite(x)) and x <= BLOWUP

    n1 = float(np.sum(big_f**q * dt)) ** (1.0 / q)
    n2 = float(np.sum((ts * big_f) ** q * dt)) ** (1.0 / q)
    conds = {
        "||max(F_{k-2,q},F_{k-1,q})||_q finite": {"holds": finite(n1), "value": n1},
        "||t max(F_{k-2,q},F_{k-1,q})||_q finite": {"holds": finite(n2), "value": n2},
    }

    inv = 1.0 / small_f
    witnesses = []
    best = None
    for pbar in np.linspace(1.0, p, pbar_points):
        if pbar >= p - 1e-12:
            val = float(inv.max())
        else:
            r = p * pbar / (p - pbar)
            # overflow to inf is the signal here, not an error
            with np.errstate(over="ignore"):
                val = float(np.sum(inv**r * dt)) ** (1.0 / r)
        if finite(val):
            witnesses.append(float(pbar))
            if best is None or val < best[1]:
                best = (float(pbar), val)
    conds["||min(f_{k-1,p},f_{k,p})^{-1}||_{p pbar/(p-pbar)} finite for some pbar"] = {
        "holds": bool(witnesses),
        "witness_pbar": best[0] if best else None,
        "value": best[1] if best else INF,
        "witness_count": len(witnesses),
    }
    return conds


def criterion_check(inp, pbar_points=33):
    """Decide the vanishing hypotheses for one (n, k, p, q, twisting).

    Power-law twisting goes through the shell divergence detector (the
    route consistent with the exact admissible region); sampled twisting
    evaluates the three weighted norms literally.  Returns a report dict
    with verdict VANISHES or HYPOTHESES-FAIL, per-condition detail, and
    the de Rham qualifier.
    """
    gates = _pq_gates(inp.n, inp.p, inp.q)
    failed = []
    if not gates["order"]:
        failed.append("order p <= q violated")
    if not gates["gate"]:
        failed.append("gate 1/p - 1/q < (q-1)/(q(n+1)) violated")

    if math.isinf(inp.b):
        conds = {}
        failed.append(
            "b is infinite: conditions I1-I3 cannot hold simultaneously"
        )
        pbar_witnesses = []
    elif inp.powerlaw and inp.s.lam > 0:
        conds = _powerlaw_conditions(inp)
        for name, c in conds.items():
            if not c["holds"]:
                failed.append(name + " does not hold")
        pbar_witnesses = None
    else:
        conds = _sampled_conditions(inp, pbar_points)
        for name, c in conds.items():
            if not c["holds"]:
                failed.append(name + " does not hold")
        last = conds["||min(f_{k-1,p},f_{k,p})^{-1}||_{p pbar/(p-pbar)} finite for some pbar"]
        pbar_witnesses = last["witness_count"]

    conditional = False
    if inp.hdr_zero is False:
        failed.append(f"de Rham condition H^{inp.k}_DR(N) = 0 does not hold")
    elif inp.hdr_zero is None:
        conditional = True

    report = {
        "verdict": "HYPOTHESES-FAIL" if failed else "VANISHES",
        "failed": failed,
        "conditional": conditional and not failed,
        "conditions": conds,
        "gates": gates,
        "n": inp.n,
        "k": inp.k,
        "p": inp.p,
        "q": inp.q,
    }
    if report["conditional"]:
        report["note"] = f"conditional on H^{inp.k}_DR(N) = 0"
    if pbar_witnesses is not None:
        report["pbar_witnesses"] = pbar_witnesses
    return report


def asymptotic_delegate(inp, m=None):
    """Same criterion for an asymptotic twisted cylinder of dimension m.

    The hypotheses relabel m = n + 1 and the de Rham flag refers to the
    ambient manifold; the numeric content is identical, so this wraps
    criterion_check and marks the report as delegated.
    """
    m = inp.n + 1 if m is None else int(m)
    if m != inp.n + 1:
        raise ValueError("asymptotic dimension must be n + 1")
    report = criterion_check(inp)
    report["delegated"] = True
    report["m"] = m
    if report["conditional"]:
        report["note"] = f"conditional on H^{inp.k}_DR(X) = 0"
    return report


def region_grid(region, resolution):
    """Dyadic scan of the (1/p, 1/q) triangle at i/resolution steps.

    Yields (inv_p, inv_q, member) with exact Fractions; doubling the
    resolution yields a superset of the sample points, so member rows
    nest across refinements.
    """
    R = int(resolution)
    for i in range(1, R + 1):
        inv_p = Fraction(i, R)
        for j in range(1, i + 1):
            inv_q = Fraction(j, R)
            member = region.contains(1 / inv_p, 1 / inv_q)
            yield inv_p, inv_q, member
