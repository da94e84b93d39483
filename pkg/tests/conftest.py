"""Shared analytic test-form families.

Forms are drawn as parameter sets first and sampled on a grid second, so
convergence studies can rerun the same form on finer grids.  The trig
amplitude is the knob: coefficients are multilinear plus one sine mode
per axis, and the multilinear part is reproduced exactly by the
homotopy-operator quadratures, so the amplitude controls how much
genuine O(h^2) error a family carries.
"""

import numpy as np

from cylcoh import GridForm
from cylcoh.forms import increasing_indices


def draw_coeff_params(dim, rng, amplitude, periodic=None):
    periodic = (False,) * dim if periodic is None else periodic
    return {
        "const": rng.uniform(0.3, 1.0),
        "lin": [0.0 if periodic[a] else rng.uniform(-0.5, 0.5) for a in range(dim)],
        "amp": [amplitude * rng.uniform(0.5, 1.0) for a in range(dim)],
        "phase": [rng.uniform(0.0, 2.0 * np.pi) for a in range(dim)],
    }


def draw_form_params(dim, degree, rng, amplitude=0.2, periodic=None):
    return {
        idx: draw_coeff_params(dim, rng, amplitude, periodic)
        for idx in increasing_indices(dim, degree)
    }


def sample_coeff(dom, cp):
    mesh = dom.meshgrid()
    out = cp["const"] * np.ones(dom.grid)
    for a in range(dom.dim):
        lo, hi = dom.bounds[a]
        th = (mesh[a] - lo) / (hi - lo)
        out = out + cp["lin"][a] * th
        out = out + cp["amp"][a] * np.sin(2.0 * np.pi * th + cp["phase"][a])
    return out


def sample_form(dom, degree, params):
    om = GridForm.zeros(dom, degree)
    for idx, cp in params.items():
        om.coeffs[idx] = sample_coeff(dom, cp)
    return om


def random_form(dom, degree, rng, amplitude=0.2):
    params = draw_form_params(dom.dim, degree, rng, amplitude, dom.periodic)
    return sample_form(dom, degree, params)
