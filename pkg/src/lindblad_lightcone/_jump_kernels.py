"""Jump term ``sum_j W_j rho W_j^H`` from precomputed entry pairs.

``a, b, c, d, coef`` come from :attr:`KrausFamily.entry_pairs`; the result
is ``out[a[p], b[p]] += coef[p] * rho[c[p], d[p]]`` summed over ``p``.
"""

from __future__ import annotations

import numpy as np

from ._jit import njit


@njit
def jump_sum_loops(rho, a, b, c, d, coef, out):
    out[:, :] = 0.0
    for p in range(a.shape[0]):
        out[a[p], b[p]] += coef[p] * rho[c[p], d[p]]
    return out


def jump_sum_vec(rho, a, b, c, d, coef, out):
    n = rho.shape[0]
    vals = coef * rho[c, d]
    flat = a * n + b
    re = np.bincount(flat, weights=vals.real, minlength=n * n)
    im = np.bincount(flat, weights=vals.imag, minlength=n * n)
    out.reshape(-1)[:] = re + 1j * im
    return out
