"""Matrix exponential by scaling and squaring with diagonal Padé approximants.

Degrees and 1-norm thresholds follow Higham (2005): the lowest degree in
(3, 5, 7, 9) whose theta bound covers ``||A||_1`` is used directly,
otherwise ``A`` is scaled by ``2**-s`` into the degree-13 range and the
result squared ``s`` times.
"""

from __future__ import annotations

import numpy as np

from ..errors import NumericFailureError
from ..tolerances import TOL
from .core import as_matrix

_THETA = {
    3: 1.495585217958292e-2,
    5: 2.539398330063230e-1,
    7: 9.504178996162932e-1,
    9: 2.097847961257068e0,
    13: 5.371920351148152e0,
}

_PADE = {
    3: (120.0, 60.0, 12.0, 1.0),
    5: (30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0),
    7: (17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0),
    9: (
        17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
        2162160.0, 110880.0, 3960.0, 90.0, 1.0,
    ),
    13: (
        64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
        1187353796428800.0, 129060195264000.0, 10559470521600.0,
        670442572800.0, 33522128640.0, 1323241920.0, 40840800.0,
        960960.0, 16380.0, 182.0, 1.0,
    ),
}


def _pade_low(a: np.ndarray, m: int):
    b = _PADE[m]
    ident = np.eye(a.shape[0], dtype=a.dtype)
    powers = [ident, a @ a]
    for _ in range(2, m // 2 + 1):
        powers.append(powers[-1] @ powers[1])
    odd = sum(b[2 * k + 1] * powers[k] for k in range(m // 2 + 1))
    even = sum(b[2 * k] * powers[k] for k in range(m // 2 + 1))
    return a @ odd, even


def _pade13(a: np.ndarray):
    b = _PADE[13]
    ident = np.eye(a.shape[0], dtype=a.dtype)
    a2 = a @ a
    a4 = a2 @ a2
    a6 = a2 @ a4
    u = a @ (a6 @ (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * ident)
    v = a6 @ (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * ident
    return u, v


def matrix_exp(a) -> np.ndarray:
    """``exp(a)`` for a dense complex matrix."""
    a = as_matrix(a)
    norm1 = float(np.max(np.sum(np.abs(a), axis=0)))
    if not np.isfinite(norm1) or norm1 > TOL.expm_max_norm:
        raise NumericFailureError(f"matrix_exp: 1-norm {norm1:.3e} is outside the supported range")
    for m in (3, 5, 7, 9):
        if norm1 <= _THETA[m]:
            u, v = _pade_low(a, m)
            return np.linalg.solve(v - u, v + u)
    s = max(0, int(np.ceil(np.log2(norm1 / _THETA[13]))))
    u, v = _pade13(a / 2.0**s)
    r = np.linalg.solve(v - u, v + u)
    for _ in range(s):
        r = r @ r
    if not np.all(np.isfinite(r)):
        raise NumericFailureError(f"matrix_exp overflowed for input with 1-norm {norm1:.3e}")
    return r
