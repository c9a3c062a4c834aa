"""Smooth cutoff functions, cone coordinates and their diagonal operators.

A cutoff ``f`` is built from the bump ``psi(u) = exp(-1/(u (1-u)))`` on
``(0, 1)``:

    f'(mu) = psi((mu - l) / (r - l)) / Z,      Z = (r - l) * int_0^1 psi,

with ``l = w/4``, ``r = 3w/4`` and ``w = c - c'``.  Hence ``f = 0`` for
``mu <= 0``, ``f = 1`` for ``mu >= w``, ``f' >= 0`` and
``sqrt(f') = Z**-1/2 exp(-1/(2 u (1-u)))`` is again smooth.

Derivatives of ``psi`` are exact: ``psi^(m) = P_m(u) / (u(1-u))^(2m) * psi``
with integer polynomials ``P_0 = 1`` and
``P_{m+1} = P_m' q^2 - P_m q' (2 m q - 1)``, ``q = u(1-u)``.  They are
evaluated in the centred variable ``2u - 1`` after an exact rational
re-expansion.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb

import numpy as np

from .errors import RejectedInputError
from .model import LatticeGeometry
from .tolerances import TOL

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(60)


def _poly_mul(p, q):
    out = [0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        for j, b in enumerate(q):
            out[i + j] += a * b
    return out


def _poly_add(p, q):
    n = max(len(p), len(q))
    return [(p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0) for i in range(n)]


def _poly_der(p):
    return [i * p[i] for i in range(1, len(p))] or [0]


def _poly_scale(p, s):
    return [s * a for a in p]


@lru_cache(maxsize=None)
def bump_polynomial(m: int) -> tuple:
    """Integer coefficients (ascending powers of ``u``) of ``P_m``."""
    if m < 0:
        raise RejectedInputError("derivative order must be >= 0")
    if m == 0:
        return (1,)
    prev = list(bump_polynomial(m - 1))
    k = m - 1
    q = [0, 1, -1]
    dq = [1, -2]
    q2 = _poly_mul(q, q)
    first = _poly_mul(_poly_der(prev), q2)
    factor = _poly_add(_poly_scale(q, 2 * k), [-1])
    second = _poly_mul(_poly_mul(prev, dq), factor)
    out = _poly_add(first, _poly_scale(second, -1))
    while len(out) > 1 and out[-1] == 0:
        out.pop()
    return tuple(out)


@lru_cache(maxsize=None)
def _centered_coefficients(m: int) -> np.ndarray:
    # exact change of variable u = (1 + t)/2; the u-basis cancels badly near u = 1/2
    p = bump_polynomial(m)
    out = [Fraction(0)] * len(p)
    for i, c in enumerate(p):
        for j in range(i + 1):
            out[j] += Fraction(c * comb(i, j), 2**i)
    return np.array([float(x) for x in out])


def bump(u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    inside = (u > 0) & (u < 1)
    ui = u[inside]
    out[inside] = np.exp(-1.0 / (ui * (1.0 - ui)))
    return out


def bump_derivative(m: int, u) -> np.ndarray:
    """``psi^(m)(u)`` evaluated from the exact polynomial recurrence."""
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    inside = (u > 0) & (u < 1)
    ui = u[inside]
    q = ui * (1.0 - ui)
    poly = np.polynomial.polynomial.polyval(2.0 * ui - 1.0, _centered_coefficients(m))
    out[inside] = poly * np.exp(-1.0 / q - 2 * m * np.log(q))
    return out


def _bump_integral_to(u: np.ndarray) -> np.ndarray:
    """``int_0^u psi`` for ``u`` in ``[0, 1/2]`` by 60-point Gauss-Legendre."""
    half = 0.5 * u[..., None]
    nodes = half * (_GL_NODES + 1.0)
    return np.sum(_GL_WEIGHTS * bump(nodes), axis=-1) * half[..., 0]


BUMP_INTEGRAL = float(2.0 * _bump_integral_to(np.array([0.5]))[0])


def smooth_step(t) -> np.ndarray:
    """Normalised running integral of ``psi``: 0 for ``t <= 0``, 1 for ``t >= 1``."""
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    lower = np.minimum(t, 1.0 - t)
    part = _bump_integral_to(lower) / BUMP_INTEGRAL
    return np.where(t <= 0.5, part, 1.0 - part)


@dataclass(frozen=True)
class SmoothCutoff:
    c: float
    c_prime: float
    left: float
    right: float
    normalization: float

    @property
    def width(self) -> float:
        """``c - c'``; ``f = 1`` beyond it."""
        return self.c - self.c_prime

    @property
    def support_window(self) -> tuple:
        return (self.left, self.right)

    def _u(self, mu):
        return (np.asarray(mu, dtype=float) - self.left) / (self.right - self.left)

    def __call__(self, mu, k: int = 0) -> np.ndarray:
        return eval_derivative(self, k, mu)

    def sqrt_derivative(self, mu) -> np.ndarray:
        """``sqrt(f'(mu))`` evaluated directly as a bump of half the exponent."""
        u = self._u(mu)
        out = np.zeros_like(u)
        inside = (u > 0) & (u < 1)
        ui = u[inside]
        out[inside] = np.exp(-0.5 / (ui * (1.0 - ui))) / np.sqrt(self.normalization)
        return out

    def plateau(self, mu) -> np.ndarray:
        """Admissible plateau: 1 on ``[l, r]``, supported in ``(l/2, (r + w)/2)``."""
        mu = np.asarray(mu, dtype=float)
        lo = 0.5 * self.left
        hi = 0.5 * (self.right + self.width)
        rise = smooth_step((mu - lo) / (self.left - lo))
        fall = smooth_step((hi - mu) / (hi - self.right))
        return rise * fall


def make_cutoff(c: float, c_prime: float) -> SmoothCutoff:
    if not (c > c_prime > 0):
        raise RejectedInputError(f"cutoff needs c > c' > 0, got c = {c}, c' = {c_prime}")
    w = c - c_prime
    left, right = 0.25 * w, 0.75 * w
    return SmoothCutoff(float(c), float(c_prime), left, right, (right - left) * BUMP_INTEGRAL)


def eval_derivative(f: SmoothCutoff, k: int, mu) -> np.ndarray:
    """``f^(k)(mu)`` for ``0 <= k <= 8``."""
    if int(k) != k or k < 0 or k > TOL.max_order:
        raise RejectedInputError(f"derivative order must be an integer in [0, {TOL.max_order}], got {k}")
    u = f._u(mu)
    if k == 0:
        return smooth_step(u)
    scale = (f.right - f.left) ** k * BUMP_INTEGRAL
    return bump_derivative(k - 1, u) / scale


@dataclass(frozen=True)
class ConeFrame:
    """Offsets of the moving cone: ``x_ts = (<x> - a - c' t) / s``."""

    a: float
    b: float
    s: float
    t: float = 0.0

    def __post_init__(self):
        if not (self.a > self.b > 0):
            raise RejectedInputError(f"cone frame needs a > b > 0, got a = {self.a}, b = {self.b}")
        if not self.s > 0:
            raise RejectedInputError(f"adiabatic scale s must be positive, got {self.s}")
        if not self.t >= 0:
            raise RejectedInputError(f"time must be >= 0, got {self.t}")

    def at(self, t: float | None = None, s: float | None = None) -> "ConeFrame":
        return ConeFrame(self.a, self.b, self.s if s is None else s, self.t if t is None else t)


def cone_coordinate(frame: ConeFrame, geometry: LatticeGeometry, c_prime: float) -> np.ndarray:
    return (geometry.position_weight - frame.a - c_prime * frame.t) / frame.s


def diagonal_observable(f: SmoothCutoff, k: int, frame: ConeFrame, geometry: LatticeGeometry) -> np.ndarray:
    """``diag(f^(k)(x_ts))``; ``k = 0`` gives the propagation observable ``f_ts``."""
    x = cone_coordinate(frame, geometry, f.c_prime)
    return np.diag(eval_derivative(f, k, x)).astype(np.complex128)


def sqrt_observable(f: SmoothCutoff, frame: ConeFrame, geometry: LatticeGeometry) -> np.ndarray:
    """``u_ts = sqrt(f'(x_ts))`` as a diagonal matrix."""
    x = cone_coordinate(frame, geometry, f.c_prime)
    return np.diag(f.sqrt_derivative(x)).astype(np.complex128)


def plateau_observable(f: SmoothCutoff, frame: ConeFrame, geometry: LatticeGeometry) -> np.ndarray:
    x = cone_coordinate(frame, geometry, f.c_prime)
    return np.diag(f.plateau(x)).astype(np.complex128)


def sharp_projector(eta: float, geometry: LatticeGeometry) -> np.ndarray:
    """Projector onto sites with ``<x> >= eta``."""
    if not eta >= 1:
        raise RejectedInputError(f"eta must be >= 1, got {eta}")
    return np.diag((geometry.position_weight >= eta).astype(float)).astype(np.complex128)
