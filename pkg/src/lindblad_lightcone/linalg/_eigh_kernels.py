"""Householder tridiagonalisation and implicit-shift QL.

Two implementations of each kernel: explicit loops compiled by numba
(``*_loops``) and a numpy version (``*_vec``) used when JIT is disabled.
They share the same calling convention:

``tridiagonalize(a, want_q) -> (d, e, q)``
    Reduce the Hermitian matrix ``a`` (overwritten) to real symmetric
    tridiagonal form ``T`` with ``a = q T q^H``.  ``d`` is the diagonal,
    ``e[k] = T[k+1, k] >= 0`` for ``k < n-1`` and ``e[n-1] = 0``.  The
    complex phases of the subdiagonal are folded into ``q``.

``tql(d, e, zt, want_z) -> status``
    Diagonalise the tridiagonal matrix in place.  On return ``d`` holds the
    (unsorted) eigenvalues and row ``i`` of ``zt`` the eigenvector for
    ``d[i]`` expressed in the tridiagonal basis.  ``status`` is the number
    of QL iterations used, or ``-1`` when the iteration cap
    ``max_iter`` was exceeded.
"""

from __future__ import annotations

import math

import numpy as np

from .._jit import njit

_EPS = 2.0**-52


@njit
def tridiagonalize_loops(a, want_q):
    n = a.shape[0]
    q = np.zeros((n, n), dtype=np.complex128)
    for i in range(n):
        q[i, i] = 1.0
    sub = np.zeros(n, dtype=np.complex128)
    v = np.zeros(n, dtype=np.complex128)
    p = np.zeros(n, dtype=np.complex128)
    w = np.zeros(n, dtype=np.complex128)
    for k in range(n - 2):
        m0 = k + 1
        norm2 = 0.0
        for i in range(m0, n):
            norm2 += a[i, k].real * a[i, k].real + a[i, k].imag * a[i, k].imag
        xnorm = math.sqrt(norm2)
        if xnorm == 0.0:
            sub[k] = 0.0
            continue
        x0 = a[m0, k]
        ax0 = abs(x0)
        phase = x0 / ax0 if ax0 > 0.0 else 1.0 + 0.0j
        alpha = -phase * xnorm
        vnorm2 = 0.0
        for i in range(m0, n):
            v[i] = a[i, k]
        v[m0] -= alpha
        for i in range(m0, n):
            vnorm2 += v[i].real * v[i].real + v[i].imag * v[i].imag
        vnorm = math.sqrt(vnorm2)
        for i in range(m0, n):
            v[i] /= vnorm
        # p = B v on the trailing block
        for i in range(m0, n):
            acc = 0.0 + 0.0j
            for j in range(m0, n):
                acc += a[i, j] * v[j]
            p[i] = acc
        kk = 0.0 + 0.0j
        for i in range(m0, n):
            kk += v[i].conjugate() * p[i]
        kr = kk.real
        for i in range(m0, n):
            w[i] = 2.0 * (p[i] - kr * v[i])
        for i in range(m0, n):
            vi = v[i]
            wi = w[i]
            for j in range(m0, n):
                a[i, j] -= vi * w[j].conjugate() + wi * v[j].conjugate()
        a[m0, k] = alpha
        a[k, m0] = alpha.conjugate()
        for i in range(m0 + 1, n):
            a[i, k] = 0.0
            a[k, i] = 0.0
        sub[k] = alpha
        if want_q:
            for r in range(n):
                acc = 0.0 + 0.0j
                for j in range(m0, n):
                    acc += q[r, j] * v[j]
                acc *= 2.0
                for j in range(m0, n):
                    q[r, j] -= acc * v[j].conjugate()
    if n >= 2:
        sub[n - 2] = a[n - 1, n - 2]
    d = np.zeros(n)
    e = np.zeros(n)
    for i in range(n):
        d[i] = a[i, i].real
    delta = 1.0 + 0.0j
    for k in range(n - 1):
        mag = abs(sub[k])
        e[k] = mag
        if mag > 0.0:
            delta = delta * (sub[k] / mag)
        if want_q:
            for r in range(n):
                q[r, k + 1] *= delta
    return d, e, q


@njit
def tql_loops(d, e, zt, want_z, max_iter):
    n = d.shape[0]
    f = 0.0
    tst1 = 0.0
    total = 0
    for l in range(n):
        tst1 = max(tst1, abs(d[l]) + abs(e[l]))
        m = l
        while m < n - 1:
            if abs(e[m]) <= _EPS * tst1:
                break
            m += 1
        if m > l:
            while True:
                total += 1
                if total > max_iter:
                    return -1
                g = d[l]
                p = (d[l + 1] - g) / (2.0 * e[l])
                r = math.hypot(p, 1.0)
                if p < 0:
                    r = -r
                d[l] = e[l] / (p + r)
                d[l + 1] = e[l] * (p + r)
                dl1 = d[l + 1]
                h = g - d[l]
                for i in range(l + 2, n):
                    d[i] -= h
                f += h
                p = d[m]
                c = 1.0
                c2 = c
                c3 = c
                el1 = e[l + 1]
                s = 0.0
                s2 = 0.0
                for i in range(m - 1, l - 1, -1):
                    c3 = c2
                    c2 = c
                    s2 = s
                    g = c * e[i]
                    h = c * p
                    r = math.hypot(p, e[i])
                    e[i + 1] = s * r
                    s = e[i] / r
                    c = p / r
                    p = c * d[i] - s * g
                    d[i + 1] = h + s * (c * g + s * d[i])
                    if want_z:
                        for k in range(n):
                            hk = zt[i + 1, k]
                            zik = zt[i, k]
                            zt[i + 1, k] = s * zik + c * hk
                            zt[i, k] = c * zik - s * hk
                p = -s * s2 * c3 * el1 * e[l] / dl1
                e[l] = s * p
                d[l] = c * p
                if not abs(e[l]) > _EPS * tst1:
                    break
        d[l] = d[l] + f
        e[l] = 0.0
    return total


def tridiagonalize_vec(a, want_q):
    n = a.shape[0]
    q = np.eye(n, dtype=np.complex128)
    sub = np.zeros(n, dtype=np.complex128)
    for k in range(n - 2):
        m0 = k + 1
        x = a[m0:, k]
        xnorm = np.linalg.norm(x)
        if xnorm == 0.0:
            continue
        ax0 = abs(x[0])
        phase = x[0] / ax0 if ax0 > 0.0 else 1.0
        alpha = -phase * xnorm
        v = x.copy()
        v[0] -= alpha
        v /= np.linalg.norm(v)
        block = a[m0:, m0:]
        p = block @ v
        kr = np.vdot(v, p).real
        w = 2.0 * (p - kr * v)
        block -= np.outer(v, w.conj()) + np.outer(w, v.conj())
        a[m0:, k] = 0.0
        a[k, m0:] = 0.0
        a[m0, k] = alpha
        a[k, m0] = np.conj(alpha)
        sub[k] = alpha
        if want_q:
            tail = q[:, m0:]
            tail -= 2.0 * np.outer(tail @ v, v.conj())
    if n >= 2:
        sub[n - 2] = a[n - 1, n - 2]
    d = np.real(np.diag(a)).copy()
    e = np.zeros(n)
    mags = np.abs(sub[: n - 1])
    e[: n - 1] = mags
    if want_q and n >= 2:
        unit = np.where(mags > 0.0, sub[: n - 1] / np.where(mags > 0.0, mags, 1.0), 1.0)
        q[:, 1:] *= np.cumprod(unit)[None, :]
    return d, e, q


def tql_vec(d, e, zt, want_z, max_iter):
    # scalar recurrences stay in Python; only the rotations of zt are vectorised
    n = d.shape[0]
    d_ = d.tolist()
    e_ = e.tolist()
    hypot = math.hypot
    f = 0.0
    tst1 = 0.0
    total = 0
    for l in range(n):
        tst1 = max(tst1, abs(d_[l]) + abs(e_[l]))
        m = l
        while m < n - 1:
            if abs(e_[m]) <= _EPS * tst1:
                break
            m += 1
        if m > l:
            while True:
                total += 1
                if total > max_iter:
                    d[:] = d_
                    e[:] = e_
                    return -1
                g = d_[l]
                p = (d_[l + 1] - g) / (2.0 * e_[l])
                r = hypot(p, 1.0)
                if p < 0:
                    r = -r
                d_[l] = e_[l] / (p + r)
                d_[l + 1] = e_[l] * (p + r)
                dl1 = d_[l + 1]
                h = g - d_[l]
                for i in range(l + 2, n):
                    d_[i] -= h
                f += h
                p = d_[m]
                c = c2 = c3 = 1.0
                el1 = e_[l + 1]
                s = s2 = 0.0
                for i in range(m - 1, l - 1, -1):
                    c3 = c2
                    c2 = c
                    s2 = s
                    g = c * e_[i]
                    h = c * p
                    r = hypot(p, e_[i])
                    e_[i + 1] = s * r
                    s = e_[i] / r
                    c = p / r
                    p = c * d_[i] - s * g
                    d_[i + 1] = h + s * (c * g + s * d_[i])
                    if want_z:
                        hk = zt[i + 1].copy()
                        zik = zt[i]
                        zt[i + 1] = s * zik + c * hk
                        zt[i] = c * zik - s * hk
                p = -s * s2 * c3 * el1 * e_[l] / dl1
                e_[l] = s * p
                d_[l] = c * p
                if not abs(e_[l]) > _EPS * tst1:
                    break
        d_[l] = d_[l] + f
        e_[l] = 0.0
    d[:] = d_
    e[:] = e_
    return total
