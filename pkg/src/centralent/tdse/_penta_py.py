"""Pure-Python twin of the compiled pentadiagonal kernels.

Same algorithms, same argument order and same return values as the Cython
module; only used when the extension is unavailable or explicitly requested.
Loops run over Python ``complex`` lists, which is several times faster than
indexing numpy scalars one at a time.
"""
from __future__ import annotations

import numpy as np


def factor(sub2, sub1, diag, sup1, sup2):
    a, b, c, d, e = (np.asarray(x, dtype=complex).tolist() for x in (sub2, sub1, diag, sup1, sup2))
    n = len(c)
    l2 = [0j] * n
    l1 = [0j] * n
    u0 = [0j] * n
    u1 = [0j] * n
    pmin = float("inf")
    for i in range(n):
        if i >= 2:
            l2[i] = a[i] / u0[i - 2]
            l1[i] = (b[i] - l2[i] * u1[i - 2]) / u0[i - 1]
            u0[i] = c[i] - l1[i] * u1[i - 1] - l2[i] * e[i - 2]
            u1[i] = d[i] - l1[i] * e[i - 1]
        elif i == 1:
            l1[1] = b[1] / u0[0]
            u0[1] = c[1] - l1[1] * u1[0]
            u1[1] = d[1] - l1[1] * e[0]
        else:
            u0[0] = c[0]
            u1[0] = d[0]
        p = abs(u0[i])
        pmin = min(pmin, p)
        if p == 0.0:
            break
    return (np.array(l2), np.array(l1), np.array(u0), np.array(u1), pmin)


def _solve_list(l2, l1, u0, u1, e, x):
    n = len(x)
    if n > 1:
        x[1] = x[1] - l1[1] * x[0]
    for i in range(2, n):
        x[i] = x[i] - l1[i] * x[i - 1] - l2[i] * x[i - 2]
    x[n - 1] = x[n - 1] / u0[n - 1]
    if n > 1:
        x[n - 2] = (x[n - 2] - u1[n - 2] * x[n - 1]) / u0[n - 2]
    for i in range(n - 3, -1, -1):
        x[i] = (x[i] - u1[i] * x[i + 1] - e[i] * x[i + 2]) / u0[i]
    return x


def solve(l2, l1, u0, u1, sup2, rhs):
    args = [np.asarray(v, dtype=complex).tolist() for v in (l2, l1, u0, u1, sup2)]
    x = _solve_list(*args, np.asarray(rhs, dtype=complex).tolist())
    return np.array(x, dtype=np.complex128)


def _residual(bands, x, rhs):
    sub2, sub1, diag, sup1, sup2 = bands
    n = len(x)
    r = [0j] * n
    for i in range(n):
        acc = diag[i] * x[i]
        if i >= 1:
            acc += sub1[i] * x[i - 1]
        if i >= 2:
            acc += sub2[i] * x[i - 2]
        if i + 1 < n:
            acc += sup1[i] * x[i + 1]
        if i + 2 < n:
            acc += sup2[i] * x[i + 2]
        r[i] = rhs[i] - acc
    return r


def run_static(l2, l1, u0, u1, sub2, sub1, diag, sup1, sup2, psi, nsteps):
    args = [np.asarray(v, dtype=complex).tolist() for v in (l2, l1, u0, u1, sup2)]
    bands = [np.asarray(v, dtype=complex).tolist() for v in (sub2, sub1, diag, sup1, sup2)]
    cur = psi.tolist()
    for _ in range(int(nsteps)):
        w = _solve_list(*args, list(cur))
        r = _solve_list(*args, _residual(bands, w, cur))
        cur = [2.0 * (wi + ri) - pi for wi, ri, pi in zip(w, r, cur)]
    psi[:] = cur


def run_moving(psi, k, coeffs, x0, h, velocity, dt, nsteps):
    n = psi.shape[0]
    tau = 0.5 * dt
    a1 = 1j * tau * (-16.0 * k)
    a2 = 1j * tau * k
    dk = 30.0 * k
    cs = [float(c) for c in coeffs]
    pmin = float("inf")
    cur = psi.tolist()
    u0 = [0j] * n
    u1 = [0j] * n
    l1 = [0j] * n
    l2 = [0j] * n
    dia = [0j] * n
    y = [0j] * n
    sub1 = [a1] * n
    sub2 = [a2] * n
    for s in range(int(nsteps)):
        shift = x0 + velocity * ((s + 0.5) * dt)
        for i in range(n):
            x = shift + i * h
            v = cs[-1]
            for c in cs[-2::-1]:
                v = v * x + c
            dia[i] = 1.0 + 1j * tau * (dk + v)
            if i >= 2:
                l2[i] = a2 / u0[i - 2]
                l1[i] = (a1 - l2[i] * u1[i - 2]) / u0[i - 1]
                u0[i] = dia[i] - l1[i] * u1[i - 1] - l2[i] * a2
                u1[i] = a1 - l1[i] * a2
                y[i] = cur[i] - l1[i] * y[i - 1] - l2[i] * y[i - 2]
            elif i == 1:
                l1[1] = a1 / u0[0]
                u0[1] = dia[1] - l1[1] * u1[0]
                u1[1] = a1 - l1[1] * a2
                y[1] = cur[1] - l1[1] * y[0]
            else:
                u0[0] = dia[0]
                u1[0] = a1
                y[0] = cur[0]
            p = abs(u0[i])
            if p < pmin:
                pmin = p
        y[n - 1] = y[n - 1] / u0[n - 1]
        if n > 1:
            y[n - 2] = (y[n - 2] - u1[n - 2] * y[n - 1]) / u0[n - 2]
        for i in range(n - 3, -1, -1):
            y[i] = (y[i] - u1[i] * y[i + 1] - a2 * y[i + 2]) / u0[i]
        r = _solve_list(l2, l1, u0, u1, sub2, _residual((sub2, sub1, dia, sub1, sub2), y, cur))
        cur = [2.0 * (yi + ri) - ci for yi, ri, ci in zip(y, r, cur)]
    psi[:] = cur
    return pmin
