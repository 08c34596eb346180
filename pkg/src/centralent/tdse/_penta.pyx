# cython: language_level=3
"""Compiled pentadiagonal kernels for the Crank-Nicolson propagator.

The matrices solved here are ``A = I + i tau H`` with H real symmetric and
pentadiagonal. Elimination runs without pivoting: the Hermitian part of A is
the identity, so every leading principal minor is nonzero and the LU
factors exist. Pivot magnitudes are still returned so callers can report a
breakdown instead of producing NaNs.
"""
import numpy as np
cimport numpy as cnp
cimport cython

cnp.import_array()

ctypedef double complex cplx


cdef inline double cabs2(cplx z) nogil:
    return z.real * z.real + z.imag * z.imag


@cython.boundscheck(False)
@cython.wraparound(False)
@cython.cdivision(True)
def factor(cplx[::1] sub2, cplx[::1] sub1, cplx[::1] diag, cplx[::1] sup1, cplx[::1] sup2):
    """LU factors ``(l2, l1, u0, u1)`` of a general pentadiagonal matrix.

    Row i of the matrix is ``sub2[i], sub1[i], diag[i], sup1[i], sup2[i]`` at
    columns ``i-2 .. i+2``; entries that fall outside are ignored. The second
    superdiagonal of U equals ``sup2``. Returns the factors and the smallest
    pivot magnitude.
    """
    cdef Py_ssize_t n = diag.shape[0], i
    l2_a = np.zeros(n, dtype=np.complex128)
    l1_a = np.zeros(n, dtype=np.complex128)
    u0_a = np.zeros(n, dtype=np.complex128)
    u1_a = np.zeros(n, dtype=np.complex128)
    cdef cplx[::1] l2 = l2_a, l1 = l1_a, u0 = u0_a, u1 = u1_a
    cdef double pmin = 1e308, p
    with nogil:
        for i in range(n):
            if i >= 2:
                l2[i] = sub2[i] / u0[i - 2]
                l1[i] = (sub1[i] - l2[i] * u1[i - 2]) / u0[i - 1]
                u0[i] = diag[i] - l1[i] * u1[i - 1] - l2[i] * sup2[i - 2]
                u1[i] = sup1[i] - l1[i] * sup2[i - 1]
            elif i == 1:
                l1[i] = sub1[i] / u0[0]
                u0[i] = diag[i] - l1[i] * u1[0]
                u1[i] = sup1[i] - l1[i] * sup2[0]
            else:
                u0[0] = diag[0]
                u1[0] = sup1[0]
            p = cabs2(u0[i])
            if p < pmin:
                pmin = p
            if p == 0.0:
                break
    return l2_a, l1_a, u0_a, u1_a, pmin ** 0.5


@cython.boundscheck(False)
@cython.wraparound(False)
cdef void _solve(cplx[::1] l2, cplx[::1] l1, cplx[::1] u0, cplx[::1] u1, cplx[::1] sup2,
                 cplx[::1] x) nogil:
    cdef Py_ssize_t n = x.shape[0], i
    if n > 1:
        x[1] = x[1] - l1[1] * x[0]
    for i in range(2, n):
        x[i] = x[i] - l1[i] * x[i - 1] - l2[i] * x[i - 2]
    x[n - 1] = x[n - 1] / u0[n - 1]
    if n > 1:
        x[n - 2] = (x[n - 2] - u1[n - 2] * x[n - 1]) / u0[n - 2]
    for i in range(n - 3, -1, -1):
        x[i] = (x[i] - u1[i] * x[i + 1] - sup2[i] * x[i + 2]) / u0[i]


@cython.boundscheck(False)
@cython.wraparound(False)
cdef void _solve_const(cplx[::1] l2, cplx[::1] l1, cplx[::1] u0, cplx[::1] u1, cplx e,
                       cplx[::1] x) nogil:
    # as _solve, with a constant second superdiagonal e
    cdef Py_ssize_t n = x.shape[0], i
    if n > 1:
        x[1] = x[1] - l1[1] * x[0]
    for i in range(2, n):
        x[i] = x[i] - l1[i] * x[i - 1] - l2[i] * x[i - 2]
    x[n - 1] = x[n - 1] / u0[n - 1]
    if n > 1:
        x[n - 2] = (x[n - 2] - u1[n - 2] * x[n - 1]) / u0[n - 2]
    for i in range(n - 3, -1, -1):
        x[i] = (x[i] - u1[i] * x[i + 1] - e * x[i + 2]) / u0[i]


def solve(cplx[::1] l2, cplx[::1] l1, cplx[::1] u0, cplx[::1] u1, cplx[::1] sup2, rhs):
    """Solve ``A x = rhs`` from the factors returned by :func:`factor`."""
    x_a = np.array(rhs, dtype=np.complex128, copy=True)
    cdef cplx[::1] x = x_a
    with nogil:
        _solve(l2, l1, u0, u1, sup2, x)
    return x_a


@cython.boundscheck(False)
@cython.wraparound(False)
cdef void _residual(cplx[::1] sub2, cplx[::1] sub1, cplx[::1] diag, cplx[::1] sup1, cplx[::1] sup2,
                    cplx[::1] x, cplx[::1] rhs, cplx[::1] r) nogil:
    # r = rhs - A x for the banded A
    cdef Py_ssize_t n = x.shape[0], i
    cdef cplx acc
    for i in range(n):
        acc = diag[i] * x[i]
        if i >= 1:
            acc = acc + sub1[i] * x[i - 1]
        if i >= 2:
            acc = acc + sub2[i] * x[i - 2]
        if i + 1 < n:
            acc = acc + sup1[i] * x[i + 1]
        if i + 2 < n:
            acc = acc + sup2[i] * x[i + 2]
        r[i] = rhs[i] - acc


@cython.boundscheck(False)
@cython.wraparound(False)
def run_static(cplx[::1] l2, cplx[::1] l1, cplx[::1] u0, cplx[::1] u1,
               cplx[::1] sub2, cplx[::1] sub1, cplx[::1] diag, cplx[::1] sup1, cplx[::1] sup2,
               cplx[::1] psi, long nsteps):
    """Apply ``psi <- 2 A^-1 psi - psi`` ``nsteps`` times, in place.

    Each solve gets one step of iterative refinement against the bands of
    A. Without it the rounding in the LU factors makes every step slightly
    non-unitary in the same direction, and the norm creeps up by about one
    ulp per step.
    """
    cdef Py_ssize_t n = psi.shape[0], i
    cdef long s
    work_a = np.empty(n, dtype=np.complex128)
    res_a = np.empty(n, dtype=np.complex128)
    cdef cplx[::1] w = work_a, r = res_a
    with nogil:
        for s in range(nsteps):
            for i in range(n):
                w[i] = psi[i]
            _solve(l2, l1, u0, u1, sup2, w)
            _residual(sub2, sub1, diag, sup1, sup2, w, psi, r)
            _solve(l2, l1, u0, u1, sup2, r)
            for i in range(n):
                psi[i] = 2.0 * (w[i] + r[i]) - psi[i]


@cython.boundscheck(False)
@cython.wraparound(False)
@cython.cdivision(True)
def run_moving(cplx[::1] psi, double k, double[::1] coeffs, double x0, double h,
               double velocity, double dt, long nsteps):
    """Crank-Nicolson steps with a potential that slides past the grid.

    Node i sits at ``x0 + i h + velocity t``, with t counted from the start
    of this call. The Hamiltonian rate
    matrix has off-diagonals ``-16 k`` and ``k`` (k = kinetic rate / 12 h^2)
    and diagonal ``30 k + V(x)`` with V given by its polynomial ``coeffs``
    (rates, lowest order first), evaluated at each step's midpoint time.
    The factorisation is fused with the forward sweep, and each solve is
    refined once as in :func:`run_static`. Returns the smallest pivot
    magnitude encountered.
    """
    cdef Py_ssize_t n = psi.shape[0], i, j
    cdef Py_ssize_t nc = coeffs.shape[0]
    cdef long s
    cdef double tau = 0.5 * dt
    cdef cplx a1 = 1j * tau * (-16.0 * k)
    cdef cplx a2 = 1j * tau * k
    cdef double dk = 30.0 * k
    cdef double shift, x, v, p, pmin = 1e308
    cdef cplx acc
    arrays = [np.zeros(n, dtype=np.complex128) for _ in range(7)]
    cdef cplx[::1] u0 = arrays[0], u1 = arrays[1], y = arrays[2], dia = arrays[3]
    cdef cplx[::1] l1 = arrays[4], l2 = arrays[5], r = arrays[6]
    with nogil:
        for s in range(nsteps):
            shift = x0 + velocity * ((s + 0.5) * dt)
            for i in range(n):
                x = shift + i * h
                v = coeffs[nc - 1]
                for j in range(nc - 2, -1, -1):
                    v = v * x + coeffs[j]
                dia[i] = 1.0 + 1j * tau * (dk + v)
                # fused LU and forward substitution
                if i >= 2:
                    l2[i] = a2 / u0[i - 2]
                    l1[i] = (a1 - l2[i] * u1[i - 2]) / u0[i - 1]
                    u0[i] = dia[i] - l1[i] * u1[i - 1] - l2[i] * a2
                    u1[i] = a1 - l1[i] * a2
                    y[i] = psi[i] - l1[i] * y[i - 1] - l2[i] * y[i - 2]
                elif i == 1:
                    l1[1] = a1 / u0[0]
                    u0[1] = dia[1] - l1[1] * u1[0]
                    u1[1] = a1 - l1[1] * a2
                    y[1] = psi[1] - l1[1] * y[0]
                else:
                    u0[0] = dia[0]
                    u1[0] = a1
                    y[0] = psi[0]
                p = cabs2(u0[i])
                if p < pmin:
                    pmin = p
            y[n - 1] = y[n - 1] / u0[n - 1]
            if n > 1:
                y[n - 2] = (y[n - 2] - u1[n - 2] * y[n - 1]) / u0[n - 2]
            for i in range(n - 3, -1, -1):
                y[i] = (y[i] - u1[i] * y[i + 1] - a2 * y[i + 2]) / u0[i]
            # one refinement step: r = psi - A y, then y += A^-1 r
            for i in range(n):
                acc = dia[i] * y[i]
                if i >= 1:
                    acc = acc + a1 * y[i - 1]
                if i >= 2:
                    acc = acc + a2 * y[i - 2]
                if i + 1 < n:
                    acc = acc + a1 * y[i + 1]
                if i + 2 < n:
                    acc = acc + a2 * y[i + 2]
                r[i] = psi[i] - acc
            _solve_const(l2, l1, u0, u1, a2, r)
            for i in range(n):
                psi[i] = 2.0 * (y[i] + r[i]) - psi[i]
    return pmin ** 0.5
