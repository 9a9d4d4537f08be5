# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops. ``_fallback`` holds numpy/scipy versions with identical signatures."""
import numpy as np
cimport numpy as cnp

cnp.import_array()


def thomas(const double[::1] lower, const double[::1] diag,
           const double[::1] upper, const double[::1] rhs):
    """Solve a tridiagonal system; ``lower[0]`` and ``upper[n-1]`` are ignored."""
    cdef Py_ssize_t n = diag.shape[0], i
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xa = np.empty(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ca = np.empty(n)
    cdef double[::1] x = xa
    cdef double[::1] cp = ca
    cdef double piv
    cdef Py_ssize_t bad = -1
    with nogil:
        piv = diag[0]
        if piv == 0.0:
            bad = 0
        else:
            cp[0] = upper[0] / piv if n > 1 else 0.0
            x[0] = rhs[0] / piv
            for i in range(1, n):
                piv = diag[i] - lower[i] * cp[i - 1]
                if piv == 0.0:
                    bad = i
                    break
                if i < n - 1:
                    cp[i] = upper[i] / piv
                x[i] = (rhs[i] - lower[i] * x[i - 1]) / piv
            if bad < 0:
                for i in range(n - 2, -1, -1):
                    x[i] -= cp[i] * x[i + 1]
    if bad >= 0:
        raise ZeroDivisionError(f"zero pivot in row {bad}")
    return xa


def tridiag_matvec(const double[::1] lower, const double[::1] diag,
                   const double[::1] upper, const double[::1] x):
    cdef Py_ssize_t n = diag.shape[0], i
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ya = np.empty(n)
    cdef double[::1] y = ya
    with nogil:
        for i in range(n):
            y[i] = diag[i] * x[i]
            if i > 0:
                y[i] += lower[i] * x[i - 1]
            if i < n - 1:
                y[i] += upper[i] * x[i + 1]
    return ya


def stencil_apply(const double[::1] diag, const double[::1] x, tuple shape, tuple off):
    """``y = diag*x + sum_axis off[axis] * (x[+1] + x[-1])`` with zero Dirichlet padding."""
    cdef Py_ssize_t ndim = len(shape)
    cdef Py_ssize_t n0 = shape[0]
    cdef Py_ssize_t n1 = shape[1] if ndim > 1 else 1
    cdef Py_ssize_t n2 = shape[2] if ndim > 2 else 1
    cdef double o0 = off[0]
    cdef double o1 = off[1] if ndim > 1 else 0.0
    cdef double o2 = off[2] if ndim > 2 else 0.0
    cdef Py_ssize_t s0 = n1 * n2, s1 = n2
    cdef Py_ssize_t i, j, k, p
    cdef double acc
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ya = np.empty(n0 * n1 * n2)
    cdef double[::1] y = ya
    with nogil:
        for i in range(n0):
            for j in range(n1):
                for k in range(n2):
                    p = i * s0 + j * s1 + k
                    acc = 0.0
                    if i > 0:
                        acc = acc + x[p - s0]
                    if i < n0 - 1:
                        acc = acc + x[p + s0]
                    y[p] = diag[p] * x[p] + o0 * acc
                    if ndim > 1:
                        acc = 0.0
                        if j > 0:
                            acc = acc + x[p - s1]
                        if j < n1 - 1:
                            acc = acc + x[p + s1]
                        y[p] += o1 * acc
                    if ndim > 2:
                        acc = 0.0
                        if k > 0:
                            acc = acc + x[p - 1]
                        if k < n2 - 1:
                            acc = acc + x[p + 1]
                        y[p] += o2 * acc
    return ya
