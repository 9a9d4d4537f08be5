"""Pure numpy/scipy versions of the compiled kernels in ``_kernels.pyx``."""
import numpy as np
from scipy.linalg import lapack


def thomas(lower, diag, upper, rhs):
    n = diag.shape[0]
    if n == 1:
        if diag[0] == 0.0:
            raise ZeroDivisionError("zero pivot in row 0")
        return np.array([rhs[0] / diag[0]])
    _, _, _, x, info = lapack.dgtsv(lower[1:], diag, upper[:-1], rhs)
    if info > 0:
        raise ZeroDivisionError(f"zero pivot in row {info - 1}")
    return x


def tridiag_matvec(lower, diag, upper, x):
    y = diag * x
    y[1:] += lower[1:] * x[:-1]
    y[:-1] += upper[:-1] * x[1:]
    return y


def stencil_apply(diag, x, shape, off):
    # same association as the compiled loop: (left + right) per axis, then scale
    u = x.reshape(shape)
    y = (diag * x).reshape(shape)
    for axis, o in enumerate(off):
        acc = np.zeros(shape)
        lo = [slice(None)] * len(shape)
        hi = [slice(None)] * len(shape)
        lo[axis] = slice(None, -1)
        hi[axis] = slice(1, None)
        lo, hi = tuple(lo), tuple(hi)
        acc[hi] += u[lo]
        acc[lo] += u[hi]
        y += o * acc
    return y.ravel()
