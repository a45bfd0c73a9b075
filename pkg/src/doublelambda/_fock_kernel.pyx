# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Fused-loop two-mode master-equation right-hand side.

Same contract as ``_fock_numpy.master_rhs``: one pass builds ``X`` element by
element, a second pass writes ``X + X^dagger``.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()

ctypedef double complex cplx


def master_rhs(cnp.ndarray rho_in, coeffs):
    cdef cnp.ndarray[cplx, ndim=4, mode="c"] rho = np.ascontiguousarray(rho_in, dtype=np.complex128)
    cdef Py_ssize_t n = rho.shape[0]
    cdef cnp.ndarray[cplx, ndim=4, mode="c"] x = np.empty_like(rho)
    cdef cplx cl1 = coeffs[0], cg1 = coeffs[1], cl2 = coeffs[2], cg2 = coeffs[3]
    cdef cplx k1 = coeffs[4], k2 = coeffs[5], k3 = coeffs[6], k4 = coeffs[7]
    cdef bint cross = (k1 != 0) or (k2 != 0) or (k3 != 0) or (k4 != 0)
    cdef Py_ssize_t a, b, c, d, top = n - 1
    cdef cplx r, acc
    cdef double ea, ed
    cdef double[:] sq = np.sqrt(np.arange(n + 1, dtype=np.float64))

    for a in range(n):
        ea = a + 1.0 if a < top else 0.0
        for b in range(n):
            for c in range(n):
                for d in range(n):
                    r = rho[a, b, c, d]
                    ed = d + 1.0 if d < top else 0.0
                    acc = -(cl1 * c + cg1 * ea + cl2 * b + cg2 * ed) * r
                    if a < top and c < top:
                        acc = acc + cl1 * sq[a + 1] * sq[c + 1] * rho[a + 1, b, c + 1, d]
                    if a > 0 and c > 0:
                        acc = acc + cg1 * sq[a] * sq[c] * rho[a - 1, b, c - 1, d]
                    if b < top and d < top:
                        acc = acc + cl2 * sq[b + 1] * sq[d + 1] * rho[a, b + 1, c, d + 1]
                    if b > 0 and d > 0:
                        acc = acc + cg2 * sq[b] * sq[d] * rho[a, b - 1, c, d - 1]
                    if cross:
                        if b < top and c > 0:
                            acc = acc + k1 * sq[b + 1] * sq[c] * rho[a, b + 1, c - 1, d]
                        if c > 0 and d > 0:
                            acc = acc - k2 * sq[c] * sq[d] * rho[a, b, c - 1, d - 1]
                        if a < top and d > 0:
                            acc = acc + k3 * sq[a + 1] * sq[d] * rho[a + 1, b, c, d - 1]
                        if a < top and b < top:
                            acc = acc - k4 * sq[a + 1] * sq[b + 1] * rho[a + 1, b + 1, c, d]
                    x[a, b, c, d] = acc

    cdef cnp.ndarray[cplx, ndim=4, mode="c"] out = np.empty_like(rho)
    cdef cplx u, v
    for a in range(n):
        for b in range(n):
            for c in range(n):
                for d in range(n):
                    u = x[a, b, c, d]
                    v = x[c, d, a, b]
                    out[a, b, c, d] = u + v.conjugate()
    return out
