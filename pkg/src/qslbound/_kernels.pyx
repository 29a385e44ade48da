# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: batched complex Hermitian Jacobi and ordered products.

Both routines mirror :mod:`qslbound._fallback` exactly; the pure-Python
versions are used when this extension is not built.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport atan2, cos, sin, sqrt

cnp.import_array()

ctypedef double complex cplx


cdef inline double cabs2(cplx z) nogil:
    return z.real * z.real + z.imag * z.imag


cdef int _jacobi_one(cplx* a, cplx* v, Py_ssize_t d, double tol, int max_sweeps) noexcept nogil:
    cdef Py_ssize_t p, q, k
    cdef int sweep
    cdef double off, scale, mag, app, aqq, theta, c, s
    cdef cplx ph, cph, akp, akq, apk, aqk

    for p in range(d):
        for q in range(d):
            v[p * d + q] = 1.0 if p == q else 0.0

    scale = 0.0
    for p in range(d):
        for q in range(d):
            scale += cabs2(a[p * d + q])
    if scale == 0.0:
        return 0

    for sweep in range(max_sweeps):
        off = 0.0
        for p in range(d - 1):
            for q in range(p + 1, d):
                off += cabs2(a[p * d + q])
        if off <= tol * tol * scale:
            return sweep
        for p in range(d - 1):
            for q in range(p + 1, d):
                mag = sqrt(cabs2(a[p * d + q]))
                if mag == 0.0:
                    continue
                ph = a[p * d + q] / mag
                cph = ph.conjugate()
                app = a[p * d + p].real
                aqq = a[q * d + q].real
                theta = 0.5 * atan2(2.0 * mag, aqq - app)
                c = cos(theta)
                s = sin(theta)
                for k in range(d):
                    akp = a[k * d + p]
                    akq = a[k * d + q]
                    a[k * d + p] = c * akp - s * cph * akq
                    a[k * d + q] = s * akp + c * cph * akq
                for k in range(d):
                    apk = a[p * d + k]
                    aqk = a[q * d + k]
                    a[p * d + k] = c * apk - s * ph * aqk
                    a[q * d + k] = s * apk + c * ph * aqk
                for k in range(d):
                    akp = v[k * d + p]
                    akq = v[k * d + q]
                    v[k * d + p] = c * akp - s * cph * akq
                    v[k * d + q] = s * akp + c * cph * akq
                a[p * d + q] = 0.0
                a[q * d + p] = 0.0
                a[p * d + p] = a[p * d + p].real
                a[q * d + q] = a[q * d + q].real
    return -1


def jacobi_eigh(cnp.ndarray mats, double tol=1e-15, int max_sweeps=64):
    """Eigendecompose a stack ``(n, d, d)`` of Hermitian matrices.

    Returns ``(w, v)`` with eigenvalues ascending along the last axis.
    """
    cdef cplx[:, :, ::1] a = np.ascontiguousarray(mats, dtype=np.complex128).copy()
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t d = a.shape[1]
    v_arr = np.empty((n, d, d), dtype=np.complex128)
    cdef cplx[:, :, ::1] v = v_arr
    w_arr = np.empty((n, d), dtype=np.float64)
    cdef double[:, ::1] w = w_arr
    cdef Py_ssize_t i, j
    cdef int status
    cdef int failed = 0
    with nogil:
        for i in range(n):
            status = _jacobi_one(&a[i, 0, 0], &v[i, 0, 0], d, tol, max_sweeps)
            if status < 0:
                failed += 1
            for j in range(d):
                w[i, j] = a[i, j, j].real
    if failed:
        raise ArithmeticError(f"Jacobi did not converge for {failed} matrices")
    order = np.argsort(w_arr, axis=1, kind="stable")
    w_arr = np.take_along_axis(w_arr, order, axis=1)
    v_arr = np.take_along_axis(v_arr, order[:, None, :], axis=2)
    return w_arr, v_arr


def ordered_product(cnp.ndarray steps):
    """Cumulative left products ``U_k = S_{k-1} ... S_0`` with ``U_0 = I``."""
    cdef cplx[:, :, ::1] s = np.ascontiguousarray(steps, dtype=np.complex128)
    cdef Py_ssize_t n = s.shape[0]
    cdef Py_ssize_t d = s.shape[1]
    out_arr = np.zeros((n + 1, d, d), dtype=np.complex128)
    cdef cplx[:, :, ::1] out = out_arr
    cdef Py_ssize_t k, i, j, m
    cdef cplx acc
    with nogil:
        for i in range(d):
            out[0, i, i] = 1.0
        for k in range(n):
            for i in range(d):
                for j in range(d):
                    acc = 0.0
                    for m in range(d):
                        acc = acc + s[k, i, m] * out[k, m, j]
                    out[k + 1, i, j] = acc
    return out_arr
