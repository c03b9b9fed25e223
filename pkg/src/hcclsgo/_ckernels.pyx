# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled objective kernels; mirrors ``_pykernels`` call for call."""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, expm1, log, sin, cos, sqrt, pow, fabs, M_PI, M_E
from libc.stdlib cimport malloc, free

cnp.import_array()

cdef enum:
    SCHWEFEL = 0
    ELLIPTIC = 1
    RASTRIGIN = 2
    ACKLEY = 3


cdef inline double _osz(double x) nogil:
    cdef double xh, c1, c2
    if x == 0.0:
        return 0.0
    xh = log(fabs(x))
    if x > 0.0:
        c1 = 10.0
        c2 = 7.9
        return exp(xh + 0.049 * (sin(c1 * xh) + sin(c2 * xh)))
    c1 = 5.5
    c2 = 3.1
    return -exp(xh + 0.049 * (sin(c1 * xh) + sin(c2 * xh)))


cdef inline void _asy(double* v, Py_ssize_t n, double beta) nogil:
    cdef Py_ssize_t i
    if n < 2:
        return
    for i in range(1, n):
        if v[i] > 0.0:
            v[i] = pow(v[i], 1.0 + beta * (<double>i / <double>(n - 1)) * sqrt(v[i]))


cdef double _base(const double* z, Py_ssize_t n, int base_id) nogil:
    cdef Py_ssize_t i
    cdef double acc = 0.0, run = 0.0, s2 = 0.0, sc = 0.0
    if base_id == SCHWEFEL:
        for i in range(n):
            run += z[i]
            acc += run * run
        return acc
    if base_id == ELLIPTIC:
        if n < 2:
            for i in range(n):
                acc += z[i] * z[i]
            return acc
        for i in range(n):
            acc += pow(10.0, 6.0 * <double>i / <double>(n - 1)) * z[i] * z[i]
        return acc
    if base_id == RASTRIGIN:
        for i in range(n):
            acc += z[i] * z[i] - 10.0 * cos(2.0 * M_PI * z[i]) + 10.0
        return acc
    # ACKLEY
    for i in range(n):
        s2 += z[i] * z[i]
        sc += cos(2.0 * M_PI * z[i])
    # expm1 form of the usual expression: no cancellation, exact 0 at the optimum
    return -20.0 * expm1(-0.2 * sqrt(s2 / n)) - M_E * expm1(sc / n - 1.0)


def t_osz(v):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] a = np.ascontiguousarray(v, dtype=np.float64).ravel().copy()
    cdef Py_ssize_t i
    for i in range(a.shape[0]):
        a[i] = _osz(a[i])
    return a.reshape(np.shape(v))


def t_asy(v, double beta):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] a = np.array(v, dtype=np.float64, ndmin=2, order="C", copy=True)
    cdef Py_ssize_t r
    for r in range(a.shape[0]):
        _asy(&a[r, 0], a.shape[1], beta)
    return a.reshape(np.shape(v))


def base_eval(z, int base_id):
    if base_id < 0 or base_id > 3:
        raise ValueError(f"unknown base function id {base_id}")
    cdef cnp.ndarray[cnp.float64_t, ndim=2] a = np.array(z, dtype=np.float64, ndmin=2, order="C")
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(a.shape[0])
    cdef Py_ssize_t r
    for r in range(a.shape[0]):
        out[r] = _base(&a[r, 0], a.shape[1], base_id)
    if np.ndim(z) == 1:
        return float(out[0])
    return out


def composite_eval(Y, const cnp.int64_t[::1] idx_flat, const cnp.int64_t[::1] idx_off,
                   const double[::1] rot_flat, const cnp.int64_t[::1] rot_off,
                   const double[::1] weights, int base_id):
    cdef const double[:, ::1] y = np.ascontiguousarray(Y, dtype=np.float64)
    cdef Py_ssize_t n = y.shape[0], m = weights.shape[0]
    cdef Py_ssize_t r, s, a, b, k, kmax = 1
    cdef const cnp.int64_t* idx
    cdef const double* R
    cdef double acc
    out = np.zeros(n)
    cdef double[::1] o = out
    for s in range(m):
        k = idx_off[s + 1] - idx_off[s]
        if k > kmax:
            kmax = k
    cdef double* ys = <double*> malloc(kmax * sizeof(double))
    cdef double* z = <double*> malloc(kmax * sizeof(double))
    if ys == NULL or z == NULL:
        free(ys)
        free(z)
        raise MemoryError()
    try:
        # subspace-major so each rotation block stays cached across the batch
        with nogil:
            for s in range(m):
                k = idx_off[s + 1] - idx_off[s]
                idx = &idx_flat[idx_off[s]]
                R = &rot_flat[rot_off[s]]
                for r in range(n):
                    for a in range(k):
                        ys[a] = y[r, idx[a]]
                    for a in range(k):
                        acc = 0.0
                        for b in range(k):
                            acc = acc + R[a * k + b] * ys[b]
                        z[a] = _osz(acc)
                    _asy(z, k, 0.2)
                    o[r] += weights[s] * _base(z, k, base_id)
    finally:
        free(ys)
        free(z)
    return out
