# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled versions of the kernels in ``_kernels_py``.

Same signatures and semantics; entropies in nats.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, log, sqrt, fabs
from scipy.linalg.cython_lapack cimport zheev

cnp.import_array()

cdef double EIG_FLOOR = 1e-12


cdef double _entropy_term(double complex[:, ::1] m, int d, double[::1] w,
                          double complex[::1] work, int lwork, double[::1] rwork) nogil:
    """Return -sum lam ln lam + p ln p for the unnormalised block ``m`` (destroyed)."""
    cdef char jobz = b'N'
    cdef char uplo = b'L'
    cdef int info = 0
    cdef int n = d
    cdef int i
    cdef double p = 0.0, acc = 0.0, lam
    zheev(&jobz, &uplo, &n, &m[0, 0], &n, &w[0], &work[0], &lwork, &rwork[0], &info)
    if info != 0:
        return -1e300
    for i in range(d):
        lam = w[i]
        p += lam
        if lam > EIG_FLOOR:
            acc -= lam * log(lam)
    if p > EIG_FLOOR:
        acc += p * log(p)
    else:
        acc = 0.0
    return acc


cdef inline double _xlogx(double x) nogil:
    return x * log(x) if x > EIG_FLOOR else 0.0


cdef inline double _entropy_term2(double complex a, double complex z, double complex c) nogil:
    """Closed-form version of ``_entropy_term`` for a 2 x 2 block [[a, z], [z*, c]]."""
    cdef double half_tr = 0.5 * (a.real + c.real)
    cdef double half_diff = 0.5 * (a.real - c.real)
    cdef double r = sqrt(half_diff * half_diff + z.real * z.real + z.imag * z.imag)
    cdef double p = 2.0 * half_tr
    if p <= EIG_FLOOR:
        return 0.0
    return -_xlogx(half_tr + r) - _xlogx(half_tr - r) + p * log(p)


def qubit_conditional_entropies(blocks, thetas, phis):
    cdef double complex[:, :, :, ::1] b = np.ascontiguousarray(blocks, dtype=np.complex128)
    cdef double[::1] th = np.ascontiguousarray(thetas, dtype=np.float64)
    cdef double[::1] ph = np.ascontiguousarray(phis, dtype=np.float64)
    cdef Py_ssize_t n = th.shape[0]
    cdef int d = <int> b.shape[2]
    cdef int lwork = max(1, 2 * d - 1) * 4
    out_arr = np.zeros(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double complex[:, ::1] mp = np.empty((d, d), dtype=np.complex128)
    cdef double complex[:, ::1] mm = np.empty((d, d), dtype=np.complex128)
    cdef double[::1] w = np.empty(d, dtype=np.float64)
    cdef double complex[::1] work = np.empty(lwork, dtype=np.complex128)
    cdef double[::1] rwork = np.empty(max(1, 3 * d - 2), dtype=np.float64)
    cdef Py_ssize_t k, i, j
    cdef double c, s, v1, v2
    cdef double complex e, ec, val
    for k in range(n):
        c = cos(th[k] / 2)
        s = sin(th[k] / 2)
        e = cos(ph[k]) + 1j * sin(ph[k])
        ec = cos(ph[k]) - 1j * sin(ph[k])
        if d <= 2:
            for i in range(d):
                for j in range(d):
                    val = (c * c * b[0, 0, i, j] + s * s * b[1, 1, i, j]
                           + c * s * e * b[0, 1, i, j] + c * s * ec * b[1, 0, i, j])
                    mp[i, j] = val
                    mm[i, j] = b[0, 0, i, j] + b[1, 1, i, j] - val
            if d == 1:
                out[k] = 0.0
            else:
                out[k] = (_entropy_term2(mp[0, 0], mp[1, 0], mp[1, 1])
                          + _entropy_term2(mm[0, 0], mm[1, 0], mm[1, 1]))
            continue
        for i in range(d):
            for j in range(d):
                val = (c * c * b[0, 0, i, j] + s * s * b[1, 1, i, j]
                       + c * s * e * b[0, 1, i, j] + c * s * ec * b[1, 0, i, j])
                mp[i, j] = val
                mm[i, j] = b[0, 0, i, j] + b[1, 1, i, j] - val
        v1 = _entropy_term(mp, d, w, work, lwork, rwork)
        v2 = _entropy_term(mm, d, w, work, lwork, rwork)
        if v1 < -1e299 or v2 < -1e299:
            raise np.linalg.LinAlgError("zheev failed to converge")
        out[k] = v1 + v2
    return out_arr


def masked_products(values, masks):
    cdef double complex[::1] v = np.ascontiguousarray(values, dtype=np.complex128)
    cdef cnp.uint8_t[:, ::1] m = np.ascontiguousarray(masks, dtype=np.uint8)
    cdef Py_ssize_t rows = m.shape[0], cols = m.shape[1], r, k
    out_arr = np.ones(rows, dtype=np.complex128)
    cdef double complex[::1] out = out_arr
    cdef double complex acc
    for r in range(rows):
        acc = 1.0
        for k in range(cols):
            if m[r, k]:
                acc = acc * v[k]
        out[r] = acc
    return out_arr


cdef inline double _rank2_entropy(double wp, double complex coh) nogil:
    cdef double mod2 = coh.real * coh.real + coh.imag * coh.imag
    cdef double disc = 1.0 - 4.0 * wp * (1.0 - mod2)
    cdef double l1, l2, acc = 0.0
    if disc < 0.0:
        disc = 0.0
    elif disc > 1.0:
        disc = 1.0
    disc = sqrt(disc)
    l1 = (1.0 + disc) / 2.0
    l2 = (1.0 - disc) / 2.0
    if l1 > EIG_FLOOR:
        acc -= l1 * log(l1)
    if l2 > EIG_FLOOR:
        acc -= l2 * log(l2)
    return acc


def branch_mutual_information(overlaps, masks, double pa, double pb):
    cdef double complex[::1] v = np.ascontiguousarray(overlaps, dtype=np.complex128)
    cdef cnp.uint8_t[:, ::1] m = np.ascontiguousarray(masks, dtype=np.uint8)
    cdef Py_ssize_t rows = m.shape[0], cols = m.shape[1], r, k
    cdef double wp = pa * pb
    cdef double complex total = 1.0, inside, outside
    for k in range(cols):
        total = total * v[k]
    cdef double h_s = _rank2_entropy(wp, total)
    out_arr = np.empty(rows, dtype=np.float64)
    cdef double[::1] out = out_arr
    for r in range(rows):
        inside = 1.0
        outside = 1.0
        for k in range(cols):
            if m[r, k]:
                inside = inside * v[k]
            else:
                outside = outside * v[k]
        out[r] = h_s + _rank2_entropy(wp, inside) - _rank2_entropy(wp, outside)
    return out_arr
