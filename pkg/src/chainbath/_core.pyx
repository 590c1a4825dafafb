# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Fused computation of the reduced-covariance window tables.

Same contract as _core_py.window_tables (see there for the table
definitions); this version fuses the trigonometric factors, the
overlap contraction and the thermal weighting into one pass per sample
time, parallelized over times.
"""

import numpy as np

from cython.parallel cimport prange
from libc.math cimport cos, fabs, sin
from libc.stdlib cimport free, malloc


def window_tables(const double[::1] omega, const double[::1] o1, const double[::1] o2,
                  const double[:, ::1] overlap, const double[::1] times,
                  const double[:, ::1] wq, const double[:, ::1] wp, int num_threads=1):
    cdef Py_ssize_t nt = times.shape[0]
    cdef Py_ssize_t n = omega.shape[0]
    cdef Py_ssize_t m = overlap.shape[1]
    cdef Py_ssize_t n_temp = wq.shape[1]
    if overlap.shape[0] != n or o1.shape[0] != n or o2.shape[0] != n:
        raise ValueError("window_tables: inconsistent mode dimensions")
    if wp.shape[0] != m or wq.shape[0] != m or wp.shape[1] != n_temp:
        raise ValueError("window_tables: inconsistent weight dimensions")
    if num_threads < 1:
        num_threads = 1

    mc_arr = np.empty((nt, 3))
    ms_arr = np.empty((nt, 3))
    md_arr = np.empty((nt, 3))
    bath_arr = np.zeros((nt, n_temp, 10))
    cdef double[:, ::1] mc = mc_arr
    cdef double[:, ::1] ms = ms_arr
    cdef double[:, ::1] md = md_arr
    cdef double[:, :, ::1] bath = bath_arr

    cdef Py_ssize_t it, k, j, q
    cdef double t, wt, ck, sk, swk, dk, a1, a2
    cdef double f0, f1, f2, f3, f4, f5
    cdef double mc11, mc12, mc22, ms11, ms12, ms22, md11, md12, md22
    cdef double bc1, bs1, bd1, bc2, bs2, bd2, aT, bT
    cdef double q0, q1, q2, q3, q4, q5, q6, q7, q8, q9
    cdef double p0, p1, p2, p3, p5, p7, p8
    cdef double *b
    cdef double *b0
    cdef double *b1
    cdef double *b2
    cdef double *b3
    cdef double *b4
    cdef double *b5
    cdef const double *wrow

    for it in prange(nt, nogil=True, schedule="static", num_threads=num_threads):
        b = <double *> malloc(6 * m * sizeof(double))
        if b == NULL:
            with gil:
                raise MemoryError()
        for j in range(6 * m):
            b[j] = 0.0
        b0 = b
        b1 = b + m
        b2 = b + 2 * m
        b3 = b + 3 * m
        b4 = b + 4 * m
        b5 = b + 5 * m
        t = times[it]
        mc11 = mc12 = mc22 = 0.0
        ms11 = ms12 = ms22 = 0.0
        md11 = md12 = md22 = 0.0
        for k in range(n):
            wt = omega[k] * t
            ck = cos(wt)
            sk = sin(wt)
            if fabs(wt) < 1e-6:
                swk = t
            else:
                swk = sk / omega[k]
            dk = -omega[k] * sk
            a1 = o1[k]
            a2 = o2[k]
            mc11 = mc11 + ck * a1 * a1
            mc12 = mc12 + ck * a1 * a2
            mc22 = mc22 + ck * a2 * a2
            ms11 = ms11 + swk * a1 * a1
            ms12 = ms12 + swk * a1 * a2
            ms22 = ms22 + swk * a2 * a2
            md11 = md11 + dk * a1 * a1
            md12 = md12 + dk * a1 * a2
            md22 = md22 + dk * a2 * a2
            f0 = ck * a1
            f1 = swk * a1
            f2 = dk * a1
            f3 = ck * a2
            f4 = swk * a2
            f5 = dk * a2
            # six contiguous fused multiply-add passes over the overlap row
            wrow = &overlap[k, 0]
            for j in range(m):
                b0[j] += f0 * wrow[j]
            for j in range(m):
                b1[j] += f1 * wrow[j]
            for j in range(m):
                b2[j] += f2 * wrow[j]
            for j in range(m):
                b3[j] += f3 * wrow[j]
            for j in range(m):
                b4[j] += f4 * wrow[j]
            for j in range(m):
                b5[j] += f5 * wrow[j]
        mc[it, 0] = mc11
        mc[it, 1] = mc12
        mc[it, 2] = mc22
        ms[it, 0] = ms11
        ms[it, 1] = ms12
        ms[it, 2] = ms22
        md[it, 0] = md11
        md[it, 1] = md12
        md[it, 2] = md22
        for j in range(m):
            bc1 = b[j]
            bs1 = b[m + j]
            bd1 = b[2 * m + j]
            bc2 = b[3 * m + j]
            bs2 = b[4 * m + j]
            bd2 = b[5 * m + j]
            q0 = bc1 * bc1
            q1 = bc1 * bd1
            q2 = bc1 * bc2
            q3 = bc1 * bd2
            q4 = bd1 * bd1
            q5 = bd1 * bc2
            q6 = bd1 * bd2
            q7 = bc2 * bc2
            q8 = bc2 * bd2
            q9 = bd2 * bd2
            p0 = bs1 * bs1
            p1 = bs1 * bc1
            p2 = bs1 * bs2
            p3 = bs1 * bc2
            p5 = bc1 * bs2
            p7 = bs2 * bs2
            p8 = bs2 * bc2
            for q in range(n_temp):
                aT = wq[j, q]
                bT = wp[j, q]
                bath[it, q, 0] += aT * q0 + bT * p0
                bath[it, q, 1] += aT * q1 + bT * p1
                bath[it, q, 2] += aT * q2 + bT * p2
                bath[it, q, 3] += aT * q3 + bT * p3
                bath[it, q, 4] += aT * q4 + bT * q0
                bath[it, q, 5] += aT * q5 + bT * p5
                bath[it, q, 6] += aT * q6 + bT * q2
                bath[it, q, 7] += aT * q7 + bT * p7
                bath[it, q, 8] += aT * q8 + bT * p8
                bath[it, q, 9] += aT * q9 + bT * q7
        free(b)
    return mc_arr, ms_arr, md_arr, bath_arr
