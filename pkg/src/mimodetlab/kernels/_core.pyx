# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: complex LLL reduction and sphere search.

Mirrors kernels/pure.py; candidate ordering and rounding conventions
must stay in lockstep with the pure implementations.
"""

from libc.math cimport INFINITY, fabs, floor, hypot
from libc.stdlib cimport free, malloc

import numpy as np

IMPLEMENTATION = "compiled"

ctypedef double complex cplx


cdef inline double _round_away(double v) nogil:
    if v >= 0:
        return floor(v + 0.5)
    return -floor(-v + 0.5)


cdef inline double cabs2(cplx z) nogil:
    return z.real * z.real + z.imag * z.imag


def round_gaussian(z):
    """Round real and imaginary parts to nearest integers, ties away
    from zero."""
    cdef double re = z.real
    cdef double im = z.imag
    return complex(_round_away(re), _round_away(im))


def clll_kernel(cplx[:, ::1] q, cplx[:, ::1] r, cplx[:, ::1] t,
                double delta, long max_iters):
    """In-place complex LLL reduction of QR factors (see pure mirror)."""
    cdef Py_ssize_t m = q.shape[0]
    cdef Py_ssize_t n = r.shape[0]
    cdef Py_ssize_t k = 1, i, j
    cdef long iters = 0
    cdef cplx u, a, b, al, be, albar, bebar, tmp, hi, lo
    cdef double nrm, lhs, rhs

    while k < n:
        iters += 1
        if iters > max_iters:
            return -1
        for i in range(k - 1, -1, -1):
            u = r[i, k] / r[i, i]
            u = complex(_round_away(u.real), _round_away(u.imag))
            if u.real != 0 or u.imag != 0:
                for j in range(i + 1):
                    r[j, k] = r[j, k] - u * r[j, i]
                for j in range(n):
                    t[j, k] = t[j, k] - u * t[j, i]
        lhs = delta * cabs2(r[k - 1, k - 1])
        rhs = cabs2(r[k, k]) + cabs2(r[k - 1, k])
        if lhs > rhs:
            for j in range(n):
                tmp = r[j, k - 1]
                r[j, k - 1] = r[j, k]
                r[j, k] = tmp
                tmp = t[j, k - 1]
                t[j, k - 1] = t[j, k]
                t[j, k] = tmp
            a = r[k - 1, k - 1]
            b = r[k, k - 1]
            nrm = hypot(hypot(a.real, a.imag), hypot(b.real, b.imag))
            al = a / nrm
            be = b / nrm
            albar = al.conjugate()
            bebar = be.conjugate()
            for j in range(k - 1, n):
                hi = albar * r[k - 1, j] + be * r[k, j]
                lo = -be * r[k - 1, j] + al * r[k, j]
                r[k - 1, j] = hi
                r[k, j] = lo
            r[k, k - 1] = 0.0
            for j in range(m):
                hi = q[j, k - 1] * al + q[j, k] * bebar
                lo = -q[j, k - 1] * bebar + q[j, k] * albar
                q[j, k - 1] = hi
                q[j, k] = lo
            if k > 1:
                k -= 1
        else:
            k += 1
    return iters


def sphere_search(cplx[:, ::1] r, cplx[::1] y, double[::1] re_levels,
                  double[::1] im_levels):
    """Depth-first sphere search on upper-triangular factors.

    Same contract as the pure mirror: Schnorr-Euchner ordering with
    index tie-break, infinite initial radius, lexicographic resolution
    of equal-distance leaves. Lazy minimum selection replaces the sort;
    the visit order is identical.
    """
    cdef Py_ssize_t n = r.shape[0]
    cdef Py_ssize_t n_re = re_levels.shape[0]
    cdef Py_ssize_t n_im = im_levels.shape[0]
    cdef Py_ssize_t m_cand = n_re * n_im
    cdef Py_ssize_t k, i, c, ci, best_c
    cdef double best = INFINITY
    cdef double d, dm
    cdef long nodes = 0
    cdef cplx resid
    cdef bint lex_smaller

    cdef cplx *cand = <cplx *> malloc(m_cand * sizeof(cplx))
    cdef double *dist = <double *> malloc(n * m_cand * sizeof(double))
    cdef unsigned char *used = <unsigned char *> malloc(n * m_cand)
    cdef double *pd = <double *> malloc(n * sizeof(double))
    cdef long *taken = <long *> malloc(n * sizeof(long))
    cdef long *chosen = <long *> malloc(n * sizeof(long))
    cdef long *best_idx = <long *> malloc(n * sizeof(long))
    if cand == NULL or dist == NULL or used == NULL or pd == NULL \
            or taken == NULL or chosen == NULL or best_idx == NULL:
        free(cand); free(dist); free(used); free(pd)
        free(taken); free(chosen); free(best_idx)
        raise MemoryError()

    try:
        for i in range(n_re):
            for ci in range(n_im):
                cand[i * n_im + ci] = re_levels[i] + 1j * im_levels[ci]

        # enter layer n-1
        k = n - 1
        resid = y[k]
        for c in range(m_cand):
            dist[k * m_cand + c] = cabs2(resid - r[k, k] * cand[c])
            used[k * m_cand + c] = 0
        pd[k] = 0.0
        taken[k] = 0

        while True:
            # pick the unused candidate with smallest (dist, index)
            if taken[k] >= m_cand:
                k += 1
                if k >= n:
                    break
                continue
            best_c = -1
            dm = INFINITY
            for c in range(m_cand):
                if not used[k * m_cand + c] and dist[k * m_cand + c] < dm:
                    dm = dist[k * m_cand + c]
                    best_c = c
            used[k * m_cand + best_c] = 1
            taken[k] += 1
            d = pd[k] + dm
            if d > best:
                k += 1
                if k >= n:
                    break
                continue
            nodes += 1
            chosen[k] = best_c
            if k == 0:
                if d < best:
                    best = d
                    for i in range(n):
                        best_idx[i] = chosen[i]
                elif d == best:
                    lex_smaller = False
                    for i in range(n):
                        if chosen[i] != best_idx[i]:
                            lex_smaller = chosen[i] < best_idx[i]
                            break
                    if lex_smaller:
                        for i in range(n):
                            best_idx[i] = chosen[i]
            else:
                k -= 1
                resid = y[k]
                for i in range(k + 1, n):
                    resid = resid - r[k, i] * cand[chosen[i]]
                for c in range(m_cand):
                    dist[k * m_cand + c] = cabs2(resid - r[k, k] * cand[c])
                    used[k * m_cand + c] = 0
                pd[k] = d
                taken[k] = 0

        out = np.empty(n, dtype=np.int64)
        for i in range(n):
            out[i] = best_idx[i]
        return out, nodes
    finally:
        free(cand); free(dist); free(used); free(pd)
        free(taken); free(chosen); free(best_idx)
