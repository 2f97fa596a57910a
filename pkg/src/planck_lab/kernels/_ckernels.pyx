# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot kernels; same contracts as ``_pykernels``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, sqrt, log, exp, fabs, fmod, atan2, hypot, M_PI

cnp.import_array()

cdef double TWO_PI = 2.0 * M_PI
cdef double RESCALE = 1e200
cdef double LOG_RESCALE = log(1e200)


cdef enum:
    BLOCK = 32


def sphere_mode(int ell, const double[::1] ccos, const double[::1] csin, theta, phi,
                const double[::1] log_c, rec_a_lm, rec_b_lm):
    # the recurrence runs over l at fixed m, so store the tables m-major
    cdef const double[:, ::1] rec_a = np.ascontiguousarray(np.asarray(rec_a_lm).T)
    cdef const double[:, ::1] rec_b = np.ascontiguousarray(np.asarray(rec_b_lm).T)
    cdef const double[::1] th = np.ascontiguousarray(theta, dtype=np.float64)
    cdef const double[::1] ph = np.ascontiguousarray(phi, dtype=np.float64)
    cdef Py_ssize_t n = th.shape[0]
    u_arr = np.zeros(n)
    gth_arr = np.zeros(n)
    gph_arr = np.zeros(n)
    cdef double[::1] u = u_arr
    cdef double[::1] gth = gth_arr
    cdef double[::1] gph = gph_arr
    cdef int mmax = -1
    cdef int m, l, mtop
    for m in range(ell + 1):
        if ccos[m] != 0.0 or csin[m] != 0.0:
            mmax = m
    if mmax < 0 or n == 0:
        return u_arr, gth_arr, gph_arr
    mtop = min(ell, mmax + 1)
    # per block: P[m, b] and Q[m, b] for the points of the block
    P_arr = np.zeros((mtop + 2, BLOCK))
    Q_arr = np.zeros((mtop + 2, BLOCK))
    cdef double[:, ::1] P = P_arr
    cdef double[:, ::1] Q = Q_arr
    cdef double x[BLOCK]
    cdef double s[BLOCK]
    cdef double logs[BLOCK]
    cdef double p[BLOCK]
    cdef double p_prev[BLOCK]
    cdef double scale[BLOCK]
    cdef Py_ssize_t i0, b, nb, blk = BLOCK
    cdef double a_l, b_l, p_new, dP, ang, cm, sm, sq2 = sqrt(2.0), c_up, c_dn, c0
    c0 = sqrt(ell * (ell + 1.0))
    with nogil:
        i0 = 0
        while i0 < n:
            nb = min(blk, n - i0)
            for b in range(nb):
                x[b] = cos(th[i0 + b])
                s[b] = sin(th[i0 + b])
                logs[b] = log(s[b]) if s[b] > 0.0 else 0.0
            for m in range(mtop + 1):
                for b in range(nb):
                    p_prev[b] = 0.0
                    p[b] = 1.0
                    scale[b] = log_c[m]
                if ell > m:
                    for b in range(nb):
                        p_prev[b] = 1.0
                        p[b] = sqrt(2.0 * m + 3.0) * x[b]
                    for l in range(m + 2, ell + 1):
                        a_l = rec_a[m, l]
                        b_l = rec_b[m, l]
                        # independent chains across the block keep the pipeline busy
                        for b in range(nb):
                            p_new = a_l * x[b] * p[b] - b_l * p_prev[b]
                            p_prev[b] = p[b]
                            p[b] = p_new
                        if (l & 7) == 0 or l == ell:
                            for b in range(nb):
                                if fabs(p[b]) > RESCALE:
                                    p[b] = p[b] / RESCALE
                                    p_prev[b] = p_prev[b] / RESCALE
                                    scale[b] = scale[b] + LOG_RESCALE
                for b in range(nb):
                    if m == 0:
                        P[0, b] = p[b] * exp(scale[b])
                    elif s[b] > 0.0:
                        P[m, b] = p[b] * exp(scale[b] + m * logs[b])
                        Q[m, b] = p[b] * exp(scale[b] + (m - 1) * logs[b])
                    else:
                        P[m, b] = 0.0
                        Q[m, b] = p[b] * exp(scale[b]) if m == 1 else 0.0
            for b in range(nb):
                P[mtop + 1, b] = 0.0
            for m in range(mmax + 1):
                if ccos[m] == 0.0 and csin[m] == 0.0:
                    continue
                if m == 0:
                    for b in range(nb):
                        u[i0 + b] += ccos[0] * P[0, b]
                        gth[i0 + b] -= ccos[0] * c0 * P[1, b]
                    continue
                c_up = sqrt((ell + m) * (ell - m + 1.0))
                c_dn = sqrt((ell + m + 1.0) * (ell - m))
                for b in range(nb):
                    dP = 0.5 * (c_up * P[m - 1, b] - c_dn * P[m + 1, b])
                    cm = sq2 * cos(m * ph[i0 + b])
                    sm = sq2 * sin(m * ph[i0 + b])
                    ang = ccos[m] * cm + csin[m] * sm
                    u[i0 + b] += P[m, b] * ang
                    gth[i0 + b] += dP * ang
                    gph[i0 + b] += Q[m, b] * m * (csin[m] * cm - ccos[m] * sm)
            i0 += blk
    return u_arr, gth_arr, gph_arr


cdef inline double _cdelta(double a, double b) nogil:
    cdef double d = fmod(fabs(a - b), TWO_PI)
    return d if d < TWO_PI - d else TWO_PI - d


def greedy_pack(cands, int kind, double min_sep):
    cdef const double[:, ::1] c = np.ascontiguousarray(cands, dtype=np.float64)
    cdef Py_ssize_t n = c.shape[0]
    out_arr = np.empty(n, dtype=np.intp)
    cdef Py_ssize_t[::1] out = out_arr
    cdef Py_ssize_t nacc = 0, i, j, k
    cdef double d, d0, cx, cy, cz, dot
    # chordal pre-test: dot below this is certainly farther than min_sep
    cdef double far_dot = cos(min_sep) - 1e-9
    cdef bint ok
    with nogil:
        for i in range(n):
            ok = True
            # candidates arrive in spatial order, so recent acceptances conflict first;
            # the accepted set does not depend on the scan order
            for j in range(nacc - 1, -1, -1):
                k = out[j]
                if kind == 0:
                    d = _cdelta(c[i, 0], c[k, 0])
                elif kind == 1:
                    d0 = _cdelta(c[i, 0], c[k, 0])
                    if d0 > min_sep:
                        continue
                    d = hypot(d0, _cdelta(c[i, 1], c[k, 1]))
                else:
                    if c[k, 0] * c[i, 0] + c[k, 1] * c[i, 1] + c[k, 2] * c[i, 2] < far_dot:
                        continue
                    cx = c[k, 1] * c[i, 2] - c[k, 2] * c[i, 1]
                    cy = c[k, 2] * c[i, 0] - c[k, 0] * c[i, 2]
                    cz = c[k, 0] * c[i, 1] - c[k, 1] * c[i, 0]
                    dot = c[k, 0] * c[i, 0] + c[k, 1] * c[i, 1] + c[k, 2] * c[i, 2]
                    d = atan2(sqrt(cx * cx + cy * cy + cz * cz), dot)
                if d <= min_sep:
                    ok = False
                    break
            if ok:
                out[nacc] = i
                nacc += 1
    return out_arr[:nacc].copy()
