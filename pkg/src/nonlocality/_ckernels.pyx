# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops; see ``_pykernels`` for the reference semantics."""

import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, fabs

cnp.import_array()


def joint_probs(double[:, ::1] rho_re, double[::1] theta_a, double[::1] theta_b):
    cdef Py_ssize_t n = theta_a.shape[0]
    cdef Py_ssize_t k, i, j
    cdef double ca, sa, cb, sb, acc
    cdef double v[4]
    if theta_b.shape[0] != n:
        raise ValueError("angle arrays differ in length")
    if rho_re.shape[0] != 4 or rho_re.shape[1] != 4:
        raise ValueError("rho_re must be 4x4")
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    with nogil:
        for k in range(n):
            ca = cos(theta_a[k])
            sa = sin(theta_a[k])
            cb = cos(theta_b[k])
            sb = sin(theta_b[k])
            v[0] = ca * cb
            v[1] = ca * sb
            v[2] = sa * cb
            v[3] = sa * sb
            acc = 0.0
            for i in range(4):
                for j in range(4):
                    acc = acc + v[i] * rho_re[i, j] * v[j]
            o[k] = acc
    return out


def chsh_grid_max(double[:, ::1] corr):
    cdef Py_ssize_t na = corr.shape[0]
    cdef Py_ssize_t nb = corr.shape[1]
    cdef Py_ssize_t i, ip, j, jp
    cdef Py_ssize_t bi = 0, bip = 0, bj = 0, bjp = 0
    cdef double s, best = -1.0
    with nogil:
        for i in range(na):
            for ip in range(na):
                if ip == i:
                    continue
                for j in range(nb):
                    for jp in range(nb):
                        if jp == j:
                            continue
                        s = fabs(corr[i, j] - corr[i, jp]) + fabs(corr[ip, j] + corr[ip, jp])
                        if s > best:
                            best = s
                            bi = i
                            bip = ip
                            bj = j
                            bjp = jp
    return (int(bi), int(bip), int(bj), int(bjp), best)
