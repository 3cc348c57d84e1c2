# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: direct Green-kernel quadrature and off-grid
trigonometric evaluation. Signatures mirror ``_kernels_py``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, fabs, cos, sin

from ._quadrature_weights import gregory_endpoint_weights

cnp.import_array()


def green_quadrature(x, f, double dx, int derivative):
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef const double[::1] fv = np.ascontiguousarray(f, dtype=np.float64)
    cdef const double[::1] w = gregory_endpoint_weights()
    cdef Py_ssize_t n = xv.shape[0]
    cdef Py_ssize_t nw = w.shape[0]
    cdef Py_ssize_t i, j
    cdef double xi, h, right, left, sign_left
    out = np.empty(n)
    cdef double[::1] ov = out
    sign_left = -1.0 if derivative else 1.0
    with nogil:
        for i in range(n):
            xi = xv[i]
            right = 0.0
            left = 0.0
            for j in range(i, n):
                h = 0.5 * exp(-(xv[j] - xi)) * fv[j]
                right += h
                if j - i < nw:
                    right += w[j - i] * h
            for j in range(i, -1, -1):
                h = 0.5 * exp(-(xi - xv[j])) * fv[j]
                left += h
                if i - j < nw:
                    left += w[i - j] * h
            h = 0.5 * fv[i]
            ov[i] = dx * ((right - 0.5 * h) + sign_left * (left - 0.5 * h))
    return out


def trig_eval(coeffs, points, double xi1, double shift):
    c = np.atleast_2d(np.asarray(coeffs, dtype=np.complex128))
    cdef const double[:, ::1] cr = np.ascontiguousarray(c.real)
    cdef const double[:, ::1] ci = np.ascontiguousarray(c.imag)
    cdef const double[::1] pv = np.ascontiguousarray(points, dtype=np.float64)
    cdef Py_ssize_t nf = cr.shape[0]
    cdef Py_ssize_t nh = cr.shape[1]
    cdef Py_ssize_t npts = pv.shape[0]
    cdef Py_ssize_t n = 2 * (nh - 1)
    cdef Py_ssize_t a, p, k
    cdef double zr, zi, wr, wi, tmp, acc, theta, wt
    out = np.empty((nf, npts))
    cdef double[:, ::1] ov = out
    with nogil:
        for p in range(npts):
            theta = xi1 * (pv[p] + shift)
            zr = cos(theta)
            zi = sin(theta)
            for a in range(nf):
                wr = 1.0
                wi = 0.0
                acc = cr[a, 0]
                for k in range(1, nh):
                    tmp = wr * zr - wi * zi
                    wi = wr * zi + wi * zr
                    wr = tmp
                    wt = 1.0 if k == nh - 1 else 2.0
                    acc += wt * (cr[a, k] * wr - ci[a, k] * wi)
                ov[a, p] = acc / n
    return out
