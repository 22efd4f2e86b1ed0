# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled grid kernels: stencil apply, full weighting, (bi)linear interpolation.

Same signatures and semantics as ``_pykernels``; single pass over the grid,
no temporaries.
"""

import numpy as np


def apply_stencil(double[::1] v, Py_ssize_t n1d, int dim, double inv_h2, double shift):
    cdef Py_ssize_t n = v.shape[0]
    out_arr = np.empty(n)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i, j, k
    cdef double s, diag
    if dim == 1:
        diag = 2.0 * inv_h2 - shift
        for i in range(n):
            s = diag * v[i]
            if i > 0:
                s -= inv_h2 * v[i - 1]
            if i < n - 1:
                s -= inv_h2 * v[i + 1]
            out[i] = s
        return out_arr
    diag = 4.0 * inv_h2 - shift
    for j in range(n1d):
        for i in range(n1d):
            k = j * n1d + i
            s = 0.0
            if i > 0:
                s += v[k - 1]
            if i < n1d - 1:
                s += v[k + 1]
            if j > 0:
                s += v[k - n1d]
            if j < n1d - 1:
                s += v[k + n1d]
            out[k] = diag * v[k] - inv_h2 * s
    return out_arr


def restrict(double[::1] v, Py_ssize_t n1d_fine, int dim):
    cdef Py_ssize_t nc = (n1d_fine + 1) // 2 - 1
    cdef Py_ssize_t i, j, fi, fj, nf = n1d_fine
    cdef double a, b, c
    if dim == 1:
        return _restrict1(v, nc, np.empty(nc))
    out_arr = np.empty(nc * nc)
    cdef double[::1] out = out_arr
    for j in range(nc):
        fj = 2 * j + 1
        for i in range(nc):
            fi = 2 * i + 1
            a = v[(fj - 1) * nf + fi - 1] + 2.0 * v[(fj - 1) * nf + fi] + v[(fj - 1) * nf + fi + 1]
            b = v[fj * nf + fi - 1] + 2.0 * v[fj * nf + fi] + v[fj * nf + fi + 1]
            c = v[(fj + 1) * nf + fi - 1] + 2.0 * v[(fj + 1) * nf + fi] + v[(fj + 1) * nf + fi + 1]
            out[j * nc + i] = 0.0625 * (a + 2.0 * b + c)
    return out_arr


cdef _restrict1(double[::1] v, Py_ssize_t nc, out_arr):
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i
    for i in range(nc):
        out[i] = 0.25 * (v[2 * i] + 2.0 * v[2 * i + 1] + v[2 * i + 2])
    return out_arr


def prolong(double[::1] v, Py_ssize_t n1d_coarse, int dim):
    cdef Py_ssize_t nc = n1d_coarse
    cdef Py_ssize_t nf = 2 * nc + 1
    cdef Py_ssize_t i, j, ci, cj
    cdef double x
    if dim == 1:
        return _prolong1(v, nc, np.zeros(nf))
    out_arr = np.zeros(nf * nf)
    cdef double[::1] out = out_arr
    # scatter each coarse value to its 3x3 fine neighbourhood
    for cj in range(nc):
        j = 2 * cj + 1
        for ci in range(nc):
            i = 2 * ci + 1
            x = v[cj * nc + ci]
            out[j * nf + i] += x
            out[j * nf + i - 1] += 0.5 * x
            out[j * nf + i + 1] += 0.5 * x
            out[(j - 1) * nf + i] += 0.5 * x
            out[(j + 1) * nf + i] += 0.5 * x
            out[(j - 1) * nf + i - 1] += 0.25 * x
            out[(j - 1) * nf + i + 1] += 0.25 * x
            out[(j + 1) * nf + i - 1] += 0.25 * x
            out[(j + 1) * nf + i + 1] += 0.25 * x
    return out_arr


cdef _prolong1(double[::1] v, Py_ssize_t nc, out_arr):
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i
    for i in range(nc):
        out[2 * i + 1] += v[i]
        out[2 * i] += 0.5 * v[i]
        out[2 * i + 2] += 0.5 * v[i]
    return out_arr
