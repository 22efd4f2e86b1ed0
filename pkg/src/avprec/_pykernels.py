"""Numpy implementations of the grid kernels.

Used when the compiled ``_ckernels`` extension is unavailable, and as the
reference the compiled kernels are tested against. Vectors are flat float64
arrays in lexicographic order (x index fastest); Dirichlet boundary values
are zero and never stored.
"""

import numpy as np


def apply_stencil(v, n1d, dim, inv_h2, shift):
    """Return ``(L - shift*I) v`` for the 3-point (1D) or 5-point (2D) Laplacian."""
    if dim == 1:
        out = 2.0 * v
        out[1:] -= v[:-1]
        out[:-1] -= v[1:]
    else:
        u = v.reshape(n1d, n1d)
        o = 4.0 * u
        o[1:, :] -= u[:-1, :]
        o[:-1, :] -= u[1:, :]
        o[:, 1:] -= u[:, :-1]
        o[:, :-1] -= u[:, 1:]
        out = o.reshape(-1)
    out *= inv_h2
    if shift != 0.0:
        out -= shift * v
    return out


def _restrict_axis(u, axis):
    u = np.moveaxis(u, axis, 0)
    c = 0.25 * (u[0:-2:2] + 2.0 * u[1:-1:2] + u[2::2])
    return np.moveaxis(c, 0, axis)


def _prolong_axis(c, axis):
    c = np.moveaxis(c, axis, 0)
    nc = c.shape[0]
    f = np.zeros((2 * nc + 1,) + c.shape[1:])
    f[1::2] = c
    f[0:-1:2] += 0.5 * c
    f[2::2] += 0.5 * c
    return np.moveaxis(f, 0, axis)


def restrict(v, n1d_fine, dim):
    """Full weighting from a grid with ``n1d_fine`` interior points per axis."""
    if dim == 1:
        return _restrict_axis(v, 0)
    u = v.reshape(n1d_fine, n1d_fine)
    return np.ascontiguousarray(_restrict_axis(_restrict_axis(u, 0), 1)).reshape(-1)


def prolong(v, n1d_coarse, dim):
    """(Bi)linear interpolation from a grid with ``n1d_coarse`` points per axis."""
    if dim == 1:
        return _prolong_axis(v, 0)
    c = v.reshape(n1d_coarse, n1d_coarse)
    return np.ascontiguousarray(_prolong_axis(_prolong_axis(c, 0), 1)).reshape(-1)

