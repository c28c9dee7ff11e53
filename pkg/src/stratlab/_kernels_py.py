"""Pure numpy stencil kernels (fallback for the compiled ``_kernels`` module).

Fields are flat C-ordered arrays over the grid nodes. The horizontal operator
X_k is discretised as two one-sided families (0 = forward, 1 = backward),

    X_k^+ u(x) = sum_j c_kj(x) (u(x + h_j e_j) - u(x)) / h_j
    X_k^- u(x) = sum_j c_kj(x) (u(x) - u(x - h_j e_j)) / h_j

with u extended by zero outside the grid. Each active (k, j) pair carries a
nodal coefficient row ``coef[p]``.
"""
import numpy as np


def _axis_slices(ndim, axis):
    hi = [slice(None)] * ndim
    lo = [slice(None)] * ndim
    hi[axis] = slice(1, None)
    lo[axis] = slice(None, -1)
    return tuple(hi), tuple(lo)


def gradient_pair(u, pk, pj, coef, shape, h, n1):
    shape = tuple(int(s) for s in shape)
    ndim = len(shape)
    u = np.asarray(u, dtype=float).reshape(shape)
    out = np.zeros((2, n1) + shape)
    for p in range(len(pk)):
        k, j = int(pk[p]), int(pj[p])
        c = coef[p].reshape(shape) / h[j]
        hi, lo = _axis_slices(ndim, j)
        fwd = -u.copy()
        fwd[lo] += u[hi]
        bwd = u.copy()
        bwd[hi] -= u[lo]
        out[0, k] += c * fwd
        out[1, k] += c * bwd
    return out.reshape(2, n1, -1)


def gradient_pair_T(v, pk, pj, coef, shape, h):
    """Sum over families and k of (X_k^fam)^T v[fam, k]."""
    shape = tuple(int(s) for s in shape)
    ndim = len(shape)
    v = np.asarray(v, dtype=float).reshape((2, -1) + shape)
    out = np.zeros(shape)
    for p in range(len(pk)):
        k, j = int(pk[p]), int(pj[p])
        c = coef[p].reshape(shape) / h[j]
        hi, lo = _axis_slices(ndim, j)
        a = c * v[0, k]
        out -= a
        out[hi] += a[lo]
        b = c * v[1, k]
        out += b
        out[lo] -= b[hi]
    return out.reshape(-1)
