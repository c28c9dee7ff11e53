# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled stencil kernels; same contract as ``_kernels_py``."""
import numpy as np

cimport cython


def _strides(shape):
    cdef Py_ssize_t nd = len(shape)
    st = np.ones(nd, dtype=np.intp)
    for i in range(nd - 2, -1, -1):
        st[i] = st[i + 1] * shape[i + 1]
    return st


def gradient_pair(u, pk, pj, coef, shape, h, Py_ssize_t n1):
    cdef const double[::1] uu = np.ascontiguousarray(u, dtype=np.float64).reshape(-1)
    cdef const double[:, ::1] cc = np.ascontiguousarray(coef, dtype=np.float64)
    cdef const Py_ssize_t[::1] kk = np.ascontiguousarray(pk, dtype=np.intp)
    cdef const Py_ssize_t[::1] jj = np.ascontiguousarray(pj, dtype=np.intp)
    cdef const Py_ssize_t[::1] dims = np.ascontiguousarray(shape, dtype=np.intp)
    cdef const Py_ssize_t[::1] st = _strides(tuple(shape))
    cdef const double[::1] hh = np.ascontiguousarray(h, dtype=np.float64)
    cdef Py_ssize_t nn = uu.shape[0]
    out_arr = np.zeros((2, n1, nn))
    cdef double[:, :, ::1] out = out_arr
    cdef Py_ssize_t p, x, k, j, s, nj, idx, base, r, blk
    cdef double ih, c, ux, up, um
    with nogil:
        for p in range(kk.shape[0]):
            k = kk[p]
            j = jj[p]
            s = st[j]
            nj = dims[j]
            ih = 1.0 / hh[j]
            for blk in range(nn // (s * nj)):
                base = blk * s * nj
                for idx in range(nj):
                    for r in range(s):
                        x = base + idx * s + r
                        c = cc[p, x]
                        if c == 0.0:
                            continue
                        ux = uu[x]
                        up = uu[x + s] if idx < nj - 1 else 0.0
                        um = uu[x - s] if idx > 0 else 0.0
                        out[0, k, x] += c * (up - ux) * ih
                        out[1, k, x] += c * (ux - um) * ih
    return out_arr


def gradient_pair_T(v, pk, pj, coef, shape, h):
    cdef const double[:, :, ::1] vv = np.ascontiguousarray(
        np.asarray(v, dtype=np.float64).reshape(2, -1, int(np.prod(shape))))
    cdef const double[:, ::1] cc = np.ascontiguousarray(coef, dtype=np.float64)
    cdef const Py_ssize_t[::1] kk = np.ascontiguousarray(pk, dtype=np.intp)
    cdef const Py_ssize_t[::1] jj = np.ascontiguousarray(pj, dtype=np.intp)
    cdef const Py_ssize_t[::1] dims = np.ascontiguousarray(shape, dtype=np.intp)
    cdef const Py_ssize_t[::1] st = _strides(tuple(shape))
    cdef const double[::1] hh = np.ascontiguousarray(h, dtype=np.float64)
    cdef Py_ssize_t nn = vv.shape[2]
    out_arr = np.zeros(nn)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t p, x, k, j, s, nj, idx, base, r, blk
    cdef double ih, acc
    with nogil:
        for p in range(kk.shape[0]):
            k = kk[p]
            j = jj[p]
            s = st[j]
            nj = dims[j]
            ih = 1.0 / hh[j]
            for blk in range(nn // (s * nj)):
                base = blk * s * nj
                for idx in range(nj):
                    for r in range(s):
                        x = base + idx * s + r
                        acc = cc[p, x] * (vv[1, k, x] - vv[0, k, x])
                        if idx > 0:
                            acc += cc[p, x - s] * vv[0, k, x - s]
                        if idx < nj - 1:
                            acc -= cc[p, x + s] * vv[1, k, x + s]
                        out[x] += acc * ih
    return out_arr
