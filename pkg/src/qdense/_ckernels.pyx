# cython: language_level=3
# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled state-vector kernels; mirrors _pykernels function for function."""

import functools

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()

ctypedef double complex cplx


def kron_vec(const cplx[::1] a, const cplx[::1] b):
    cdef Py_ssize_t na = a.shape[0], nb = b.shape[0], i, j
    out_arr = np.empty(na * nb, dtype=np.complex128)
    cdef cplx[::1] out = out_arr
    cdef cplx av
    for i in range(na):
        av = a[i]
        for j in range(nb):
            out[i * nb + j] = av * b[j]
    return out_arr


def vdot(const cplx[::1] a, const cplx[::1] b):
    cdef Py_ssize_t i, n = a.shape[0]
    cdef cplx acc = 0
    for i in range(n):
        acc = acc + a[i].conjugate() * b[i]
    return complex(acc)


@functools.lru_cache(maxsize=512)
def _index_tables(dims, targets):
    # Flat-index arithmetic for big-endian labels: tstep[tau] is the offset
    # contributed by the targeted digits spelling tau, base[rho] enumerates
    # the untargeted digits with the targeted ones zeroed. Cached: the
    # protocol hits the same (dims, targets) shapes millions of times.
    nreg = len(dims)
    strides = np.ones(nreg, dtype=np.intp)
    for i in range(nreg - 2, -1, -1):
        strides[i] = strides[i + 1] * dims[i + 1]
    tsizes = [dims[t] for t in targets]
    grids = np.indices(tsizes).reshape(len(targets), -1)
    tstep = np.zeros(grids.shape[1], dtype=np.intp)
    for i, t in enumerate(targets):
        tstep += grids[i] * strides[t]
    rest = [i for i in range(nreg) if i not in targets]
    if rest:
        rsizes = [dims[i] for i in rest]
        rgrids = np.indices(rsizes).reshape(len(rest), -1)
        base = np.zeros(rgrids.shape[1], dtype=np.intp)
        for i, rreg in enumerate(rest):
            base += rgrids[i] * strides[rreg]
    else:
        base = np.zeros(1, dtype=np.intp)
    return tstep, base


def apply_matrix(const cplx[::1] amps, dims, const cplx[:, ::1] mat, targets):
    cdef Py_ssize_t extent = mat.shape[0]
    cdef Py_ssize_t total = amps.shape[0]

    tstep_arr, base_arr = _index_tables(tuple(dims), tuple(targets))
    cdef cnp.intp_t[::1] tstep = tstep_arr
    cdef cnp.intp_t[::1] base = base_arr
    cdef Py_ssize_t rest_count = base_arr.shape[0]

    out_arr = np.empty(total, dtype=np.complex128)
    cdef cplx[::1] out = out_arr
    buf_arr = np.empty(extent, dtype=np.complex128)
    cdef cplx[::1] buf = buf_arr

    cdef Py_ssize_t rho, tau, row, b
    cdef cplx acc
    for rho in range(rest_count):
        b = base[rho]
        for tau in range(extent):
            buf[tau] = amps[b + tstep[tau]]
        for row in range(extent):
            acc = 0
            for tau in range(extent):
                acc = acc + mat[row, tau] * buf[tau]
            out[b + tstep[row]] = acc
    return out_arr


def register_probs(const cplx[::1] amps, dims, Py_ssize_t target):
    cdef Py_ssize_t n = amps.shape[0]
    cdef Py_ssize_t dt = dims[target]
    cdef Py_ssize_t stride = 1
    cdef Py_ssize_t i
    for i in range(target + 1, len(dims)):
        stride *= dims[i]
    out_arr = np.zeros(dt, dtype=np.float64)
    cdef double[::1] probs = out_arr
    cdef cplx v
    for i in range(n):
        v = amps[i]
        probs[(i // stride) % dt] += v.real * v.real + v.imag * v.imag
    return out_arr


def collapse_register(const cplx[::1] amps, dims, Py_ssize_t target, Py_ssize_t outcome):
    cdef Py_ssize_t n = amps.shape[0]
    cdef Py_ssize_t dt = dims[target]
    cdef Py_ssize_t stride = 1
    cdef Py_ssize_t i
    for i in range(target + 1, len(dims)):
        stride *= dims[i]
    cdef double prob = 0.0
    cdef cplx v
    for i in range(n):
        if (i // stride) % dt == outcome:
            v = amps[i]
            prob += v.real * v.real + v.imag * v.imag
    out_arr = np.zeros(n, dtype=np.complex128)
    cdef cplx[::1] out = out_arr
    cdef double scale = 1.0 / sqrt(prob)
    for i in range(n):
        if (i // stride) % dt == outcome:
            out[i] = amps[i] * scale
    return float(prob), out_arr


def best_overlap(const cplx[:, ::1] basis, const cplx[::1] amps):
    cdef Py_ssize_t rows = basis.shape[0], ncols = basis.shape[1]
    cdef Py_ssize_t i, j, best = 0
    cdef double best_mag2 = -1.0, mag2
    cdef cplx acc
    for i in range(rows):
        acc = 0
        for j in range(ncols):
            acc = acc + basis[i, j].conjugate() * amps[j]
        mag2 = acc.real * acc.real + acc.imag * acc.imag
        if mag2 > best_mag2:
            best_mag2 = mag2
            best = i
    return int(best), float(sqrt(best_mag2))
