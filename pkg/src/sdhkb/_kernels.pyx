# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops. Must stay operation-for-operation identical to
``_kernels_py`` so both backends give bit-identical results."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def attach_draws(const double[::1] uniforms, cnp.int64_t[::1] freqs, Py_ssize_t n_active,
                 double lam, bint grow):
    cdef Py_ssize_t n = uniforms.shape[0]
    cdef Py_ssize_t cap = freqs.shape[0]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] out = np.empty(n, dtype=np.int64)
    cdef cnp.int64_t[::1] choices = out
    cdef cnp.int64_t mass = 0
    cdef Py_ssize_t i, j, chosen
    cdef double total, target, cum
    cdef bint can_grow
    for j in range(n_active):
        mass += freqs[j]
    for i in range(n):
        can_grow = grow and n_active < cap
        total = <double>mass + lam * <double>(n_active + can_grow)
        target = uniforms[i] * total
        cum = 0.0
        chosen = -1
        for j in range(n_active):
            cum += <double>freqs[j] + lam
            if target < cum:
                chosen = j
                break
        if chosen < 0:
            if can_grow:
                chosen = n_active
                n_active += 1
            else:
                chosen = n_active - 1
        freqs[chosen] += 1
        mass += 1
        choices[i] = chosen
    return out, n_active


def uncoverage_by_size(const cnp.int64_t[::1] link_ranks, const cnp.int64_t[::1] offsets,
                       const cnp.int64_t[::1] kb_sizes):
    cdef Py_ssize_t n_wf = offsets.shape[0] - 1
    cdef Py_ssize_t n_sizes = kb_sizes.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.zeros(n_sizes, dtype=np.float64)
    cdef double[::1] res = out
    cdef Py_ssize_t s, w, j, missing
    cdef cnp.int64_t size
    cdef double acc
    for s in range(n_sizes):
        size = kb_sizes[s]
        acc = 0.0
        for w in range(n_wf):
            missing = 0
            for j in range(offsets[w], offsets[w + 1]):
                if link_ranks[j] >= size:
                    missing += 1
            acc += <double>missing / <double>(offsets[w + 1] - offsets[w])
        res[s] = acc / <double>n_wf
    return out
