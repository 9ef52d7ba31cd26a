# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled scan kernels; see ``_kernels_py`` for the reference semantics."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs

cnp.import_array()

ctypedef cnp.int64_t idx_t


def translate_sup(idx_t[:, ::1] mul, idx_t[::1] inv, double[::1] w):
    cdef Py_ssize_t n = w.shape[0]
    cdef Py_ssize_t x, y
    cdef idx_t j
    cdef double best, d
    out = np.zeros(n, dtype=np.float64)
    cdef double[::1] o = out
    for x in range(n):
        best = 0.0
        for y in range(n):
            j = mul[inv[x], y]
            if j >= 0:
                d = fabs(w[y] - w[j])
                if d > best:
                    best = d
        o[x] = best
    return out


def left_constancy_witness(idx_t[:, ::1] mul, idx_t[::1] inv, double[::1] w, double tol):
    cdef Py_ssize_t n = w.shape[0]
    cdef Py_ssize_t x, y, first
    cdef idx_t j
    cdef double ref = 0.0, d
    for x in range(n):
        first = -1
        for y in range(n):
            j = mul[inv[x], y]
            if j < 0:
                continue
            d = w[y] - w[j]
            if first < 0:
                first = y
                ref = d
            elif fabs(d - ref) > tol:
                return x, first, y
    return -1, -1, -1


def right_constancy_witness(idx_t[:, ::1] mul, idx_t[::1] inv, double[::1] w, double tol):
    cdef Py_ssize_t n = w.shape[0]
    cdef Py_ssize_t x, y, first
    cdef idx_t j
    cdef double ref = 0.0, d
    for x in range(n):
        first = -1
        for y in range(n):
            j = mul[y, inv[x]]
            if j < 0:
                continue
            d = w[y] - w[j]
            if first < 0:
                first = y
                ref = d
            elif fabs(d - ref) > tol:
                return x, first, y
    return -1, -1, -1


def additivity_witness(idx_t[:, ::1] mul, double[::1] phi, double tol):
    cdef Py_ssize_t n = phi.shape[0]
    cdef Py_ssize_t x, y
    cdef idx_t k
    for x in range(n):
        for y in range(n):
            k = mul[x, y]
            if k >= 0 and fabs(phi[k] - phi[x] - phi[y]) > tol:
                return x, y
    return -1, -1


def first_order_witness(idx_t[:, ::1] mul, idx_t[::1] inv, double[::1] w, double tol):
    cdef Py_ssize_t n = w.shape[0]
    cdef Py_ssize_t x, y, z
    cdef idx_t xz, zy, xzy, yi
    for x in range(n):
        for y in range(n):
            yi = inv[y]
            for z in range(n):
                xz = mul[x, z]
                if xz < 0:
                    continue
                zy = mul[z, yi]
                if zy < 0:
                    continue
                xzy = mul[xz, yi]
                if xzy < 0:
                    continue
                if fabs((w[xzy] - w[zy]) - (w[xz] - w[z])) > tol:
                    return x, y, z
    return -1, -1, -1


def first_order_witness_sampled(idx_t[:, ::1] mul, idx_t[::1] inv, double[::1] w, double tol,
                                idx_t[:, ::1] triples):
    cdef Py_ssize_t m = triples.shape[0]
    cdef Py_ssize_t k
    cdef idx_t x, y, z, xz, zy, xzy
    for k in range(m):
        x = triples[k, 0]
        y = triples[k, 1]
        z = triples[k, 2]
        xz = mul[x, z]
        if xz < 0:
            continue
        zy = mul[z, inv[y]]
        if zy < 0:
            continue
        xzy = mul[xz, inv[y]]
        if xzy < 0:
            continue
        if fabs((w[xzy] - w[zy]) - (w[xz] - w[z])) > tol:
            return x, y, z
    return -1, -1, -1
