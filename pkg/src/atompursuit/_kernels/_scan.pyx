"""Compiled hot kernels: dictionary scans and the simplex pivot loop.

Same contracts as `_scan_py`; the pivot loop applies the same elementwise row
operations in the same order, so pivot sequences match the fallback bitwise.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY


def scan_min(const double[:, ::1] atoms, const double[::1] query):
    cdef Py_ssize_t m = atoms.shape[0]
    cdef Py_ssize_t n = atoms.shape[1]
    cdef Py_ssize_t i, j, best = 0
    cdef double s, best_s = INFINITY
    for i in range(m):
        s = 0.0
        for j in range(n):
            s += atoms[i, j] * query[j]
        if s < best_s:
            best_s = s
            best = i
    return best, best_s


def scan_min_subset(const double[:, ::1] atoms, const double[::1] query, const cnp.int64_t[::1] indices):
    cdef Py_ssize_t k = indices.shape[0]
    cdef Py_ssize_t n = atoms.shape[1]
    cdef Py_ssize_t t, j, row
    cdef Py_ssize_t best = 0
    cdef double s, best_s = INFINITY
    for t in range(k):
        row = indices[t]
        s = 0.0
        for j in range(n):
            s += atoms[row, j] * query[j]
        if s < best_s:
            best_s = s
            best = row
    return best, best_s


def simplex_pivot_loop(double[:, ::1] tableau, cnp.int64_t[::1] basis, double tol, long max_pivots):
    cdef Py_ssize_t m = tableau.shape[0] - 1
    cdef Py_ssize_t ncols = tableau.shape[1] - 1
    cdef Py_ssize_t i, k, r, j
    cdef long count
    cdef double piv, ratio, best_ratio, f
    cdef cnp.int64_t best_basis
    for count in range(max_pivots):
        j = -1
        for k in range(ncols):
            if tableau[m, k] > tol:
                j = k
                break
        if j < 0:
            return 0
        r = -1
        best_ratio = 0.0
        best_basis = 0
        for i in range(m):
            if tableau[i, j] > tol:
                ratio = tableau[i, ncols] / tableau[i, j]
                if r < 0 or ratio < best_ratio or (ratio == best_ratio and basis[i] < best_basis):
                    r = i
                    best_ratio = ratio
                    best_basis = basis[i]
        if r < 0:
            return 1
        piv = tableau[r, j]
        for k in range(ncols + 1):
            tableau[r, k] /= piv
        for i in range(m + 1):
            if i == r:
                continue
            f = tableau[i, j]
            if f != 0.0:
                for k in range(ncols + 1):
                    tableau[i, k] -= f * tableau[r, k]
        for i in range(m + 1):
            tableau[i, j] = 0.0
        tableau[r, j] = 1.0
        basis[r] = j
    return 2
