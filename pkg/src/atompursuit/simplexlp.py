"""Dense two-phase primal simplex for small standard-form linear programs.

Solves min c^T x subject to A x = b, x >= 0 with a full dense tableau and
Bland's entering/leaving rule throughout, so degenerate problems cannot cycle.
Sized for tens of rows and a few hundred columns; the pivot loop itself runs in
the compiled kernel when available.
"""

import numpy as np

from ._kernels import simplex_pivot_loop

PIVOT_TOL = 1e-9

_OPTIMAL, _UNBOUNDED, _MAXITER = 0, 1, 2


class InfeasibleError(ValueError):
    """The constraints A x = b, x >= 0 admit no solution."""


class UnboundedError(ValueError):
    """The objective is unbounded below on the feasible set."""


def solve_standard_form(c, A, b, tol=PIVOT_TOL, max_pivots=20000):
    """Minimize c^T x over {A x = b, x >= 0}.

    Returns (x, value). Raises InfeasibleError / UnboundedError accordingly,
    RuntimeError if the pivot cap is hit (should not happen under Bland's rule
    with a sane cap).
    """
    c = np.ascontiguousarray(c, dtype=np.float64)
    A = np.ascontiguousarray(A, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    if A.ndim != 2:
        raise ValueError("A must be a matrix, got ndim=%d" % A.ndim)
    m, n = A.shape
    if c.shape != (n,) or b.shape != (m,):
        raise ValueError("inconsistent LP shapes: A %s, b %s, c %s" % (A.shape, b.shape, c.shape))
    if not (np.isfinite(A).all() and np.isfinite(b).all() and np.isfinite(c).all()):
        raise ValueError("LP data must be finite")

    A = A.copy()
    b = b.copy()
    flip = b < 0.0
    A[flip] *= -1.0
    b[flip] *= -1.0

    # phase 1: artificial basis, minimize the sum of artificials
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n : n + m] = np.eye(m)
    T[:m, -1] = b
    # reduced costs z_j - c_j with c_B = 1 on artificials: column sums of A
    T[m, :n] = A.sum(axis=0)
    T[m, -1] = b.sum()
    basis = np.arange(n, n + m, dtype=np.int64)

    status = simplex_pivot_loop(T, basis, tol, max_pivots)
    if status == _MAXITER:
        raise RuntimeError("simplex pivot cap reached in phase 1")
    if T[m, -1] > 1e-8 * (1.0 + abs(b).sum()):
        raise InfeasibleError("constraints are infeasible (phase-1 objective %.3e)" % T[m, -1])

    # drive leftover artificial variables out of the basis (degenerate rows)
    keep = np.ones(m, dtype=bool)
    for i in range(m):
        if basis[i] < n:
            continue
        pivot_col = -1
        for j in range(n):
            if abs(T[i, j]) > tol:
                pivot_col = j
                break
        if pivot_col < 0:
            keep[i] = False  # redundant constraint row
            continue
        T[i, :] /= T[i, pivot_col]
        factors = T[:, pivot_col].copy()
        factors[i] = 0.0
        T -= np.outer(factors, T[i, :])
        T[:, pivot_col] = 0.0
        T[i, pivot_col] = 1.0
        basis[i] = pivot_col

    rows = np.nonzero(keep)[0]
    basis = basis[rows].copy()
    m2 = rows.size

    # phase 2 tableau: real columns only, objective row rebuilt from c
    T2 = np.empty((m2 + 1, n + 1))
    T2[:m2, :n] = T[rows][:, :n]
    T2[:m2, -1] = T[rows][:, -1]
    cb = c[basis]
    T2[m2, :n] = cb @ T2[:m2, :n] - c
    T2[m2, -1] = cb @ T2[:m2, -1]
    T2 = np.ascontiguousarray(T2)

    status = simplex_pivot_loop(T2, basis, tol, max_pivots)
    if status == _MAXITER:
        raise RuntimeError("simplex pivot cap reached in phase 2")
    if status == _UNBOUNDED:
        raise UnboundedError("objective is unbounded below")

    x = np.zeros(n)
    x[basis] = T2[:m2, -1]
    return x, float(c @ x)
