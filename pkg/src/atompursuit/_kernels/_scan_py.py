"""Numpy implementations of the hot kernels (fallback backend).

Mirrors `_scan.pyx` operation for operation. The pivot loop performs identical
elementwise row arithmetic in both backends, so simplex results are
bit-reproducible across them; the dot products in the scans may differ in the
last ulp (BLAS versus sequential summation), which can flip the argmin only on
exact near-ties.
"""

import numpy as np


def scan_min(atoms, query):
    """Row index and value of the smallest inner product with `query`.

    Ties resolve to the lowest index (np.argmin keeps the first occurrence).
    """
    scores = atoms @ query
    idx = int(np.argmin(scores))
    return idx, float(scores[idx])


def scan_min_subset(atoms, query, indices):
    """scan_min restricted to the given row indices; returns a global index."""
    scores = atoms[indices] @ query
    k = int(np.argmin(scores))
    return int(indices[k]), float(scores[k])


def simplex_pivot_loop(tableau, basis, tol, max_pivots):
    """Bland-rule pivots in place until optimality, unboundedness, or the cap.

    tableau: (m+1, n+1) array, m constraint rows then the objective row holding
    z_j - c_j entries with the current objective value in the corner; basis:
    (m,) int64 basic-variable column per row. Returns 0 optimal, 1 unbounded,
    2 pivot cap hit.
    """
    m = tableau.shape[0] - 1
    ncols = tableau.shape[1] - 1
    for _ in range(max_pivots):
        improving = np.nonzero(tableau[m, :ncols] > tol)[0]
        if improving.size == 0:
            return 0
        j = int(improving[0])  # Bland: lowest improving column
        col = tableau[:m, j]
        rows = np.nonzero(col > tol)[0]
        if rows.size == 0:
            return 1
        ratios = tableau[rows, ncols] / col[rows]
        # min ratio, exact ties broken by lowest basic-variable index
        order = np.lexsort((basis[rows], ratios))
        r = int(rows[order[0]])
        tableau[r, :] /= tableau[r, j]
        factors = tableau[:, j].copy()
        factors[r] = 0.0
        tableau -= np.outer(factors, tableau[r, :])
        tableau[:, j] = 0.0
        tableau[r, j] = 1.0
        basis[r] = j
    return 2
