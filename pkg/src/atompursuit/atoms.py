"""Finite atom dictionaries and their oracles.

An AtomSet is a finite collection of nonzero direction vectors. Symmetric sets
(closed under negation up to SYMMETRY_TOL) induce the atomic norm, the gauge of
the convex hull, computed here by a small linear program. The linear
minimization oracle (exact, subsampled, or sampled from a distribution) is the
single primitive every solver in this package consumes.
"""

import math
import re
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ._kernels import scan_min, scan_min_subset
from .simplexlp import solve_standard_form

SYMMETRY_TOL = 1e-12  # negation pairing and deduplication
RANK_REL_TOL = 1e-10  # singular value cutoff for span rank
SPAN_TOL = 1e-8  # relative residual for span membership

_DEFAULT_SUBSAMPLE_SEED = 1234


class SpanMembershipError(ValueError):
    """The vector lies outside the linear span of the dictionary."""


def as_vector(x, dim=None, name="vector"):
    """Validate and convert to a finite 1-D float64 array."""
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError("%s must be 1-D, got shape %s" % (name, v.shape))
    if dim is not None and v.shape[0] != dim:
        raise ValueError("%s has dim %d, expected %d" % (name, v.shape[0], dim))
    if not np.isfinite(v).all():
        raise ValueError("%s has non-finite entries" % name)
    return np.ascontiguousarray(v)


def _pair_tol(atom):
    return SYMMETRY_TOL * (1.0 + np.abs(atom).max())


class AtomSet:
    """Immutable dictionary of m nonzero atoms in R^n.

    Stores atoms as rows of an (m, n) read-only array. The span basis and rank
    are computed on construction; negation pairing is detected and cached, and
    `symmetric` is true exactly when every atom has a negation in the set.
    """

    def __init__(self, atoms):
        arr = np.array(atoms, dtype=np.float64, order="C")
        if arr.ndim != 2:
            raise ValueError("atoms must form a 2-D array, got shape %s" % (arr.shape,))
        m, n = arr.shape
        if m < 1 or n < 1:
            raise ValueError("need at least one atom of dim >= 1, got shape %s" % (arr.shape,))
        if not np.isfinite(arr).all():
            raise ValueError("atoms must be finite")
        for i in range(m):
            if not arr[i].any():
                raise ValueError("atom %d is zero" % i)
        arr.setflags(write=False)
        self._atoms = arr

        u, s, _ = np.linalg.svd(arr.T, full_matrices=False)
        rank = int(np.count_nonzero(s > RANK_REL_TOL * s[0]))
        basis = np.ascontiguousarray(u[:, :rank])
        basis.setflags(write=False)
        self._span_basis = basis
        self._singular_values = s

        pair = np.full(m, -1, dtype=np.int64)
        for i in range(m):
            if pair[i] >= 0:
                continue
            diff = np.abs(arr + arr[i]).max(axis=1)
            hits = np.nonzero(diff <= _pair_tol(arr[i]))[0]
            if hits.size and pair[hits[0]] < 0:
                j = int(hits[0])
                pair[i] = j
                pair[j] = i
        self._pair_index = pair
        self.symmetric = bool((pair >= 0).all())

    @classmethod
    def symmetrize(cls, vectors):
        """Build a symmetric set: deduplicate the inputs, append missing negations."""
        arr = np.array(vectors, dtype=np.float64, order="C")
        if arr.ndim != 2:
            raise ValueError("vectors must form a 2-D array, got shape %s" % (arr.shape,))
        kept = []
        for v in arr:
            tol = _pair_tol(v)
            if any(np.abs(v - u).max() <= tol for u in kept):
                continue
            kept.append(v)
        out = list(kept)
        for v in kept:
            tol = _pair_tol(v)
            if not any(np.abs(v + u).max() <= tol for u in out):
                out.append(-v)
        return cls(np.array(out))

    @classmethod
    def coordinates(cls, n):
        """The 2n signed coordinate directions {+-e_i} in R^n."""
        eye = np.eye(n)
        return cls(np.vstack([eye, -eye]))

    @property
    def atoms(self):
        return self._atoms

    @property
    def n_atoms(self):
        return self._atoms.shape[0]

    @property
    def dim(self):
        return self._atoms.shape[1]

    @property
    def span_dim(self):
        return self._span_basis.shape[1]

    @property
    def span_basis(self):
        """Orthonormal (dim, span_dim) basis of the linear span."""
        return self._span_basis

    @property
    def pair_index(self):
        """pair_index[i] = index of the atom equal to -atoms[i], or -1."""
        return self._pair_index

    @cached_property
    def pair_rows(self):
        """(P, 2) array of negation pairs (i, j) with i < j; symmetric sets only."""
        if not self.symmetric:
            raise ValueError("pair_rows requires a symmetric atom set")
        rows = [(i, int(self._pair_index[i])) for i in range(self.n_atoms) if i < self._pair_index[i]]
        return np.array(rows, dtype=np.int64)

    @cached_property
    def radius_l2(self):
        """Largest Euclidean atom norm."""
        return float(np.sqrt((self._atoms**2).sum(axis=1).max()))

    @cached_property
    def diameter_l2(self):
        """Largest pairwise Euclidean distance between atoms."""
        if self.symmetric:
            return 2.0 * self.radius_l2
        best = 0.0
        for i in range(self.n_atoms):
            d = self._atoms - self._atoms[i]
            best = max(best, float(np.sqrt((d**2).sum(axis=1).max())))
        return best

    def half_space_representatives(self):
        """One atom index per negation pair: the one whose first nonzero entry is positive."""
        reps = []
        for i, j in self.pair_rows:
            lead = self._atoms[i][np.nonzero(self._atoms[i])[0][0]]
            reps.append(int(i) if lead > 0 else int(j))
        return np.array(sorted(reps), dtype=np.int64)

    def project_onto_span(self, x):
        x = as_vector(x, self.dim)
        u = self._span_basis
        return u @ (u.T @ x)

    def in_span(self, x, tol=SPAN_TOL):
        x = as_vector(x, self.dim)
        nx = float(np.linalg.norm(x))
        if nx == 0.0:
            return True
        return float(np.linalg.norm(x - self.project_onto_span(x))) <= tol * nx

    def __repr__(self):
        return "AtomSet(n_atoms=%d, dim=%d, span_dim=%d, symmetric=%s)" % (
            self.n_atoms,
            self.dim,
            self.span_dim,
            self.symmetric,
        )


@dataclass(frozen=True)
class LmoResult:
    """Outcome of an oracle call: chosen atom and its score <query, atom>."""

    atom_index: int
    atom: np.ndarray
    score: float


@dataclass(frozen=True)
class SamplingDistribution:
    """Probability weights over the atoms of a set (aligned by index).

    With half_space_dedup, at most one atom of each negation pair may carry
    positive weight; useful when +-z are statistically redundant (all second
    moment quantities are sign invariant).
    """

    weights: np.ndarray
    half_space_dedup: bool = False

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if w.ndim != 1 or w.shape[0] < 1:
            raise ValueError("weights must be a nonempty 1-D array")
        if not np.isfinite(w).all() or (w < 0.0).any():
            raise ValueError("weights must be finite and nonnegative")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ValueError("weights must sum to 1, got %.17g" % w.sum())
        w = np.ascontiguousarray(w)
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, atom_set, half_space=False):
        m = atom_set.n_atoms
        if half_space:
            reps = atom_set.half_space_representatives()
            w = np.zeros(m)
            w[reps] = 1.0 / reps.size
            return cls(w, half_space_dedup=True)
        return cls(np.full(m, 1.0 / m))

    @classmethod
    def point_mass(cls, atom_set, index):
        m = atom_set.n_atoms
        if not 0 <= index < m:
            raise ValueError("index %d out of range for %d atoms" % (index, m))
        w = np.zeros(m)
        w[index] = 1.0
        return cls(w)

    def check_dedup(self, atom_set):
        """Verify the half-space condition against a concrete atom set."""
        if not self.half_space_dedup:
            return
        for i, j in atom_set.pair_rows:
            if self.weights[i] > 0.0 and self.weights[j] > 0.0:
                raise ValueError("atoms %d and %d are a +- pair but both carry weight" % (i, j))

    @cached_property
    def cdf(self):
        return np.cumsum(self.weights)


def lmo_exact(query, atoms):
    """Atom minimizing <query, atom>; ties resolve to the lowest index."""
    q = as_vector(query, atoms.dim, name="query")
    idx, score = scan_min(atoms.atoms, q)
    return LmoResult(idx, atoms.atoms[idx], score)


def lmo_approx(query, atoms, fraction, rng=None):
    """LMO over a random subset of whole negation pairs.

    Scans ceil(fraction * m) atoms rounded up to full pairs, so the subset
    always contains a nonpositive-score atom. Returns (LmoResult,
    achieved_delta) where achieved_delta = subset score / exact score in
    [0, 1] (1.0 when the exact score is 0 or the subset covers everything).
    With rng omitted the subsample is drawn from a fixed seed, making the call
    a pure function of its arguments.
    """
    if not atoms.symmetric:
        raise ValueError("lmo_approx requires a symmetric atom set")
    if not 0.0 < fraction <= 1.0:
        raise ValueError("fraction must lie in (0, 1], got %r" % (fraction,))
    q = as_vector(query, atoms.dim, name="query")
    exact = lmo_exact(q, atoms)
    pairs = atoms.pair_rows
    n_pairs = int(math.ceil(math.ceil(fraction * atoms.n_atoms) / 2.0))
    if n_pairs >= pairs.shape[0]:
        return exact, 1.0
    if rng is None:
        rng = np.random.default_rng(_DEFAULT_SUBSAMPLE_SEED)
    sel = rng.choice(pairs.shape[0], size=n_pairs, replace=False)
    indices = np.sort(pairs[sel].ravel()).astype(np.int64)
    idx, score = scan_min_subset(atoms.atoms, q, indices)
    if exact.score >= 0.0:
        delta = 1.0
    else:
        delta = score / exact.score
    return LmoResult(idx, atoms.atoms[idx], score), float(delta)


def sample_atom(distribution, atoms, rng):
    """Draw one atom index from the distribution (inverse CDF on a single uniform).

    The returned LmoResult carries score = nan: a sampled atom has no oracle
    score, callers evaluate the inner products they need.
    """
    w = distribution.weights
    if w.shape[0] != atoms.n_atoms:
        raise ValueError(
            "distribution over %d atoms does not match set of %d" % (w.shape[0], atoms.n_atoms)
        )
    u = rng.random()
    idx = int(np.searchsorted(distribution.cdf, u, side="right"))
    idx = min(idx, atoms.n_atoms - 1)
    return LmoResult(idx, atoms.atoms[idx], float("nan"))


def atomic_norm(x, atoms):
    """Gauge of conv(A) at x: min sum(c) with sum_i c_i a_i = x, c >= 0.

    Requires a symmetric set (otherwise the gauge is not a norm) and x in the
    linear span. Solved as a dense LP over the span coordinates.
    """
    if not atoms.symmetric:
        raise ValueError("atomic_norm requires a symmetric atom set")
    x = as_vector(x, atoms.dim)
    nx = float(np.linalg.norm(x))
    if nx == 0.0:
        return 0.0
    u = atoms.span_basis
    resid = float(np.linalg.norm(x - u @ (u.T @ x)))
    if resid > SPAN_TOL * nx:
        raise SpanMembershipError(
            "vector lies outside the dictionary span (relative residual %.3e)" % (resid / nx)
        )
    a_red = np.ascontiguousarray(u.T @ atoms.atoms.T)
    x_red = u.T @ x
    _, value = solve_standard_form(np.ones(atoms.n_atoms), a_red, x_red)
    return max(value, 0.0)


def dual_atomic_norm(d, atoms):
    """max_{z in A} <z, d>; for symmetric sets this is the dual atomic norm."""
    d = as_vector(d, atoms.dim)
    _, score = scan_min(atoms.atoms, np.ascontiguousarray(-d))
    return -score


_HEADER_RE = re.compile(r"^#\s*atoms=(\d+)\s+dim=(\d+)\s+symmetric=([01])\s*$")


def save_dictionary(atoms, path):
    """Write the dictionary CSV: a counted header line, then one row per atom."""
    with open(path, "w") as fh:
        fh.write(
            "# atoms=%d dim=%d symmetric=%d\n" % (atoms.n_atoms, atoms.dim, int(atoms.symmetric))
        )
        for row in atoms.atoms:
            fh.write(",".join(repr(v) for v in row.tolist()) + "\n")


def load_dictionary(path):
    """Parse a dictionary CSV; validates the header against the body."""
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise ValueError("%s: empty dictionary file" % path)
    match = _HEADER_RE.match(lines[0])
    if match is None:
        raise ValueError(
            "%s: first line must be '# atoms=<m> dim=<n> symmetric=<0|1>', got %r"
            % (path, lines[0])
        )
    m, n, sym = int(match.group(1)), int(match.group(2)), bool(int(match.group(3)))
    body = lines[1:]
    if len(body) != m:
        raise ValueError("%s: header declares %d atoms, file has %d rows" % (path, m, len(body)))
    rows = np.empty((m, n))
    for k, line in enumerate(body):
        parts = line.split(",")
        if len(parts) != n:
            raise ValueError(
                "%s: row %d has %d values, header declares dim=%d" % (path, k + 1, len(parts), n)
            )
        try:
            rows[k] = [float(p) for p in parts]
        except ValueError:
            raise ValueError("%s: row %d contains a non-numeric value" % (path, k + 1)) from None
    out = AtomSet(rows)
    if out.symmetric != sym:
        raise ValueError(
            "%s: header says symmetric=%d but the atoms are%s closed under negation"
            % (path, int(sym), "" if out.symmetric else " not")
        )
    return out
