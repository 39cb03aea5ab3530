"""Smooth convex objectives and their curvature constants.

The quadratic classes expose a position-independent Hessian, which unlocks the
exact dictionary smoothness constant (the largest a^T H a over atoms, attained
at an extreme point of the hull) and the closed-form span-restricted optimum.
A sampling estimator covers objectives without that structure.
"""

from abc import ABC, abstractmethod

import numpy as np

from .atoms import as_vector


class Objective(ABC):
    """Convex differentiable function on R^n.

    Subclasses set `dim`; those with a constant Hessian set
    `has_constant_hessian` and implement `hessian`. `optimum_value`, when
    known, enables gap-based stopping and gap columns in traces.
    """

    dim: int
    has_constant_hessian = False
    optimum_value = None

    @abstractmethod
    def value(self, x):
        raise NotImplementedError

    @abstractmethod
    def gradient(self, x):
        raise NotImplementedError

    def hessian(self, x):
        raise NotImplementedError("%s does not expose a Hessian" % type(self).__name__)


class Quadratic(Objective):
    """f(x) = 0.5 x^T Q x + q^T x + const with symmetric Q."""

    has_constant_hessian = True

    def __init__(self, matrix, linear=None, const=0.0, optimum_value=None):
        q_mat = np.asarray(matrix, dtype=np.float64)
        if q_mat.ndim != 2 or q_mat.shape[0] != q_mat.shape[1]:
            raise ValueError("matrix must be square, got shape %s" % (q_mat.shape,))
        if not np.allclose(q_mat, q_mat.T, atol=1e-12 * (1.0 + np.abs(q_mat).max())):
            raise ValueError("matrix must be symmetric")
        self.dim = q_mat.shape[0]
        self._q_mat = 0.5 * (q_mat + q_mat.T)
        self._linear = (
            np.zeros(self.dim) if linear is None else as_vector(linear, self.dim, "linear")
        )
        self._const = float(const)
        self.optimum_value = optimum_value

    def value(self, x):
        x = as_vector(x, self.dim)
        return float(0.5 * x @ (self._q_mat @ x) + self._linear @ x + self._const)

    def gradient(self, x):
        x = as_vector(x, self.dim)
        return self._q_mat @ x + self._linear

    def hessian(self, x=None):
        return self._q_mat


class LeastSquares(Objective):
    """f(x) = 0.5 ||M x - b||^2."""

    has_constant_hessian = True

    def __init__(self, design, target, optimum_value=None):
        m_mat = np.asarray(design, dtype=np.float64)
        if m_mat.ndim != 2:
            raise ValueError("design must be a matrix, got shape %s" % (m_mat.shape,))
        b = as_vector(target, m_mat.shape[0], "target")
        self.design = m_mat
        self.target = b
        self.dim = m_mat.shape[1]
        self._gram = None
        self.optimum_value = optimum_value

    def value(self, x):
        r = self.design @ as_vector(x, self.dim) - self.target
        return float(0.5 * r @ r)

    def gradient(self, x):
        return self.design.T @ (self.design @ as_vector(x, self.dim) - self.target)

    def hessian(self, x=None):
        if self._gram is None:
            self._gram = self.design.T @ self.design
        return self._gram


class SquaredDistance(Objective):
    """f(x) = 0.5 ||x - b||^2; gradient x - b, Hessian I."""

    has_constant_hessian = True

    def __init__(self, target, optimum_value=None):
        self.target = as_vector(target, name="target")
        self.dim = self.target.shape[0]
        self.optimum_value = optimum_value

    def value(self, x):
        r = as_vector(x, self.dim) - self.target
        return float(0.5 * r @ r)

    def gradient(self, x):
        return as_vector(x, self.dim) - self.target

    def hessian(self, x=None):
        return np.eye(self.dim)


class AffineReparametrized(Objective):
    """The base objective precomposed with x -> M x."""

    def __init__(self, base, matrix):
        m_mat = np.asarray(matrix, dtype=np.float64)
        if m_mat.ndim != 2 or m_mat.shape[0] != base.dim:
            raise ValueError(
                "matrix shape %s does not map into the base domain of dim %d"
                % (m_mat.shape, base.dim)
            )
        self.base = base
        self.matrix = m_mat
        self.dim = m_mat.shape[1]
        self.has_constant_hessian = base.has_constant_hessian
        self.optimum_value = base.optimum_value

    def value(self, x):
        return self.base.value(self.matrix @ as_vector(x, self.dim))

    def gradient(self, x):
        return self.matrix.T @ self.base.gradient(self.matrix @ as_vector(x, self.dim))

    def hessian(self, x=None):
        inner = self.matrix @ as_vector(x, self.dim) if x is not None else None
        return self.matrix.T @ self.base.hessian(inner) @ self.matrix


def bregman_gap(f, y, x):
    """D(y, x) = f(y) - f(x) - <grad f(x), y - x>; nonnegative for convex f."""
    y = as_vector(y, f.dim, "y")
    x = as_vector(x, f.dim, "x")
    return float(f.value(y) - f.value(x) - f.gradient(x) @ (y - x))


def check_gradient(f, x, h=1e-6):
    """Max scale-guarded relative error of the gradient against central differences."""
    x = as_vector(x, f.dim)
    g = f.gradient(x)
    worst = 0.0
    for i in range(f.dim):
        step = np.zeros(f.dim)
        step[i] = h
        fd = (f.value(x + step) - f.value(x - step)) / (2.0 * h)
        err = abs(fd - g[i]) / max(1.0, abs(g[i]))
        worst = max(worst, err)
    return worst


def compute_L_atomic(f, atoms):
    """Exact dictionary smoothness constant for constant-Hessian objectives.

    sup over unit-atomic-norm directions of the quadratic curvature is attained
    at an atom, so this is max_i a_i^T H a_i.
    """
    if not f.has_constant_hessian:
        raise TypeError(
            "compute_L_atomic needs a position-independent Hessian; "
            "use estimate_L_atomic_generic"
        )
    if atoms.dim != f.dim:
        raise ValueError("atoms of dim %d do not match objective dim %d" % (atoms.dim, f.dim))
    h_mat = f.hessian(np.zeros(f.dim))
    vals = ((atoms.atoms @ h_mat) * atoms.atoms).sum(axis=1)
    return float(vals.max())


def estimate_L_atomic_generic(f, atoms, n_samples, rng):
    """Sampled lower estimate of the dictionary smoothness constant.

    Evaluates 2/gamma^2 * D(x + gamma z, x) at every atom (from the origin)
    and at n_samples random (x, z, gamma) with z a random signed convex
    combination of atoms, so the atomic norm of z is at most 1. Monotone
    nondecreasing in n_samples for a fixed rng stream.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1, got %d" % n_samples)
    if atoms.dim != f.dim:
        raise ValueError("atoms of dim %d do not match objective dim %d" % (atoms.dim, f.dim))
    origin = np.zeros(f.dim)
    best = 0.0
    for z in atoms.atoms:
        for gamma in (1e-2, 1.0):
            best = max(best, 2.0 / gamma**2 * bregman_gap(f, origin + gamma * z, origin))
    u = atoms.span_basis
    m = atoms.n_atoms
    for _ in range(n_samples):
        theta = rng.dirichlet(np.ones(m))
        signs = rng.choice((-1.0, 1.0), size=m)
        z = (theta * signs) @ atoms.atoms
        x = u @ rng.standard_normal(atoms.span_dim)
        gamma = 10.0 ** rng.uniform(-3.0, 0.0)
        best = max(best, 2.0 / gamma**2 * bregman_gap(f, x + gamma * z, x))
    return float(best)


def compute_mu_atomic_lower(f, atoms):
    """Certified lower bound on the atomic-norm strong convexity constant.

    Combines the span-restricted minimal Hessian eigenvalue with a certified
    lower bound on the minimal directional width of the dictionary; the product
    mdw^2 * mu lower-bounds the strong convexity modulus in the atomic norm.
    Returns 0 when the objective is not strongly convex on the span.
    """
    from .analysis import mdw_spectral_lower_bound

    if not f.has_constant_hessian:
        raise TypeError("compute_mu_atomic_lower needs a position-independent Hessian")
    if atoms.dim != f.dim:
        raise ValueError("atoms of dim %d do not match objective dim %d" % (atoms.dim, f.dim))
    u = atoms.span_basis
    h_red = u.T @ f.hessian(np.zeros(f.dim)) @ u
    mu = float(np.linalg.eigvalsh(0.5 * (h_red + h_red.T)).min())
    if mu <= 0.0:
        return 0.0
    width = mdw_spectral_lower_bound(atoms)
    return width**2 * mu


def quadratic_optimum(f, atoms):
    """Span-restricted minimizer and value for a constant-Hessian objective."""
    if not f.has_constant_hessian:
        raise TypeError("quadratic_optimum needs a position-independent Hessian")
    u = atoms.span_basis
    origin = np.zeros(f.dim)
    h_red = u.T @ f.hessian(origin) @ u
    rhs = -(u.T @ f.gradient(origin))
    y, *_ = np.linalg.lstsq(h_red, rhs, rcond=None)
    x_star = u @ y
    return x_star, f.value(x_star)


def save_least_squares(problem, design_path, target_path):
    """Write a least-squares problem: design matrix CSV plus a one-row target CSV."""
    np.savetxt(design_path, problem.design, delimiter=",")
    with open(target_path, "w") as fh:
        fh.write(",".join(repr(v) for v in problem.target.tolist()) + "\n")


def load_least_squares(design_path, target_path):
    """Read the pair written by save_least_squares, validating shapes."""
    design = np.loadtxt(design_path, delimiter=",", ndmin=2)
    with open(target_path) as fh:
        line = fh.readline().strip()
    if not line:
        raise ValueError("%s: empty target file" % target_path)
    try:
        target = np.array([float(p) for p in line.split(",")])
    except ValueError:
        raise ValueError("%s: non-numeric target value" % target_path) from None
    if target.shape[0] != design.shape[0]:
        raise ValueError(
            "target has %d entries but the design has %d rows" % (target.shape[0], design.shape[0])
        )
    return LeastSquares(design, target)
