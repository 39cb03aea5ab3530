"""Geometric constants of a dictionary and the rate envelopes they certify.

The sampled estimators here (minimal directional width, the directional
second-moment ratio) over-estimate true minima, so they are reported with
"sampled" provenance and never used where a guaranteed bound is required; the
spectral width bound provides the certified direction.
"""

from dataclasses import dataclass, field

import numpy as np

from .atoms import RANK_REL_TOL, AtomSet, as_vector, atomic_norm, dual_atomic_norm
from .objectives import AffineReparametrized, compute_L_atomic, quadratic_optimum
from .solvers import AtomicSmoothness, ExactOracle, L2Smoothness, SolverConfig, run_pursuit

_ENVELOPE_KINDS = ("sublinear_greedy", "sublinear_random", "linear", "accel_greedy", "accel_random")


def _is_full_coordinate_set(atoms):
    a = atoms.atoms
    if atoms.n_atoms != 2 * atoms.dim or not atoms.symmetric:
        return False
    one_hot = (np.abs(a) == 1.0).sum(axis=1) == 1
    if not (one_hot.all() and ((a == 0.0) | (np.abs(a) == 1.0)).all()):
        return False
    return bool((np.abs(a).sum(axis=0) == 2.0).all())


def _probe_directions(atoms, n_probe, rng):
    # (n_probe, span_dim) draw: larger n_probe extends the sample, so sampled
    # minima over the probes are monotone in n_probe for a fixed rng seed
    u = atoms.span_basis
    probes = rng.standard_normal((n_probe, atoms.span_dim)) @ u.T
    return np.vstack([probes, atoms.atoms, u.T])


def mdw_spectral_lower_bound(atoms):
    """Certified lower bound on the minimal directional width over the span.

    For a unit span direction d, max_i <a_i, d> is at least ||A^T d|| / sqrt(m)
    for symmetric sets, which is at least the smallest positive singular value
    of the atom matrix over sqrt(m). Exact for the full signed coordinate set
    (1/sqrt(n)) and for a single +- pair (the atom's length).
    """
    s = atoms._singular_values
    kept = s[s > RANK_REL_TOL * s[0]]
    return float(kept.min() / np.sqrt(atoms.n_atoms))


def compute_mdw(atoms, n_probe=1000, rng=None):
    """Sampled minimal directional width min_d max_z <z, d/||d||>.

    Analytic value 1/sqrt(n) substituted for the full signed coordinate set.
    The sampled minimum over-estimates the true minimum; use
    mdw_spectral_lower_bound where a guarantee is needed.
    """
    if _is_full_coordinate_set(atoms):
        return 1.0 / np.sqrt(atoms.dim)
    if rng is None:
        rng = np.random.default_rng(0)
    best = np.inf
    for d in _probe_directions(atoms, n_probe, rng):
        norm = np.linalg.norm(d)
        if norm <= 0.0:
            continue
        best = min(best, dual_atomic_norm(d / norm, atoms))
    return float(best)


def compute_delta_hat_sq(atoms, distribution, n_probe=1000, rng=None):
    """Sampled min_d E[<d, z>^2] / ||d||_{A*}^2 over span directions.

    Analytic value 1/n substituted for the full signed coordinate set under
    uniform weights. Over-estimates the true minimum (sampled provenance).
    """
    w = distribution.weights
    if w.shape[0] != atoms.n_atoms:
        raise ValueError("distribution does not match the atom set size")
    if _is_full_coordinate_set(atoms):
        per_coord = np.abs(atoms.atoms * w[:, None]).sum(axis=0)
        if np.abs(per_coord - per_coord[0]).max() <= 1e-12:
            return 1.0 / atoms.dim
    if rng is None:
        rng = np.random.default_rng(0)
    a = atoms.atoms
    best = np.inf
    for d in _probe_directions(atoms, n_probe, rng):
        dual = dual_atomic_norm(d, atoms)
        if dual <= 0.0:
            continue
        best = min(best, float(w @ (a @ d) ** 2) / dual**2)
    return float(best)


@dataclass(frozen=True)
class ConstantsReport:
    """Computable constants of a (problem, dictionary, distribution) triple.

    Fields may be nan when not computable in context (no objective given);
    provenance records how each value was obtained (analytic, exact, sampled,
    sampled_bound, analytic_coordinates, certified_bound, default,
    user_supplied, not_computed).
    """

    l2: float
    l_atomic: float
    mu_lower: float
    delta_hat_sq: float
    mdw: float
    nu: float
    nu_prime: float
    provenance: dict = field(default_factory=dict)

    _ORDER = ("l2", "l_atomic", "mu_lower", "delta_hat_sq", "mdw", "nu", "nu_prime")

    def to_text(self):
        lines = []
        for key in self._ORDER:
            lines.append("%s=%s" % (key, repr(float(getattr(self, key)))))
            lines.append("%s.provenance=%s" % (key, self.provenance.get(key, "unknown")))
        return "\n".join(lines) + "\n"


def envelope(kind, constants, t, delta=1.0, radius=None, eps0=None, p_dist_sq=None):
    """Certified gap bound at iteration t for the given convergence regime.

    kinds: sublinear_greedy / sublinear_random need `radius` (atomic-norm
    radius of the relevant level set); linear needs `eps0` (starting gap);
    accel_greedy / accel_random need `p_dist_sq` (squared metric distance from
    the start to the optimum) and t >= 1. `delta` is the oracle quality for
    the greedy kinds.
    """
    if kind not in _ENVELOPE_KINDS:
        raise ValueError("unknown envelope kind %r (expected one of %s)" % (kind, ", ".join(_ENVELOPE_KINDS)))
    if t < 0:
        raise ValueError("t must be >= 0")
    if not 0.0 < delta <= 1.0:
        raise ValueError("delta must lie in (0, 1]")
    if kind == "sublinear_greedy":
        if radius is None:
            raise ValueError("sublinear_greedy needs radius")
        return 2.0 * constants.l_atomic * radius**2 / (delta**2 * (t + 2.0))
    if kind == "sublinear_random":
        if radius is None:
            raise ValueError("sublinear_random needs radius")
        return 2.0 * constants.l_atomic * radius**2 / (constants.delta_hat_sq * (t + 2.0))
    if kind == "linear":
        if eps0 is None:
            raise ValueError("linear needs eps0")
        rate = 1.0 - delta**2 * constants.mu_lower / constants.l_atomic
        return float(eps0) * rate**t
    if p_dist_sq is None:
        raise ValueError("%s needs p_dist_sq" % kind)
    if t < 1:
        raise ValueError("accelerated envelopes need t >= 1")
    nu = constants.nu if kind == "accel_greedy" else constants.nu_prime
    return 2.0 * constants.l2 * nu * p_dist_sq / (t * (t + 1.0))


def max_atomic_norm(points, atoms):
    """Exact max of the atomic norm over the given points (rows).

    A cheap valid upper bound per point (l1 mass of the minimum-l2
    coefficients) prunes the exact LP evaluations: points are visited in
    decreasing upper-bound order, stopping once no remaining bound can beat
    the best exact value.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != atoms.dim:
        raise ValueError("points must be (k, %d), got %s" % (atoms.dim, pts.shape))
    if pts.shape[0] == 0:
        return 0.0
    pinv = np.linalg.pinv(atoms.atoms.T, rcond=1e-12)
    ub = np.abs(pinv @ pts.T).sum(axis=0)
    order = np.argsort(-ub)
    best = 0.0
    for i in order:
        if ub[i] <= best * (1.0 + 1e-12):
            break
        best = max(best, atomic_norm(pts[i], atoms))
    return float(best)


def level_set_radius_atomic(f, atoms, x0, n_samples=10000, rng=None, safety=1.05):
    """Estimated atomic-norm radius of {f <= f(x0)} around the span optimum.

    Constant-Hessian objectives only, strongly convex on the span (otherwise
    the level set is unbounded there). Samples boundary points of the level
    set uniformly in angle, always including x0 itself, maximizes the atomic
    norm of their offsets from the optimum, and applies the safety factor.
    """
    if not f.has_constant_hessian:
        raise TypeError("level_set_radius_atomic needs a position-independent Hessian")
    x0 = as_vector(x0, f.dim, "x0")
    if rng is None:
        rng = np.random.default_rng(0)
    x_star, f_star = quadratic_optimum(f, atoms)
    eps0 = f.value(x0) - f_star
    if eps0 <= 0.0:
        return 0.0
    u = atoms.span_basis
    h_red = u.T @ f.hessian(np.zeros(f.dim)) @ u
    lam, vecs = np.linalg.eigh(0.5 * (h_red + h_red.T))
    if lam.min() <= 1e-12 * max(lam.max(), 1.0):
        raise ValueError("level set is unbounded on the span (singular restricted Hessian)")
    dirs = rng.standard_normal((n_samples, atoms.span_dim))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    scale = np.sqrt(2.0 * eps0) / np.sqrt(lam)
    offsets = dirs @ (vecs * scale).T @ u.T
    offsets = np.vstack([x0 - x_star, offsets])
    return safety * max_atomic_norm(offsets, atoms)


def trace_atomic_radius(traces, x_star, atoms):
    """Max over recorded iterates of ||x_t - x_star||_A (traces need iterates)."""
    offsets = []
    for tr in traces:
        if tr.iterates is None:
            raise ValueError("trace %r was run without keep_iterates" % tr.method)
        offsets.append(tr.iterates - x_star)
    return max_atomic_norm(np.vstack(offsets), atoms)


def affine_invariance_check(f, atoms, matrix, n_iters, variant="atomic"):
    """Max Euclidean discrepancy between a run and its reparametrized twin.

    Transforms the problem by an invertible matrix M (objective precomposed
    with M, atoms mapped through M^{-1}) and runs n_iters greedy steps on
    both. variant="atomic" uses the dictionary step scaling, which is
    invariant (the discrepancy is rounding noise); variant="l2" uses the
    Euclidean scaling with each problem's own curvature constant, which is
    not. Returns max_t ||M x_hat_t - x_t||_2.
    """
    if variant not in ("atomic", "l2"):
        raise ValueError("variant must be 'atomic' or 'l2'")
    m_mat = np.asarray(matrix, dtype=np.float64)
    if m_mat.ndim != 2 or m_mat.shape[0] != m_mat.shape[1] or m_mat.shape[0] != f.dim:
        raise ValueError("matrix must be square of dim %d" % f.dim)
    if np.linalg.cond(m_mat) > 1e6:
        raise ValueError("matrix is ill-conditioned (cond > 1e6)")
    f_hat = AffineReparametrized(f, m_mat)
    atoms_hat = AtomSet(np.linalg.solve(m_mat, atoms.atoms.T).T)
    x0 = np.zeros(f.dim)

    if variant == "atomic":
        l_a = compute_L_atomic(f, atoms)
        l_a_hat = compute_L_atomic(f_hat, atoms_hat)
        if abs(l_a - l_a_hat) > 1e-6 * (1.0 + abs(l_a)):
            raise AssertionError(
                "dictionary smoothness constant not preserved: %.12g vs %.12g" % (l_a, l_a_hat)
            )
        smooth = AtomicSmoothness(l_a)
        smooth_hat = AtomicSmoothness(l_a)
    else:
        h = f.hessian(x0)
        smooth = L2Smoothness(float(np.linalg.eigvalsh(0.5 * (h + h.T)).max()))
        h_hat = f_hat.hessian(x0)
        smooth_hat = L2Smoothness(float(np.linalg.eigvalsh(0.5 * (h_hat + h_hat.T)).max()))

    cfg = SolverConfig(max_iters=n_iters, oracle=ExactOracle(), smoothness=smooth)
    cfg_hat = SolverConfig(max_iters=n_iters, oracle=ExactOracle(), smoothness=smooth_hat)
    tr = run_pursuit(f, atoms, cfg, x0, keep_iterates=True)
    tr_hat = run_pursuit(f_hat, atoms_hat, cfg_hat, x0, keep_iterates=True)
    k = min(len(tr), len(tr_hat))
    mapped = tr_hat.iterates[:k] @ m_mat.T
    return float(np.abs(np.linalg.norm(mapped - tr.iterates[:k], axis=1)).max())
