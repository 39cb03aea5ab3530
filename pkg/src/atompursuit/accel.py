"""Accelerated pursuit via a sampled estimate-sequence.

The momentum state v is updated with rank-one stochastic gradient information
along sampled atoms; the metric that makes the estimate sequence consistent is
the pseudo-inverse P of the sampling second moment E[z z^T]. The greedy
variant keeps the full-scan atom for the primal step and spends one sample per
iteration on the model; the randomized variant reuses a single sampled atom
for both.
"""

import math
import time
from dataclasses import dataclass

import numpy as np

from .atoms import as_vector, lmo_exact, sample_atom
from .objectives import quadratic_optimum
from .solvers import NumericalFailure, _TraceBuilder

RANGE_TOL = 1e-8  # span-coverage residual for the metric range check
_PINV_REL_CUTOFF = 1e-10


class UnsupportedDistributionError(ValueError):
    """The sampling distribution's second moment does not cover the span."""


@dataclass(frozen=True)
class MetricP:
    """Second moment E[z z^T] of a sampling distribution and its pseudo-inverse."""

    second_moment: np.ndarray
    inverse: np.ndarray
    eigenvalues: np.ndarray
    range_basis: np.ndarray

    @property
    def rank(self):
        return self.range_basis.shape[1]

    def norm_sq(self, v):
        """||v||_P^2 = v^T P v with P the pseudo-inverse metric."""
        v = np.asarray(v, dtype=np.float64)
        return float(v @ (self.inverse @ v))


def compute_metric(atoms, distribution):
    """Build MetricP for a distribution over the atom set.

    Raises UnsupportedDistributionError when some span direction gets no
    sampling mass (the momentum update could never move there), naming the
    uncovered direction.
    """
    w = distribution.weights
    if w.shape[0] != atoms.n_atoms:
        raise ValueError("distribution over %d atoms does not match set of %d" % (w.shape[0], atoms.n_atoms))
    a = atoms.atoms
    p_tilde = (a * w[:, None]).T @ a
    p_tilde = 0.5 * (p_tilde + p_tilde.T)
    vals, vecs = np.linalg.eigh(p_tilde)
    cutoff = _PINV_REL_CUTOFF * vals.max()
    keep = vals > cutoff
    range_basis = np.ascontiguousarray(vecs[:, keep])
    inverse = (range_basis / vals[keep]) @ range_basis.T

    span = atoms.span_basis
    proj = range_basis @ (range_basis.T @ span)
    residuals = np.linalg.norm(span - proj, axis=0)
    worst = int(np.argmax(residuals))
    if residuals[worst] > RANGE_TOL:
        direction = span[:, worst] - proj[:, worst]
        direction = direction / np.linalg.norm(direction)
        raise UnsupportedDistributionError(
            "sampling mass misses a span direction (residual %.3e along %s)"
            % (residuals[worst], np.array2string(direction, precision=4))
        )
    for arr in (p_tilde, inverse, vals, range_basis):
        arr.setflags(write=False)
    return MetricP(p_tilde, inverse, vals, range_basis)


def solve_alpha(beta, lipschitz, nu):
    """Positive root of (L nu) a^2 = beta + a, the coupling weight recursion."""
    if lipschitz <= 0.0 or nu <= 0.0:
        raise ValueError("lipschitz and nu must be positive")
    if beta < 0.0:
        raise ValueError("beta must be nonnegative")
    ln = lipschitz * nu
    return (1.0 + math.sqrt(1.0 + 4.0 * beta * ln)) / (2.0 * ln)


@dataclass
class AccelState:
    """Coupled iterates and weights after an iteration."""

    x: np.ndarray
    v: np.ndarray
    y: np.ndarray
    alpha: float
    beta: float
    iteration: int


@dataclass(frozen=True)
class HistoryEntry:
    """One estimate-sequence increment: weight, query point, sampled atom."""

    alpha: float
    y: np.ndarray
    z_tilde: np.ndarray


def model_psi_value(history, metric, x, x0, f):
    """Evaluate the estimate-sequence model psi_t at x from its history."""
    x = np.asarray(x, dtype=np.float64)
    x0 = np.asarray(x0, dtype=np.float64)
    total = 0.5 * metric.norm_sq(x - x0)
    for entry in history:
        g = f.gradient(entry.y)
        s = float(entry.z_tilde @ g)
        pz = metric.inverse @ entry.z_tilde
        total += entry.alpha * (f.value(entry.y) + s * float(pz @ (x - entry.y)))
    return float(total)


@dataclass
class AccelDiagnostics:
    """Per-iteration internals of an accelerated run (index 0 is the start)."""

    alphas: np.ndarray
    betas: np.ndarray
    f_y: np.ndarray
    x_scores: np.ndarray
    x_atom_norm_sq: np.ndarray
    v_atom_indices: np.ndarray
    psi_at_optimum: np.ndarray | None = None
    psi_minimum: np.ndarray | None = None
    psi_grad_residual: np.ndarray | None = None
    x_star: np.ndarray | None = None
    history: list | None = None


def _validate_lipschitz(f, atoms, lipschitz):
    if not f.has_constant_hessian:
        return
    u = atoms.span_basis
    h_red = u.T @ f.hessian(np.zeros(f.dim)) @ u
    lam = float(np.linalg.eigvalsh(0.5 * (h_red + h_red.T)).max())
    if lipschitz < lam * (1.0 - 1e-9):
        raise ValueError(
            "lipschitz %.6g is below the span-restricted curvature %.6g" % (lipschitz, lam)
        )


def _run_accel(f, atoms, distribution, lipschitz, nu, config, x0, greedy, metric, keep_iterates, psi_diagnostics, label):
    if f.dim != atoms.dim:
        raise ValueError("objective dim %d does not match atoms dim %d" % (f.dim, atoms.dim))
    x0 = as_vector(x0, f.dim, "x0")
    if not atoms.in_span(x0):
        raise ValueError("x0 must lie in the dictionary span")
    if lipschitz <= 0.0 or nu <= 0.0:
        raise ValueError("lipschitz and nu must be positive")
    _validate_lipschitz(f, atoms, lipschitz)
    distribution.check_dedup(atoms)
    if metric is None:
        metric = compute_metric(atoms, distribution)
    rng = np.random.default_rng(config.seed)

    x = x0.copy()
    v = x0.copy()
    beta = 0.0
    fval = f.value(x)
    if not np.isfinite(fval):
        raise ValueError("objective is non-finite at x0")
    builder = _TraceBuilder(label, config.seed, keep_iterates)
    builder.append(0, fval, -1, 0.0, float("nan"), 0.0, x)

    alphas = [0.0]
    betas = [0.0]
    f_ys = [float("nan")]
    x_scores = [float("nan")]
    x_norms = [float("nan")]
    v_atoms = [-1]

    track = psi_diagnostics
    if track:
        x_star, _ = quadratic_optimum(f, atoms)
        psi_star_val = 0.5 * metric.norm_sq(x_star - x0)
        psi_min_val = 0.0
        accum = np.zeros(f.dim)
        psi_stars = [psi_star_val]
        psi_mins = [psi_min_val]
        psi_resid = [0.0]
        history = []

    optimum = f.optimum_value
    start = time.perf_counter()
    for t in range(1, config.max_iters + 1):
        if optimum is not None and fval - optimum <= config.gap_tolerance:
            break
        alpha = solve_alpha(beta, lipschitz, nu)
        beta = beta + alpha
        tau = alpha / beta
        y = (1.0 - tau) * x + tau * v
        g = f.gradient(y)

        sampled = sample_atom(distribution, atoms, rng)
        z_tilde = sampled.atom
        s_tilde = float(g @ z_tilde)
        if greedy:
            res = lmo_exact(g, atoms)
            z, score = res.atom, res.score
            atom_idx = res.atom_index
        else:
            z, score = z_tilde, s_tilde
            atom_idx = sampled.atom_index
        znorm2 = float(z @ z)
        gamma = -score / (lipschitz * znorm2)
        x = y + gamma * z
        dv = (alpha * s_tilde) * z_tilde
        v = v - dv
        fval = f.value(x)
        builder.append(t, fval, atom_idx, gamma, float("nan"), time.perf_counter() - start, x)

        alphas.append(alpha)
        betas.append(beta)
        f_ys.append(float(f.value(y)))
        x_scores.append(score)
        x_norms.append(znorm2)
        v_atoms.append(sampled.atom_index)
        if track:
            pz = metric.inverse @ z_tilde
            f_y = f_ys[-1]
            psi_star_val += alpha * (f_y + s_tilde * float(pz @ (x_star - y)))
            psi_min_val += 0.5 * float(dv @ (metric.inverse @ dv)) + alpha * (
                f_y + s_tilde * float(pz @ (v - y))
            )
            accum += dv
            resid = v - x0 + accum
            psi_stars.append(psi_star_val)
            psi_mins.append(psi_min_val)
            psi_resid.append(float(np.linalg.norm(metric.inverse @ resid)))
            history.append(HistoryEntry(alpha, y.copy(), z_tilde.copy()))
        if not np.isfinite(fval):
            trace = builder.build(x)
            raise NumericalFailure(
                "objective became non-finite at iteration %d of %s (seed %d)"
                % (t, label, config.seed),
                trace,
            )

    trace = builder.build(x)
    diag = AccelDiagnostics(
        alphas=np.array(alphas),
        betas=np.array(betas),
        f_y=np.array(f_ys),
        x_scores=np.array(x_scores),
        x_atom_norm_sq=np.array(x_norms),
        v_atom_indices=np.array(v_atoms, dtype=np.int64),
    )
    if track:
        diag.psi_at_optimum = np.array(psi_stars)
        diag.psi_minimum = np.array(psi_mins)
        diag.psi_grad_residual = np.array(psi_resid)
        diag.x_star = x_star
        diag.history = history
        trace.psi_at_reference = diag.psi_at_optimum
        trace.psi_minimum = diag.psi_minimum
    return trace, diag


def run_accel_mp(f, atoms, distribution, lipschitz, nu, config, x0, metric=None, keep_iterates=False, psi_diagnostics=False):
    """Accelerated greedy pursuit: full-scan atom for x, sampled atom for v.

    Returns (SolverTrace, AccelDiagnostics). With psi_diagnostics the model
    value at the span optimum and the model minimum are tracked per iteration
    (constant-Hessian objectives only).
    """
    return _run_accel(
        f, atoms, distribution, lipschitz, nu, config, x0,
        greedy=True, metric=metric, keep_iterates=keep_iterates,
        psi_diagnostics=psi_diagnostics, label="accel_mp",
    )


def run_accel_rp(f, atoms, distribution, lipschitz, nu, config, x0, metric=None, keep_iterates=False, psi_diagnostics=False):
    """Accelerated random pursuit: one sampled atom drives both x and v."""
    return _run_accel(
        f, atoms, distribution, lipschitz, nu, config, x0,
        greedy=False, metric=metric, keep_iterates=keep_iterates,
        psi_diagnostics=psi_diagnostics, label="accel_rp",
    )


@dataclass(frozen=True)
class NuEstimate:
    """Sampled upper-ratio estimates of the acceleration constants."""

    nu: float
    nu_prime: float
    method: str


def _is_uniform_coordinate_case(atoms, distribution):
    a = atoms.atoms
    if not atoms.symmetric:
        return False
    one_hot = (np.abs(a) == 1.0).sum(axis=1) == 1
    if not (one_hot.all() and ((a == 0.0) | (np.abs(a) == 1.0)).all()):
        return False
    n = atoms.dim
    p_tilde = (a * distribution.weights[:, None]).T @ a
    return bool(np.abs(p_tilde - np.eye(n) / n).max() <= 1e-12)


def estimate_nu(atoms, distribution, metric, n_probe=2000, rng=None):
    """Max-ratio estimates of nu (greedy) and nu' (randomized).

    Probes random span directions plus every atom direction; each candidate d
    contributes E[(z~ . d)^2 ||z~||_P^2] divided by the greedy score term
    (<z(d), d>^2 / ||z(d)||^2 with z(d) the best-aligned atom) for nu, and by
    E[(z~ . d)^2 / ||z~||^2] for nu'. For the uniform coordinate case the
    analytic values are substituted (nu' = span dim exactly, nu clamped into
    [1, span dim]). Monotone in n_probe for a fixed rng stream.
    """
    if n_probe < 1:
        raise ValueError("n_probe must be >= 1, got %d" % n_probe)
    if rng is None:
        rng = np.random.default_rng(0)
    w = distribution.weights
    if w.shape[0] != atoms.n_atoms:
        raise ValueError("distribution does not match the atom set size")
    a = atoms.atoms
    p_norm_sq = ((a @ metric.inverse) * a).sum(axis=1)
    l2_sq = (a * a).sum(axis=1)
    u = atoms.span_basis
    # row-major draw keeps smaller n_probe a prefix of larger ones (monotone maxima)
    probes = rng.standard_normal((n_probe, atoms.span_dim)) @ u.T
    candidates = np.vstack([probes, a])
    nu_best = 0.0
    nu_prime_best = 0.0
    for d in candidates:
        scores = a @ d
        num = float(w @ (scores**2 * p_norm_sq))
        if num <= 0.0:
            continue
        k = int(np.argmax(scores))
        greedy_term = scores[k] ** 2 / l2_sq[k]
        rand_term = float(w @ (scores**2 / l2_sq))
        if greedy_term > 0.0:
            nu_best = max(nu_best, num / greedy_term)
        if rand_term > 0.0:
            nu_prime_best = max(nu_prime_best, num / rand_term)
    if _is_uniform_coordinate_case(atoms, distribution):
        n = atoms.span_dim
        return NuEstimate(float(min(max(nu_best, 1.0), n)), float(n), "analytic_coordinates")
    return NuEstimate(float(nu_best), float(nu_prime_best), "sampled_bound")
