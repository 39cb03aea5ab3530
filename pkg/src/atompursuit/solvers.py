"""Pursuit solver loops: greedy, subsampled, and randomized atom selection.

Every iteration picks an atom z through the configured oracle and moves along
it. Two step scalings exist: the Euclidean one divides the directional
derivative by L ||z||_2^2 (L an l2 smoothness constant), the dictionary one
divides by the dictionary smoothness constant alone, which makes the iterates
invariant under invertible reparametrizations of the problem.
"""

import time
from dataclasses import dataclass, replace

import numpy as np

from .atoms import (
    AtomSet,
    SamplingDistribution,
    as_vector,
    lmo_approx,
    lmo_exact,
    sample_atom,
)


@dataclass(frozen=True)
class ExactOracle:
    """Full scan over the dictionary."""


@dataclass(frozen=True)
class ApproxOracle:
    """Scan a random fraction of the dictionary (whole negation pairs)."""

    fraction: float

    def __post_init__(self):
        if not 0.0 < self.fraction <= 1.0:
            raise ValueError("fraction must lie in (0, 1], got %r" % (self.fraction,))


@dataclass(frozen=True)
class RandomOracle:
    """Sample the atom from a fixed distribution instead of scanning."""

    distribution: SamplingDistribution


@dataclass(frozen=True)
class L2Smoothness:
    """Euclidean smoothness constant L; step gamma = -<g,z> / (L ||z||^2)."""

    lipschitz: float

    def __post_init__(self):
        if not self.lipschitz > 0.0:
            raise ValueError("lipschitz must be positive, got %r" % (self.lipschitz,))


@dataclass(frozen=True)
class AtomicSmoothness:
    """Dictionary smoothness constant; step gamma = -<g,z> / L_A."""

    lipschitz: float

    def __post_init__(self):
        if not self.lipschitz > 0.0:
            raise ValueError("lipschitz must be positive, got %r" % (self.lipschitz,))


@dataclass(frozen=True)
class SolverConfig:
    """Shared run parameters.

    gap_tolerance stops a run once f(x_t) - optimum_value <= gap_tolerance,
    which requires the objective to carry optimum_value; with the default 0.0
    that only triggers at an exact optimum. seed drives subsampling and atom
    sampling.
    """

    max_iters: int
    oracle: object
    smoothness: object
    gap_tolerance: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1, got %d" % self.max_iters)
        if self.gap_tolerance < 0.0:
            raise ValueError("gap_tolerance must be >= 0, got %r" % (self.gap_tolerance,))
        if not isinstance(self.oracle, (ExactOracle, ApproxOracle, RandomOracle)):
            raise TypeError("oracle must be ExactOracle, ApproxOracle, or RandomOracle")
        if not isinstance(self.smoothness, (L2Smoothness, AtomicSmoothness)):
            raise TypeError("smoothness must be L2Smoothness or AtomicSmoothness")


@dataclass
class SolverTrace:
    """Per-iteration record arrays; index 0 is the starting point.

    atom_indices[0] = -1 and gammas[0] = 0 by convention. deltas holds the
    realized oracle quality (1.0 for exact scans, nan for sampled atoms).
    psi_at_reference / psi_minimum are filled by the accelerated runs when
    their model diagnostics are enabled.
    """

    method: str
    seed: int
    iters: np.ndarray
    f_values: np.ndarray
    atom_indices: np.ndarray
    gammas: np.ndarray
    deltas: np.ndarray
    wall_times: np.ndarray
    final_x: np.ndarray | None
    iterates: np.ndarray | None = None
    psi_at_reference: np.ndarray | None = None
    psi_minimum: np.ndarray | None = None

    def __len__(self):
        return int(self.iters.shape[0])

    def gaps(self, optimum):
        return self.f_values - float(optimum)


class NumericalFailure(RuntimeError):
    """The objective became non-finite; carries the trace recorded so far."""

    def __init__(self, message, trace):
        super().__init__(message)
        self.trace = trace


def mp_step(f, x, z, lipschitz):
    """One Euclidean-scaled pursuit step along z. Returns (x_next, gamma)."""
    if lipschitz <= 0.0:
        raise ValueError("lipschitz must be positive")
    x = as_vector(x, f.dim)
    z = as_vector(z, f.dim, "z")
    znorm2 = float(z @ z)
    if znorm2 == 0.0:
        raise ValueError("z is zero")
    gamma = -float(f.gradient(x) @ z) / (lipschitz * znorm2)
    return x + gamma * z, gamma


def affine_mp_step(f, x, z, lipschitz_atomic):
    """One dictionary-scaled pursuit step along z. Returns (x_next, gamma)."""
    if lipschitz_atomic <= 0.0:
        raise ValueError("lipschitz_atomic must be positive")
    x = as_vector(x, f.dim)
    z = as_vector(z, f.dim, "z")
    if not z.any():
        raise ValueError("z is zero")
    gamma = -float(f.gradient(x) @ z) / lipschitz_atomic
    return x + gamma * z, gamma


def _default_label(config):
    greedy = isinstance(config.oracle, (ExactOracle, ApproxOracle))
    approx = isinstance(config.oracle, ApproxOracle)
    if isinstance(config.smoothness, L2Smoothness):
        base = "mp" if greedy else "rp_l2"
    else:
        base = "affine_mp" if greedy else "rp"
    return base + ("_approx" if approx else "")


class _TraceBuilder:
    def __init__(self, method, seed, keep_iterates):
        self.method = method
        self.seed = seed
        self.iters = []
        self.f_values = []
        self.atom_indices = []
        self.gammas = []
        self.deltas = []
        self.wall_times = []
        self.iterates = [] if keep_iterates else None

    def append(self, t, fval, atom, gamma, delta, wall, x):
        self.iters.append(t)
        self.f_values.append(fval)
        self.atom_indices.append(atom)
        self.gammas.append(gamma)
        self.deltas.append(delta)
        self.wall_times.append(wall)
        if self.iterates is not None:
            self.iterates.append(x.copy())

    def build(self, final_x):
        return SolverTrace(
            method=self.method,
            seed=self.seed,
            iters=np.array(self.iters, dtype=np.int64),
            f_values=np.array(self.f_values),
            atom_indices=np.array(self.atom_indices, dtype=np.int64),
            gammas=np.array(self.gammas),
            deltas=np.array(self.deltas),
            wall_times=np.array(self.wall_times),
            final_x=final_x.copy() if final_x is not None else None,
            iterates=np.array(self.iterates) if self.iterates is not None else None,
        )


def run_pursuit(f, atoms, config, x0, label=None, keep_iterates=False):
    """Run the configured pursuit from x0; returns a SolverTrace.

    x0 must lie in the dictionary span (iterates then stay there). Stops early
    only through gap_tolerance when the objective knows its optimum. A
    non-finite objective value raises NumericalFailure with the partial trace.
    """
    if f.dim != atoms.dim:
        raise ValueError("objective dim %d does not match atoms dim %d" % (f.dim, atoms.dim))
    x0 = as_vector(x0, f.dim, "x0")
    if not atoms.in_span(x0):
        raise ValueError("x0 must lie in the dictionary span")
    oracle = config.oracle
    smooth = config.smoothness
    if isinstance(oracle, RandomOracle):
        if oracle.distribution.weights.shape[0] != atoms.n_atoms:
            raise ValueError("oracle distribution does not match the atom set size")
        oracle.distribution.check_dedup(atoms)
    rng = np.random.default_rng(config.seed)
    method = label if label is not None else _default_label(config)

    x = x0.copy()
    fval = f.value(x)
    if not np.isfinite(fval):
        raise ValueError("objective is non-finite at x0")
    builder = _TraceBuilder(method, config.seed, keep_iterates)
    builder.append(0, fval, -1, 0.0, float("nan"), 0.0, x)
    optimum = f.optimum_value
    start = time.perf_counter()

    for t in range(1, config.max_iters + 1):
        if optimum is not None and fval - optimum <= config.gap_tolerance:
            break
        g = f.gradient(x)
        if isinstance(oracle, ExactOracle):
            res = lmo_exact(g, atoms)
            score, delta = res.score, 1.0
        elif isinstance(oracle, ApproxOracle):
            res, delta = lmo_approx(g, atoms, oracle.fraction, rng)
            score = res.score
        else:
            res = sample_atom(oracle.distribution, atoms, rng)
            score = float(g @ res.atom)
            delta = float("nan")
        z = res.atom
        if isinstance(smooth, L2Smoothness):
            gamma = -score / (smooth.lipschitz * float(z @ z))
        else:
            gamma = -score / smooth.lipschitz
        x = x + gamma * z
        fval = f.value(x)
        builder.append(t, fval, res.atom_index, gamma, delta, time.perf_counter() - start, x)
        if not np.isfinite(fval):
            raise NumericalFailure(
                "objective became non-finite at iteration %d of %s (seed %d)"
                % (t, method, config.seed),
                builder.build(x),
            )
    return builder.build(x)


def run_steepest_cd(f, config, x0, keep_iterates=False):
    """Greedy coordinate descent: pursuit over the signed coordinate directions."""
    atoms = AtomSet.coordinates(f.dim)
    return run_pursuit(f, atoms, config, x0, label="steepest_cd", keep_iterates=keep_iterates)


def run_random_cd(f, config, x0, keep_iterates=False):
    """Uniform random coordinate descent; replaces the configured oracle."""
    atoms = AtomSet.coordinates(f.dim)
    config = replace(config, oracle=RandomOracle(SamplingDistribution.uniform(atoms)))
    return run_pursuit(f, atoms, config, x0, label="random_cd", keep_iterates=keep_iterates)


def _fmt(v):
    return repr(float(v))


def write_traces_csv(traces, path, optimum=None):
    """Write traces to one CSV (schema: iter,method,seed,fval,gap,atom,gamma,delta).

    gap is fval - optimum, nan when no optimum is supplied. psi_star/psi_min
    columns are appended when every trace carries psi diagnostics.
    """
    if isinstance(traces, SolverTrace):
        traces = [traces]
    with_psi = all(tr.psi_at_reference is not None and tr.psi_minimum is not None for tr in traces)
    header = "iter,method,seed,fval,gap,atom,gamma,delta"
    if with_psi:
        header += ",psi_star,psi_min"
    lines = [header]
    for tr in traces:
        for k in range(len(tr)):
            gap = tr.f_values[k] - optimum if optimum is not None else float("nan")
            row = "%d,%s,%d,%s,%s,%d,%s,%s" % (
                tr.iters[k],
                tr.method,
                tr.seed,
                _fmt(tr.f_values[k]),
                _fmt(gap),
                tr.atom_indices[k],
                _fmt(tr.gammas[k]),
                _fmt(tr.deltas[k]),
            )
            if with_psi:
                row += ",%s,%s" % (_fmt(tr.psi_at_reference[k]), _fmt(tr.psi_minimum[k]))
            lines.append(row)
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def write_trace_csv(trace, path, optimum=None):
    write_traces_csv([trace], path, optimum=optimum)


def read_traces_csv(path):
    """Read back traces written by write_traces_csv (grouped by method, seed)."""
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise ValueError("%s: empty trace file" % path)
    cols = lines[0].split(",")
    base = ["iter", "method", "seed", "fval", "gap", "atom", "gamma", "delta"]
    if cols[: len(base)] != base:
        raise ValueError("%s: unexpected trace header %r" % (path, lines[0]))
    with_psi = cols[len(base) :] == ["psi_star", "psi_min"]
    groups = {}
    order = []
    for ln in lines[1:]:
        parts = ln.split(",")
        key = (parts[1], int(parts[2]))
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(parts)
    traces = []
    for method, seed in order:
        rows = groups[(method, seed)]
        tr = SolverTrace(
            method=method,
            seed=seed,
            iters=np.array([int(r[0]) for r in rows], dtype=np.int64),
            f_values=np.array([float(r[3]) for r in rows]),
            atom_indices=np.array([int(r[5]) for r in rows], dtype=np.int64),
            gammas=np.array([float(r[6]) for r in rows]),
            deltas=np.array([float(r[7]) for r in rows]),
            wall_times=np.full(len(rows), float("nan")),
            final_x=None,
        )
        if with_psi:
            tr.psi_at_reference = np.array([float(r[8]) for r in rows])
            tr.psi_minimum = np.array([float(r[9]) for r in rows])
        traces.append(tr)
    return traces
