"""Benchmark experiments: problem generation, method registry, CSV reports.

Outputs are byte-deterministic for a fixed configuration: all randomness flows
through explicit seeds, runs execute in a fixed order (parallel execution
preserves it), and floats are written with repr round-tripping.
"""

import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .accel import compute_metric, estimate_nu, run_accel_mp, run_accel_rp
from .analysis import (
    ConstantsReport,
    _is_full_coordinate_set,
    compute_delta_hat_sq,
    compute_mdw,
    envelope,
    trace_atomic_radius,
)
from .atoms import AtomSet, SamplingDistribution, load_dictionary
from .objectives import (
    SquaredDistance,
    compute_L_atomic,
    compute_mu_atomic_lower,
    quadratic_optimum,
)
from .solvers import (
    AtomicSmoothness,
    ExactOracle,
    L2Smoothness,
    NumericalFailure,
    RandomOracle,
    SolverConfig,
    run_pursuit,
    write_traces_csv,
)

METHODS = ("mp", "affine_mp", "rp", "steepest_cd", "random_cd", "accel_mp", "accel_rp")

NU_POLICIES = ("default", "estimated", "explicit")


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str  # "synthetic" | "regression"
    methods: tuple
    seeds: tuple
    iters: int = 500
    out_dir: str = "."
    dim: int = 100
    n_atoms: int = 200
    dictionary: str = "random"  # synthetic: "random" | "coordinates"
    problem_seed: int = 0
    pixels_path: str | None = None
    dict_path: str | None = None
    nu_policy: str = "default"
    nu_value: float | None = None
    envelopes: bool = False
    jobs: int = 1

    def __post_init__(self):
        if self.kind not in ("synthetic", "regression"):
            raise ValueError("kind must be 'synthetic' or 'regression'")
        if not self.methods:
            raise ValueError("at least one method required")
        for m in self.methods:
            if m not in METHODS:
                raise ValueError("unknown method %r (known: %s)" % (m, ", ".join(METHODS)))
        if not self.seeds:
            raise ValueError("at least one seed required")
        if self.iters < 1:
            raise ValueError("iters must be >= 1")
        if self.nu_policy not in NU_POLICIES:
            raise ValueError("nu_policy must be one of %s" % ", ".join(NU_POLICIES))
        if self.nu_policy == "explicit" and (self.nu_value is None or self.nu_value <= 0):
            raise ValueError("explicit nu_policy needs a positive nu_value")
        if self.dictionary not in ("random", "coordinates"):
            raise ValueError("dictionary must be 'random' or 'coordinates'")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")


def gen_synthetic(dim, n_atoms, seed=0):
    """Random target plus a symmetric dictionary of unit-norm atoms.

    n_atoms gaussian directions are drawn, normalized to unit length, then
    closed under negation, so the resulting set holds 2*n_atoms atoms.
    Returns (objective, atom_set, x0); the objective knows its
    span-restricted optimum value.
    """
    if n_atoms < 1:
        raise ValueError("n_atoms must be >= 1, got %d" % n_atoms)
    if n_atoms < dim:
        warnings.warn(
            "dictionary of %d directions cannot span R^%d; runs converge to the span optimum"
            % (n_atoms, dim),
            stacklevel=2,
        )
    rng = np.random.default_rng(seed)
    target = rng.standard_normal(dim)
    base = rng.standard_normal((n_atoms, dim))
    base /= np.linalg.norm(base, axis=1, keepdims=True)
    atom_set = AtomSet.symmetrize(base)
    objective = SquaredDistance(target)
    _, f_star = quadratic_optimum(objective, atom_set)
    objective.optimum_value = f_star
    return objective, atom_set, np.zeros(dim)


def gen_coordinate_synthetic(dim, seed=0):
    """Random target over the signed coordinate dictionary."""
    rng = np.random.default_rng(seed)
    target = rng.standard_normal(dim)
    atom_set = AtomSet.coordinates(dim)
    objective = SquaredDistance(target, optimum_value=0.0)
    return objective, atom_set, np.zeros(dim)


def load_regression(pixels_path, dict_path):
    """Load per-pixel squared-loss objectives and the (symmetrized) dictionary.

    The pixels file is a plain CSV matrix, one pixel per row; the dictionary
    file uses the counted-header format and is closed under negation on load.
    """
    try:
        pixels = np.loadtxt(pixels_path, delimiter=",", ndmin=2)
    except ValueError as exc:
        raise ValueError("%s: %s" % (pixels_path, exc)) from None
    raw = load_dictionary(dict_path)
    atom_set = raw if raw.symmetric else AtomSet.symmetrize(raw.atoms)
    if pixels.shape[1] != atom_set.dim:
        raise ValueError(
            "pixels have %d features but the dictionary has dim %d"
            % (pixels.shape[1], atom_set.dim)
        )
    objectives = []
    for row in pixels:
        obj = SquaredDistance(row)
        _, f_star = quadratic_optimum(obj, atom_set)
        obj.optimum_value = f_star
        objectives.append(obj)
    return objectives, atom_set


def make_regression_standin(out_dir, n_pixels=64, dim=16, n_materials=6, seed=0):
    """Write a generated stand-in regression dataset (pixels.csv, dict.csv).

    Pixels are nonnegative mixtures of n_materials smooth nonnegative
    signatures plus small noise; the dictionary file holds the signatures.
    Returns (pixels_path, dict_path).
    """
    rng = np.random.default_rng(seed)
    grid = np.linspace(0.0, 1.0, dim)
    sigs = np.empty((n_materials, dim))
    for k in range(n_materials):
        center = rng.uniform(0.1, 0.9)
        width = rng.uniform(0.05, 0.3)
        sigs[k] = np.exp(-0.5 * ((grid - center) / width) ** 2) + 0.1 * rng.random()
    sigs /= np.linalg.norm(sigs, axis=1, keepdims=True)
    weights = rng.dirichlet(np.ones(n_materials), size=n_pixels)
    scales = rng.uniform(0.5, 2.0, size=(n_pixels, 1))
    pixels = scales * (weights @ sigs) + 0.01 * rng.standard_normal((n_pixels, dim))
    os.makedirs(out_dir, exist_ok=True)
    pixels_path = os.path.join(out_dir, "pixels.csv")
    dict_path = os.path.join(out_dir, "dict.csv")
    with open(pixels_path, "w") as fh:
        for row in pixels:
            fh.write(",".join(repr(v) for v in row.tolist()) + "\n")
    from .atoms import save_dictionary

    save_dictionary(AtomSet(sigs), dict_path)
    return pixels_path, dict_path


@dataclass
class _Problem:
    """Everything a single run needs; picklable for worker processes."""

    objectives: list
    atom_set: AtomSet
    x0: np.ndarray
    l2: float
    l_atomic: float
    dist_rp: SamplingDistribution
    dist_accel: SamplingDistribution
    nu: float
    nu_prime: float
    cd_atoms: AtomSet | None = None
    cd_l_atomic: float | None = None
    cd_dist: SamplingDistribution | None = None


def _coordinate_parts(problem, f):
    if problem.cd_atoms is None:
        problem.cd_atoms = AtomSet.coordinates(f.dim)
        problem.cd_l_atomic = compute_L_atomic(f, problem.cd_atoms)
        problem.cd_dist = SamplingDistribution.uniform(problem.cd_atoms)
    return problem.cd_atoms, problem.cd_l_atomic, problem.cd_dist


def _run_single(problem, method, seed, iters, keep_iterates):
    """One (method, seed) run; regression problems average across pixels."""
    traces = []
    for f in problem.objectives:
        if method == "mp":
            cfg = SolverConfig(iters, ExactOracle(), L2Smoothness(problem.l2), seed=seed)
            tr = run_pursuit(f, problem.atom_set, cfg, problem.x0, label="mp", keep_iterates=keep_iterates)
        elif method == "affine_mp":
            cfg = SolverConfig(iters, ExactOracle(), AtomicSmoothness(problem.l_atomic), seed=seed)
            tr = run_pursuit(f, problem.atom_set, cfg, problem.x0, label="affine_mp", keep_iterates=keep_iterates)
        elif method == "rp":
            cfg = SolverConfig(
                iters, RandomOracle(problem.dist_rp), AtomicSmoothness(problem.l_atomic), seed=seed
            )
            tr = run_pursuit(f, problem.atom_set, cfg, problem.x0, label="rp", keep_iterates=keep_iterates)
        elif method == "steepest_cd":
            atoms, l_a, _ = _coordinate_parts(problem, f)
            cfg = SolverConfig(iters, ExactOracle(), AtomicSmoothness(l_a), seed=seed)
            tr = run_pursuit(f, atoms, cfg, problem.x0, label="steepest_cd", keep_iterates=keep_iterates)
        elif method == "random_cd":
            atoms, l_a, dist = _coordinate_parts(problem, f)
            cfg = SolverConfig(iters, RandomOracle(dist), AtomicSmoothness(l_a), seed=seed)
            tr = run_pursuit(f, atoms, cfg, problem.x0, label="random_cd", keep_iterates=keep_iterates)
        elif method == "accel_mp":
            cfg = SolverConfig(iters, ExactOracle(), L2Smoothness(problem.l2), seed=seed)
            tr, _ = run_accel_mp(
                f, problem.atom_set, problem.dist_accel, problem.l2, problem.nu,
                cfg, problem.x0, keep_iterates=keep_iterates,
            )
        elif method == "accel_rp":
            cfg = SolverConfig(iters, ExactOracle(), L2Smoothness(problem.l2), seed=seed)
            tr, _ = run_accel_rp(
                f, problem.atom_set, problem.dist_accel, problem.l2, problem.nu_prime,
                cfg, problem.x0, keep_iterates=keep_iterates,
            )
        else:
            raise ValueError("unknown method %r" % method)
        traces.append(tr)
    if len(traces) == 1:
        return traces[0]
    return _average_traces(traces, method, seed, iters)


def _pad_forward(arr, length):
    if arr.shape[0] >= length:
        return arr[:length]
    pad = np.full(length - arr.shape[0], arr[-1])
    return np.concatenate([arr, pad])


def _average_traces(traces, method, seed, iters):
    from .solvers import SolverTrace

    length = iters + 1
    stack = np.vstack([_pad_forward(tr.f_values, length) for tr in traces])
    nan = np.full(length, float("nan"))
    return SolverTrace(
        method=method,
        seed=seed,
        iters=np.arange(length, dtype=np.int64),
        f_values=stack.mean(axis=0),
        atom_indices=np.full(length, -1, dtype=np.int64),
        gammas=nan.copy(),
        deltas=nan.copy(),
        wall_times=nan.copy(),
        final_x=None,
    )


def _worker(args):
    problem, method, seed, iters, keep = args
    try:
        return ("ok", _run_single(problem, method, seed, iters, keep))
    except NumericalFailure as exc:
        return ("failed", (str(exc), exc.trace))


@dataclass
class ExperimentResult:
    out_dir: str
    trace_paths: list
    aggregate_path: str
    constants_path: str
    traces: dict
    report: ConstantsReport
    failures: list = field(default_factory=list)


def _build_report(cfg, problem, atoms):
    rng = np.random.default_rng(1000)
    provenance = {"l2": "exact", "l_atomic": "exact", "mu_lower": "certified_bound"}
    coord_analytic = _is_full_coordinate_set(atoms)
    delta_hat = compute_delta_hat_sq(atoms, problem.dist_rp, n_probe=2000, rng=rng)
    mdw = compute_mdw(atoms, n_probe=2000, rng=rng)
    provenance["delta_hat_sq"] = "analytic" if coord_analytic else "sampled"
    provenance["mdw"] = "analytic" if coord_analytic else "sampled"
    f0 = problem.objectives[0]
    mu_lower = compute_mu_atomic_lower(f0, atoms)

    if cfg.nu_policy == "default":
        nu, nu_prime = 1.0, float(atoms.span_dim)
        provenance["nu"] = "default"
        provenance["nu_prime"] = "default"
    elif cfg.nu_policy == "explicit":
        nu = nu_prime = float(cfg.nu_value)
        provenance["nu"] = provenance["nu_prime"] = "user_supplied"
    else:
        metric = compute_metric(atoms, problem.dist_accel)
        est = estimate_nu(atoms, problem.dist_accel, metric, n_probe=2000, rng=rng)
        nu, nu_prime = est.nu, est.nu_prime
        provenance["nu"] = provenance["nu_prime"] = est.method
    report = ConstantsReport(
        l2=problem.l2,
        l_atomic=problem.l_atomic,
        mu_lower=mu_lower,
        delta_hat_sq=delta_hat,
        mdw=mdw,
        nu=nu,
        nu_prime=nu_prime,
        provenance=provenance,
    )
    return report, nu, nu_prime


def _setup_problem(cfg):
    if cfg.kind == "synthetic":
        if cfg.dictionary == "coordinates":
            objective, atom_set, x0 = gen_coordinate_synthetic(cfg.dim, seed=cfg.problem_seed)
        else:
            objective, atom_set, x0 = gen_synthetic(cfg.dim, cfg.n_atoms, seed=cfg.problem_seed)
        objectives = [objective]
    else:
        if not cfg.pixels_path or not cfg.dict_path:
            raise ValueError("regression experiments need pixels_path and dict_path")
        objectives, atom_set = load_regression(cfg.pixels_path, cfg.dict_path)
        x0 = np.zeros(atom_set.dim)
    f0 = objectives[0]
    h = f0.hessian(np.zeros(f0.dim))
    l2 = float(np.linalg.eigvalsh(0.5 * (h + h.T)).max())
    problem = _Problem(
        objectives=objectives,
        atom_set=atom_set,
        x0=x0,
        l2=l2,
        l_atomic=compute_L_atomic(f0, atom_set),
        dist_rp=SamplingDistribution.uniform(atom_set),
        dist_accel=SamplingDistribution.uniform(atom_set, half_space=True),
        nu=1.0,
        nu_prime=float(atom_set.span_dim),
    )
    return problem


def _mean_optimum(problem):
    vals = [f.optimum_value for f in problem.objectives]
    if any(v is None for v in vals):
        return None
    return float(np.mean(vals))


def _envelope_series(cfg, problem, method, traces, length):
    """Envelope column for one method, or None when no guaranteed bound exists."""
    if cfg.kind != "synthetic":
        return None
    f0 = problem.objectives[0]
    if method in ("steepest_cd", "random_cd"):
        atoms, l_a, _ = _coordinate_parts(problem, f0)
    else:
        atoms, l_a = problem.atom_set, problem.l_atomic
    x_star, f_star = quadratic_optimum(f0, atoms)
    opt = _mean_optimum(problem)
    if opt is None or abs(f_star - opt) > 1e-9 * (1.0 + abs(opt)):
        return None
    coord_analytic = _is_full_coordinate_set(atoms)
    nu_used = problem.nu if method == "accel_mp" else problem.nu_prime
    consts = ConstantsReport(
        l2=problem.l2, l_atomic=l_a, mu_lower=0.0,
        delta_hat_sq=1.0 / atoms.dim if coord_analytic else float("nan"),
        mdw=float("nan"), nu=nu_used, nu_prime=nu_used,
    )
    if method in ("mp", "affine_mp", "steepest_cd"):
        radius = trace_atomic_radius(traces, x_star, atoms)
        return np.array([envelope("sublinear_greedy", consts, t, radius=radius) for t in range(length)])
    if method in ("rp", "random_cd"):
        if not coord_analytic:
            return None
        radius = trace_atomic_radius(traces, x_star, atoms)
        return np.array([envelope("sublinear_random", consts, t, radius=radius) for t in range(length)])
    if method in ("accel_mp", "accel_rp"):
        if not coord_analytic:
            return None
        if nu_used < atoms.span_dim * (1.0 - 1e-12):
            return None  # the run's nu is below the certified value for this case
        kind = "accel_greedy" if method == "accel_mp" else "accel_random"
        metric = compute_metric(atoms, SamplingDistribution.uniform(atoms, half_space=True))
        p_dist_sq = metric.norm_sq(x_star - problem.x0)
        out = np.full(length, float("nan"))
        out[1:] = [envelope(kind, consts, t, p_dist_sq=p_dist_sq) for t in range(1, length)]
        return out
    return None


def run_experiment(cfg):
    """Execute all (method, seed) runs and write traces, aggregate, constants."""
    problem = _setup_problem(cfg)
    report, nu, nu_prime = _build_report(cfg, problem, problem.atom_set)
    problem.nu = nu
    problem.nu_prime = nu_prime

    os.makedirs(cfg.out_dir, exist_ok=True)
    trace_dir = os.path.join(cfg.out_dir, "traces")
    os.makedirs(trace_dir, exist_ok=True)

    keep = cfg.envelopes and cfg.kind == "synthetic"
    jobs = [(problem, method, seed, cfg.iters, keep) for method in cfg.methods for seed in cfg.seeds]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            outcomes = list(pool.map(_worker, jobs))
    else:
        outcomes = [_worker(j) for j in jobs]

    mean_opt = _mean_optimum(problem)
    traces = {}
    failures = []
    trace_paths = []
    for (_, method, seed, _, _), (status, payload) in zip(jobs, outcomes):
        if status == "failed":
            message, trace = payload
            failures.append("%s seed %d: %s" % (method, seed, message))
        else:
            trace = payload
        traces[(method, seed)] = trace
        path = os.path.join(trace_dir, "%s_seed%d.csv" % (method, seed))
        write_traces_csv(trace, path, optimum=mean_opt)
        trace_paths.append(path)

    length = cfg.iters + 1
    agg_lines = []
    header = "iter,method,mean_fval,p10,p90,mean_gap"
    if cfg.envelopes:
        header += ",envelope"
    agg_lines.append(header)
    for method in cfg.methods:
        m_traces = [traces[(method, s)] for s in cfg.seeds]
        stack = np.vstack([_pad_forward(tr.f_values, length) for tr in m_traces])
        mean_f = stack.mean(axis=0)
        p10 = np.percentile(stack, 10, axis=0)
        p90 = np.percentile(stack, 90, axis=0)
        gaps = mean_f - mean_opt if mean_opt is not None else np.full(length, float("nan"))
        env = _envelope_series(cfg, problem, method, m_traces, length) if cfg.envelopes else None
        for t in range(length):
            row = "%d,%s,%s,%s,%s,%s" % (
                t, method, repr(float(mean_f[t])), repr(float(p10[t])),
                repr(float(p90[t])), repr(float(gaps[t])),
            )
            if cfg.envelopes:
                row += "," + (repr(float(env[t])) if env is not None and np.isfinite(env[t]) else "")
            agg_lines.append(row)
    aggregate_path = os.path.join(cfg.out_dir, "aggregate.csv")
    with open(aggregate_path, "w") as fh:
        fh.write("\n".join(agg_lines) + "\n")

    constants_path = os.path.join(cfg.out_dir, "constants.txt")
    with open(constants_path, "w") as fh:
        fh.write(_config_header(cfg, problem))
        fh.write(report.to_text())
    if failures:
        with open(os.path.join(cfg.out_dir, "failures.txt"), "w") as fh:
            fh.write("\n".join(failures) + "\n")
    return ExperimentResult(
        out_dir=cfg.out_dir,
        trace_paths=trace_paths,
        aggregate_path=aggregate_path,
        constants_path=constants_path,
        traces=traces,
        report=report,
        failures=failures,
    )


def _config_header(cfg, problem):
    lines = [
        "# experiment=%s" % cfg.kind,
        "# methods=%s" % ",".join(cfg.methods),
        "# seeds=%s" % ",".join(str(s) for s in cfg.seeds),
        "# iters=%d (500 is the package default)" % cfg.iters,
        "# dim=%d n_atoms=%d span_dim=%d"
        % (problem.atom_set.dim, problem.atom_set.n_atoms, problem.atom_set.span_dim),
        "# objective=0.5*||x-b||^2 averaged across pixels for regression",
        "# atoms normalized to unit l2 length for synthetic dictionaries",
        "# nu_policy=%s" % cfg.nu_policy,
    ]
    return "\n".join(lines) + "\n"
