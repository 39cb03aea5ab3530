"""Command-line benchmark harness.

Subcommands: synthetic, regression, constants, check, make-regression-data,
bench. Exit code 0 on success, 1 when any run fails numerically (partial
outputs are kept and listed in failures.txt) or a self-check fails.
"""

import argparse
import sys

import numpy as np

from .experiments import METHODS, NU_POLICIES, ExperimentConfig, make_regression_standin, run_experiment


def _parse_seeds(text):
    """Comma list of ints, each item either a number or an inclusive a-b range."""
    seeds = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        if "-" in item[1:]:  # allow a leading minus sign
            lo, hi = item.rsplit("-", 1)
            lo, hi = int(lo), int(hi)
            if hi < lo:
                raise argparse.ArgumentTypeError("empty seed range %r" % item)
            seeds.extend(range(lo, hi + 1))
        else:
            seeds.append(int(item))
    if not seeds:
        raise argparse.ArgumentTypeError("no seeds in %r" % text)
    return tuple(seeds)


def _parse_methods(text):
    methods = tuple(m.strip() for m in text.split(",") if m.strip())
    for m in methods:
        if m not in METHODS:
            raise argparse.ArgumentTypeError("unknown method %r (known: %s)" % (m, ", ".join(METHODS)))
    if not methods:
        raise argparse.ArgumentTypeError("no methods in %r" % text)
    return methods


def _add_run_args(p, synthetic):
    p.add_argument("--methods", type=_parse_methods, default=_parse_methods("mp,rp,accel_mp,accel_rp"),
                   help="comma list from: %s" % ", ".join(METHODS))
    p.add_argument("--seeds", type=_parse_seeds, default=(0, 1, 2, 3, 4),
                   help="comma list of ints; a-b ranges allowed (e.g. 0-19)")
    p.add_argument("--iters", type=int, default=500)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    p.add_argument("--nu-policy", choices=NU_POLICIES, default="default")
    p.add_argument("--nu", type=float, default=None, help="value for --nu-policy explicit")
    if synthetic:
        p.add_argument("--dim", type=int, default=100)
        p.add_argument("--atoms", type=int, default=200,
                       help="gaussian directions drawn; symmetrization doubles the count")
        p.add_argument("--dictionary", choices=("random", "coordinates"), default="random")
        p.add_argument("--problem-seed", type=int, default=0)
        p.add_argument("--envelopes", action="store_true",
                       help="add certified envelope columns to aggregate.csv where available")
    else:
        p.add_argument("--pixels", required=True, help="CSV matrix, one pixel per row")
        p.add_argument("--dict", dest="dict_path", required=True, help="dictionary CSV")


def _cmd_synthetic(args):
    cfg = ExperimentConfig(
        kind="synthetic", methods=args.methods, seeds=args.seeds, iters=args.iters,
        out_dir=args.out, dim=args.dim, n_atoms=args.atoms, dictionary=args.dictionary,
        problem_seed=args.problem_seed, nu_policy=args.nu_policy, nu_value=args.nu,
        envelopes=args.envelopes, jobs=args.jobs,
    )
    return _finish(run_experiment(cfg))


def _cmd_regression(args):
    cfg = ExperimentConfig(
        kind="regression", methods=args.methods, seeds=args.seeds, iters=args.iters,
        out_dir=args.out, pixels_path=args.pixels, dict_path=args.dict_path,
        nu_policy=args.nu_policy, nu_value=args.nu, jobs=args.jobs,
    )
    return _finish(run_experiment(cfg))


def _finish(result):
    print("wrote %d trace files, %s, %s" % (len(result.trace_paths), result.aggregate_path, result.constants_path))
    if result.failures:
        print("%d run(s) failed numerically; see failures.txt" % len(result.failures), file=sys.stderr)
        return 1
    return 0


def _cmd_constants(args):
    from .accel import compute_metric, estimate_nu
    from .analysis import ConstantsReport, _is_full_coordinate_set, compute_delta_hat_sq, compute_mdw
    from .atoms import SamplingDistribution, load_dictionary
    from .objectives import SquaredDistance, compute_L_atomic, compute_mu_atomic_lower

    atoms = load_dictionary(args.dict_path)
    if not atoms.symmetric:
        from .atoms import AtomSet

        atoms = AtomSet.symmetrize(atoms.atoms)
    dist = (SamplingDistribution.uniform(atoms, half_space=True)
            if args.dist == "half_space" else SamplingDistribution.uniform(atoms))
    f = SquaredDistance(np.zeros(atoms.dim))  # H = I reference objective
    rng = np.random.default_rng(args.seed)
    coord = _is_full_coordinate_set(atoms)
    provenance = {
        "l2": "exact", "l_atomic": "exact", "mu_lower": "certified_bound",
        "delta_hat_sq": "analytic" if coord else "sampled",
        "mdw": "analytic" if coord else "sampled",
    }
    if args.nu_policy == "estimated":
        half = SamplingDistribution.uniform(atoms, half_space=True)
        est = estimate_nu(atoms, half, compute_metric(atoms, half), n_probe=args.probes, rng=rng)
        nu, nu_prime = est.nu, est.nu_prime
        provenance["nu"] = provenance["nu_prime"] = est.method
    else:
        nu, nu_prime = 1.0, float(atoms.span_dim)
        provenance["nu"] = provenance["nu_prime"] = "default"
    report = ConstantsReport(
        l2=1.0,
        l_atomic=compute_L_atomic(f, atoms),
        mu_lower=compute_mu_atomic_lower(f, atoms),
        delta_hat_sq=compute_delta_hat_sq(atoms, dist, n_probe=args.probes, rng=rng),
        mdw=compute_mdw(atoms, n_probe=args.probes, rng=rng),
        nu=nu,
        nu_prime=nu_prime,
        provenance=provenance,
    )
    text = "# constants for f(x) = 0.5*||x - b||^2 (unit Hessian) over %d atoms, dim %d\n" % (
        atoms.n_atoms, atoms.dim
    )
    text += report.to_text()
    print(text, end="")
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    return 0


def _cmd_make_regression_data(args):
    pixels_path, dict_path = make_regression_standin(
        args.out, n_pixels=args.pixels, dim=args.dim, n_materials=args.materials, seed=args.seed
    )
    print("wrote %s and %s" % (pixels_path, dict_path))
    return 0


def _cmd_bench(args):
    from .bench import run_benchmark
    from ._kernels import BACKEND, available_backends

    print("active backend: %s (available: %s)" % (BACKEND, ", ".join(available_backends())))
    print(run_benchmark(dim=args.dim, n_atoms=args.atoms, iters=args.iters, repeats=args.repeats))
    return 0


def _cmd_check(args):
    failures = 0
    for name, fn in _SELF_CHECKS:
        try:
            fn()
            print("ok - %s" % name)
        except Exception as exc:
            failures += 1
            print("FAIL - %s: %s" % (name, exc))
    if failures:
        print("%d check(s) failed" % failures, file=sys.stderr)
        return 1
    print("all %d checks passed" % len(_SELF_CHECKS))
    return 0


def _check_gradients():
    from .objectives import LeastSquares, check_gradient

    rng = np.random.default_rng(0)
    for _ in range(10):
        f = LeastSquares(rng.standard_normal((8, 6)), rng.standard_normal(8))
        err = check_gradient(f, rng.standard_normal(6))
        assert err <= 1e-5, "gradient error %.3e" % err


def _check_lmo():
    from .atoms import AtomSet, lmo_exact

    rng = np.random.default_rng(1)
    for _ in range(50):
        aset = AtomSet.symmetrize(rng.standard_normal((7, 5)))
        q = rng.standard_normal(5)
        res = lmo_exact(q, aset)
        scores = aset.atoms @ q
        assert res.atom_index == int(np.argmin(scores))


def _check_atomic_norm_l1():
    from .atoms import AtomSet, atomic_norm

    rng = np.random.default_rng(2)
    aset = AtomSet.coordinates(6)
    for _ in range(20):
        x = rng.standard_normal(6)
        assert abs(atomic_norm(x, aset) - np.abs(x).sum()) <= 1e-9


def _check_coordinate_constants():
    from .accel import compute_metric, estimate_nu
    from .analysis import compute_delta_hat_sq, compute_mdw
    from .atoms import AtomSet, SamplingDistribution

    n = 5
    aset = AtomSet.coordinates(n)
    dist = SamplingDistribution.uniform(aset)
    assert abs(compute_delta_hat_sq(aset, dist, n_probe=10) - 1.0 / n) <= 1e-15
    assert abs(compute_mdw(aset, n_probe=10) - 1.0 / np.sqrt(n)) <= 1e-15
    metric = compute_metric(aset, dist)
    assert np.allclose(metric.inverse, n * np.eye(n), atol=1e-10)
    est = estimate_nu(aset, dist, metric, n_probe=50)
    assert abs(est.nu_prime - n) <= 1e-9


def _check_descent_and_determinism():
    from .experiments import gen_synthetic
    from .objectives import compute_L_atomic
    from .solvers import AtomicSmoothness, ExactOracle, SolverConfig, run_pursuit

    f, aset, x0 = gen_synthetic(8, 16, seed=3)
    cfg = SolverConfig(40, ExactOracle(), AtomicSmoothness(compute_L_atomic(f, aset)), seed=0)
    tr1 = run_pursuit(f, aset, cfg, x0)
    tr2 = run_pursuit(f, aset, cfg, x0)
    assert np.all(np.diff(tr1.f_values) <= 1e-12), "objective increased"
    assert np.array_equal(tr1.f_values, tr2.f_values), "nondeterministic run"


def _check_affine_invariance():
    from .analysis import affine_invariance_check
    from .experiments import gen_synthetic

    f, aset, _ = gen_synthetic(6, 12, seed=4)
    rng = np.random.default_rng(5)
    m_mat = np.eye(6) + 0.2 * rng.standard_normal((6, 6))
    disc = affine_invariance_check(f, aset, m_mat, 20, variant="atomic")
    assert disc <= 1e-9, "atomic-norm variant discrepancy %.3e" % disc


def _check_envelope_values():
    from .analysis import ConstantsReport, envelope

    c = ConstantsReport(l2=1.0, l_atomic=1.0, mu_lower=0.1, delta_hat_sq=0.5,
                        mdw=0.5, nu=1.0, nu_prime=1.0)
    assert abs(envelope("sublinear_greedy", c, 0, radius=1.0) - 1.0) <= 1e-15
    assert abs(envelope("linear", c, 10, eps0=1.0) - 0.9**10) <= 1e-15
    assert abs(envelope("accel_greedy", c, 1, p_dist_sq=1.0) - 1.0) <= 1e-15


_SELF_CHECKS = (
    ("gradient finite differences", _check_gradients),
    ("lmo matches exhaustive scan", _check_lmo),
    ("atomic norm equals l1 on coordinates", _check_atomic_norm_l1),
    ("coordinate-case constants", _check_coordinate_constants),
    ("descent and determinism", _check_descent_and_determinism),
    ("affine invariance", _check_affine_invariance),
    ("envelope arithmetic", _check_envelope_values),
)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="atompursuit",
        description="Greedy and randomized pursuit benchmark harness",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synthetic", help="random dictionary experiment")
    _add_run_args(p, synthetic=True)
    p.set_defaults(fn=_cmd_synthetic)

    p = sub.add_parser("regression", help="per-pixel least-squares experiment")
    _add_run_args(p, synthetic=False)
    p.set_defaults(fn=_cmd_regression)

    p = sub.add_parser("constants", help="print a constants report for a dictionary file")
    p.add_argument("--dict", dest="dict_path", required=True)
    p.add_argument("--dist", choices=("uniform", "half_space"), default="uniform")
    p.add_argument("--nu-policy", choices=("default", "estimated"), default="default")
    p.add_argument("--probes", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="also write the report to this file")
    p.set_defaults(fn=_cmd_constants)

    p = sub.add_parser("check", help="run the quick invariant suite")
    p.set_defaults(fn=_cmd_check)

    p = sub.add_parser("make-regression-data", help="generate a stand-in regression dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--pixels", type=int, default=64)
    p.add_argument("--dim", type=int, default=16)
    p.add_argument("--materials", type=int, default=6)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=_cmd_make_regression_data)

    p = sub.add_parser("bench", help="compare compiled and python kernel backends")
    p.add_argument("--dim", type=int, default=100)
    p.add_argument("--atoms", type=int, default=400)
    p.add_argument("--iters", type=int, default=200)
    p.add_argument("--repeats", type=int, default=3)
    p.set_defaults(fn=_cmd_bench)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, OSError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
