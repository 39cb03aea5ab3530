"""Timing comparison between the compiled kernels and the numpy fallback.

Covers the two hot kernels in isolation (LMO scan, simplex pivot loop) and an
end-to-end solver run under each backend. Backends compute identical results;
scan outputs may differ in the last floating-point ulp, pivot sequences are
bit-identical by construction.
"""

import time
from contextlib import contextmanager
from dataclasses import dataclass

import numpy as np

from ._kernels import available_backends, get_backend


@dataclass(frozen=True)
class BenchResult:
    name: str
    backend: str
    seconds: float
    n_ops: int

    @property
    def per_op_us(self):
        return 1e6 * self.seconds / self.n_ops


@contextmanager
def use_backend(name):
    """Temporarily rebind the kernel functions everywhere they are imported."""
    from . import atoms as atoms_mod
    from . import simplexlp as lp_mod

    impl = get_backend(name)
    saved = (atoms_mod.scan_min, atoms_mod.scan_min_subset, lp_mod.simplex_pivot_loop)
    atoms_mod.scan_min = impl.scan_min
    atoms_mod.scan_min_subset = impl.scan_min_subset
    lp_mod.simplex_pivot_loop = impl.simplex_pivot_loop
    try:
        yield
    finally:
        atoms_mod.scan_min, atoms_mod.scan_min_subset = saved[0], saved[1]
        lp_mod.simplex_pivot_loop = saved[2]


def _best_of(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def benchmark_kernels(dim=100, n_atoms=400, n_queries=200, repeats=3, seed=0):
    """Time scan_min and the pivot loop on identical inputs per backend."""
    rng = np.random.default_rng(seed)
    atoms = np.ascontiguousarray(rng.standard_normal((n_atoms, dim)))
    queries = rng.standard_normal((n_queries, dim))
    results = []
    for backend in available_backends():
        impl = get_backend(backend)

        def scan_all(impl=impl):
            for q in queries:
                impl.scan_min(atoms, np.ascontiguousarray(q))

        results.append(BenchResult("lmo_scan", backend, _best_of(scan_all, repeats), n_queries))

    # Pivot loop measured through atomic-norm LP solves (identical pivots per backend)
    from .atoms import AtomSet, atomic_norm

    lp_dim = min(dim, 40)
    aset = AtomSet.symmetrize(rng.standard_normal((max(lp_dim, 2), lp_dim)))
    n_lp = 20
    points = [
        aset.atoms.T @ rng.dirichlet(np.ones(aset.n_atoms)) * rng.uniform(0.5, 2.0)
        for _ in range(n_lp)
    ]
    for backend in available_backends():
        with use_backend(backend):

            def solve_all():
                for x in points:
                    atomic_norm(x, aset)

            sec = _best_of(solve_all, repeats)
        results.append(BenchResult("atomic_norm_lp", backend, sec, n_lp))
    return results


def benchmark_end_to_end(dim=60, n_atoms=120, iters=200, repeats=3, seed=0):
    """Full greedy pursuit run under each backend."""
    from .experiments import gen_synthetic
    from .solvers import AtomicSmoothness, ExactOracle, SolverConfig, run_pursuit
    from .objectives import compute_L_atomic

    objective, aset, x0 = gen_synthetic(dim, n_atoms, seed=seed)
    l_a = compute_L_atomic(objective, aset)
    cfg = SolverConfig(iters, ExactOracle(), AtomicSmoothness(l_a), seed=0)
    results = []
    for backend in available_backends():
        with use_backend(backend):
            sec = _best_of(lambda: run_pursuit(objective, aset, cfg, x0), repeats)
        results.append(BenchResult("pursuit_run", backend, sec, iters))
    return results


def format_table(results):
    """Aligned text table with a python/compiled speedup line per kernel."""
    lines = ["%-16s %-10s %12s %12s" % ("benchmark", "backend", "seconds", "us/op")]
    by_name = {}
    for r in results:
        lines.append("%-16s %-10s %12.6f %12.2f" % (r.name, r.backend, r.seconds, r.per_op_us))
        by_name.setdefault(r.name, {})[r.backend] = r.seconds
    for name, times in by_name.items():
        if "compiled" in times and "python" in times and times["compiled"] > 0:
            lines.append("%-16s speedup (python/compiled): %.2fx" % (name, times["python"] / times["compiled"]))
    return "\n".join(lines)


def run_benchmark(dim=100, n_atoms=400, iters=200, repeats=3, seed=0):
    results = benchmark_kernels(dim=dim, n_atoms=n_atoms, repeats=repeats, seed=seed)
    results += benchmark_end_to_end(
        dim=min(dim, 60), n_atoms=min(n_atoms, 120), iters=iters, repeats=repeats, seed=seed
    )
    return format_table(results)
