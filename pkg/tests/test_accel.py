"""Accelerated pursuit: weight recursion, metric, model identities, rates."""

import numpy as np
import pytest

from atompursuit import (
    AtomSet,
    ExactOracle,
    L2Smoothness,
    SamplingDistribution,
    SolverConfig,
    SquaredDistance,
    UnsupportedDistributionError,
    compute_metric,
    estimate_nu,
    model_psi_value,
    quadratic_optimum,
    run_accel_mp,
    run_accel_rp,
    solve_alpha,
)
from conftest import random_spd_quadratic, random_symmetric_atoms


def _cfg(iters, seed=0):
    return SolverConfig(iters, ExactOracle(), L2Smoothness(1.0), seed=seed)


class TestSolveAlpha:
    def test_root_of_coupling_equation(self):
        for beta in (0.0, 0.3, 2.0, 50.0):
            for ln in (0.5, 1.0, 7.0):
                a = solve_alpha(beta, ln, 1.0)
                assert ln * a**2 - a - beta == pytest.approx(0.0, abs=1e-10)
                assert a > 0

    def test_first_alpha_inverse_lnu(self):
        assert solve_alpha(0.0, 2.0, 3.0) == pytest.approx(1.0 / 6.0)

    def test_monotone_in_beta(self):
        vals = [solve_alpha(b, 1.0, 1.0) for b in (0.0, 1.0, 5.0, 20.0)]
        assert vals == sorted(vals)

    def test_validation(self):
        with pytest.raises(ValueError):
            solve_alpha(-1.0, 1.0, 1.0)
        with pytest.raises(ValueError):
            solve_alpha(0.0, 0.0, 1.0)
        with pytest.raises(ValueError):
            solve_alpha(0.0, 1.0, -2.0)


class TestMetric:
    def test_uniform_coordinates_metric(self):
        n = 5
        aset = AtomSet.coordinates(n)
        metric = compute_metric(aset, SamplingDistribution.uniform(aset))
        assert np.allclose(metric.second_moment, np.eye(n) / n, atol=1e-14)
        assert np.allclose(metric.inverse, n * np.eye(n), atol=1e-10)
        assert metric.rank == n

    def test_half_space_equals_full_uniform(self):
        # z z^T is sign invariant, so dedup to half the atoms changes nothing
        aset = random_symmetric_atoms(4, 6, seed=0)
        m_full = compute_metric(aset, SamplingDistribution.uniform(aset))
        m_half = compute_metric(aset, SamplingDistribution.uniform(aset, half_space=True))
        assert np.allclose(m_full.second_moment, m_half.second_moment, atol=1e-14)
        assert np.allclose(m_full.inverse, m_half.inverse, atol=1e-10)

    def test_second_moment_matches_direct_average(self):
        aset = random_symmetric_atoms(3, 5, seed=1)
        w = np.random.default_rng(2).dirichlet(np.ones(aset.n_atoms))
        dist = SamplingDistribution(w)
        metric = compute_metric(aset, dist)
        direct = sum(wi * np.outer(a, a) for wi, a in zip(w, aset.atoms))
        assert np.allclose(metric.second_moment, direct, atol=1e-14)

    def test_pseudo_inverse_identity_on_range(self):
        aset = random_symmetric_atoms(5, 3, seed=3)  # rank-3 span in R^5
        metric = compute_metric(aset, SamplingDistribution.uniform(aset))
        pt, p = metric.second_moment, metric.inverse
        assert np.allclose(p @ pt @ p, p, atol=1e-9)
        assert np.allclose(pt @ p @ pt, pt, atol=1e-12)

    def test_uncovered_span_direction_rejected(self):
        aset = AtomSet.coordinates(3)
        w = np.zeros(6)
        w[[0, 3]] = 0.5  # mass only on +-e_1
        with pytest.raises(UnsupportedDistributionError):
            compute_metric(aset, SamplingDistribution(w))

    def test_norm_sq(self):
        aset = AtomSet.coordinates(4)
        metric = compute_metric(aset, SamplingDistribution.uniform(aset))
        v = np.array([1.0, 2.0, 0.0, -1.0])
        assert metric.norm_sq(v) == pytest.approx(4.0 * float(v @ v), rel=1e-12)


class TestAccelRuns:
    def test_deterministic_per_seed(self):
        f, aset = _coordinate_problem(6, seed=0)
        dist = SamplingDistribution.uniform(aset)
        out = []
        for _ in range(2):
            tr, _ = run_accel_rp(f, aset, dist, 1.0, float(aset.dim), _cfg(40, seed=5), np.zeros(6))
            out.append(tr.f_values)
        assert np.array_equal(out[0], out[1])

    def test_alpha_growth_and_beta_sum(self):
        f, aset = _coordinate_problem(5, seed=1)
        dist = SamplingDistribution.uniform(aset)
        nu = float(aset.dim)
        tr, diag = run_accel_mp(f, aset, dist, 1.0, nu, _cfg(60), np.zeros(5))
        alphas, betas = diag.alphas[1:], diag.betas[1:]
        assert np.all(np.diff(alphas) > 0)
        assert np.allclose(np.cumsum(alphas), betas, rtol=1e-12)
        t = np.arange(1, alphas.size + 1)
        assert np.all(alphas >= t / (2.0 * nu) * (1 - 1e-12))

    def test_point_pair_greedy_equals_random(self):
        # single +-a dictionary: both variants move along +-a with the same
        # sign-invariant step, so the trajectories coincide exactly
        a = np.array([1.0, 2.0, -1.0])
        a /= np.linalg.norm(a)
        aset = AtomSet.symmetrize(a[None, :])
        f = SquaredDistance(0.7 * a)
        dist = SamplingDistribution.uniform(aset, half_space=True)
        tr_mp, _ = run_accel_mp(f, aset, dist, 1.0, 1.0, _cfg(30, seed=3), np.zeros(3))
        tr_rp, _ = run_accel_rp(f, aset, dist, 1.0, 1.0, _cfg(30, seed=3), np.zeros(3))
        assert np.allclose(tr_mp.f_values, tr_rp.f_values, atol=1e-14)

    def test_progress_bound_every_iteration(self):
        # the x-step decreases f(y) by at least score^2 / (2 L ||z||^2)
        f, aset = _coordinate_problem(6, seed=2)
        dist = SamplingDistribution.uniform(aset)
        for greedy, runner in ((True, run_accel_mp), (False, run_accel_rp)):
            tr, diag = runner(f, aset, dist, 1.0, float(aset.dim), _cfg(50, seed=7), np.zeros(6))
            for t in range(1, len(tr)):
                promised = diag.x_scores[t] ** 2 / (2.0 * diag.x_atom_norm_sq[t])
                assert tr.f_values[t] <= diag.f_y[t] - promised + 1e-10

    def test_lipschitz_below_curvature_rejected(self):
        f = random_spd_quadratic(4, seed=3, cond=10.0)  # lambda_max = 10
        aset = random_symmetric_atoms(4, 8, seed=4)
        dist = SamplingDistribution.uniform(aset)
        with pytest.raises(ValueError, match="curvature"):
            run_accel_mp(f, aset, dist, 1.0, 1.0, _cfg(5), np.zeros(4))

    def test_x0_outside_span_rejected(self):
        aset = AtomSet.symmetrize(np.array([[1.0, 0.0]]))
        f = SquaredDistance(np.zeros(2))
        dist = SamplingDistribution.uniform(aset)
        with pytest.raises(ValueError, match="span"):
            run_accel_mp(f, aset, dist, 1.0, 1.0, _cfg(5), np.array([0.0, 1.0]))

    def test_mean_gap_beats_plain_random_pursuit(self):
        # qualitative acceleration: averaged over seeds, the accelerated run
        # reaches a lower objective than plain random pursuit.  The problem
        # must couple coordinates: on a separable quadratic every coordinate
        # step is exact and plain pursuit hits the optimum in finitely many
        # hits, leaving nothing to beat.
        from atompursuit import AtomicSmoothness, RandomOracle, compute_L_atomic, run_pursuit

        n = 12
        f = random_spd_quadratic(n, seed=5, cond=25.0)
        aset = AtomSet.coordinates(n)
        dist = SamplingDistribution.uniform(aset)
        l_atomic = compute_L_atomic(f, aset)
        _, f_star = quadratic_optimum(f, aset)
        accel_final, plain_final = [], []
        for seed in range(30):
            cfg_a = SolverConfig(300, ExactOracle(), L2Smoothness(25.0), seed=seed)
            tr_a, _ = run_accel_rp(f, aset, dist, 25.0, float(n), cfg_a, np.zeros(n))
            cfg_p = SolverConfig(300, RandomOracle(dist), AtomicSmoothness(l_atomic), seed=seed)
            tr_p = run_pursuit(f, aset, cfg_p, np.zeros(n))
            accel_final.append(tr_a.f_values[-1] - f_star)
            plain_final.append(tr_p.f_values[-1] - f_star)
        assert np.mean(accel_final) < 0.5 * np.mean(plain_final)


def _coordinate_problem(n, seed):
    rng = np.random.default_rng(seed)
    return SquaredDistance(rng.standard_normal(n)), AtomSet.coordinates(n)


class TestPsiDiagnostics:
    def _run(self, n=6, iters=40, seed=0, greedy=True):
        f, aset = _coordinate_problem(n, seed=seed)
        dist = SamplingDistribution.uniform(aset)
        runner = run_accel_mp if greedy else run_accel_rp
        tr, diag = runner(
            f, aset, dist, 1.0, float(n), _cfg(iters, seed=seed), np.zeros(n),
            psi_diagnostics=True,
        )
        return f, aset, dist, tr, diag

    def test_incremental_psi_matches_model_replay(self):
        f, aset, dist, tr, diag = self._run()
        metric = compute_metric(aset, dist)
        x0 = np.zeros(f.dim)
        replay_star = model_psi_value(diag.history, metric, diag.x_star, x0, f)
        assert diag.psi_at_optimum[-1] == pytest.approx(replay_star, rel=1e-10, abs=1e-10)
        # reconstruct v_T from the history and replay the model minimum
        v = x0.copy()
        for entry in diag.history:
            s = float(f.gradient(entry.y) @ entry.z_tilde)
            v = v - entry.alpha * s * entry.z_tilde
        replay_min = model_psi_value(diag.history, metric, v, x0, f)
        assert diag.psi_minimum[-1] == pytest.approx(replay_min, rel=1e-10, abs=1e-10)

    def test_psi_gradient_residual_small(self):
        _, _, _, _, diag = self._run()
        assert float(np.max(diag.psi_grad_residual)) <= 1e-8

    def test_v_minimizes_psi_against_perturbations(self):
        f, aset, dist, tr, diag = self._run()
        metric = compute_metric(aset, dist)
        x0 = np.zeros(f.dim)
        v = x0.copy()
        for entry in diag.history:
            s = float(f.gradient(entry.y) @ entry.z_tilde)
            v = v - entry.alpha * s * entry.z_tilde
        base = model_psi_value(diag.history, metric, v, x0, f)
        rng = np.random.default_rng(1)
        for _ in range(20):
            pert = rng.standard_normal(f.dim)
            assert model_psi_value(diag.history, metric, v + 0.1 * pert, x0, f) >= base - 1e-10

    def test_psi_min_at_most_psi_at_any_reference(self):
        _, _, _, _, diag = self._run()
        assert np.all(diag.psi_minimum <= diag.psi_at_optimum + 1e-10)

    def test_expectation_bounds_loose(self):
        # E[psi_t(x*)] <= psi_0(x*) + beta_t f(x*) and E[min psi_t] >= beta_t E[f(x_t)]
        n, iters, seeds = 6, 40, 60
        f, aset = _coordinate_problem(n, seed=9)
        dist = SamplingDistribution.uniform(aset)
        metric = compute_metric(aset, dist)
        x_star, f_star = quadratic_optimum(f, aset)
        psi0_star = 0.5 * metric.norm_sq(x_star)
        stars, mins, fvals = [], [], []
        for seed in range(seeds):
            tr, diag = run_accel_rp(
                f, aset, dist, 1.0, float(n), _cfg(iters, seed=seed), np.zeros(n),
                psi_diagnostics=True,
            )
            stars.append(diag.psi_at_optimum)
            mins.append(diag.psi_minimum)
            fvals.append(tr.f_values)
            beta = diag.betas
        mean_star = np.mean(stars, axis=0)
        mean_min = np.mean(mins, axis=0)
        mean_f = np.mean(fvals, axis=0)
        t = iters
        assert mean_star[t] <= (psi0_star + beta[t] * f_star) * 1.1 + 1e-9
        assert mean_min[t] >= beta[t] * mean_f[t] * 0.9 - 1e-9

    def test_trace_carries_psi_columns(self, tmp_path):
        from atompursuit import read_traces_csv, write_traces_csv

        _, _, _, tr, _ = self._run(iters=10)
        assert tr.psi_at_reference is not None
        path = tmp_path / "psi.csv"
        write_traces_csv(tr, path, optimum=0.0)
        header = path.read_text().splitlines()[0]
        assert header.endswith(",psi_star,psi_min")
        back = read_traces_csv(path)[0]
        assert np.array_equal(back.psi_at_reference, tr.psi_at_reference)
        assert np.array_equal(back.psi_minimum, tr.psi_minimum)


class TestNuEstimate:
    def test_coordinates_analytic(self):
        n = 7
        aset = AtomSet.coordinates(n)
        dist = SamplingDistribution.uniform(aset)
        metric = compute_metric(aset, dist)
        est = estimate_nu(aset, dist, metric, n_probe=100, rng=np.random.default_rng(0))
        assert est.method == "analytic_coordinates"
        assert est.nu_prime == float(n)
        assert 1.0 <= est.nu <= float(n)

    def test_single_unit_pair_is_one(self):
        a = np.array([0.6, 0.8])
        aset = AtomSet.symmetrize(a[None, :])
        dist = SamplingDistribution.uniform(aset)
        metric = compute_metric(aset, dist)
        est = estimate_nu(aset, dist, metric, n_probe=50, rng=np.random.default_rng(1))
        assert est.nu == pytest.approx(1.0, rel=1e-9)
        assert est.nu_prime == pytest.approx(1.0, rel=1e-9)

    def test_monotone_in_probes(self):
        aset = random_symmetric_atoms(4, 7, seed=2)
        dist = SamplingDistribution.uniform(aset)
        metric = compute_metric(aset, dist)
        vals = [
            estimate_nu(aset, dist, metric, n_probe=n, rng=np.random.default_rng(3)).nu
            for n in (10, 100, 500)
        ]
        assert vals[0] <= vals[1] <= vals[2]

    def test_nu_at_most_nu_prime_times_span_dim_bound(self):
        # nu' <= nu <= ... no universal order; but both are positive and finite
        aset = random_symmetric_atoms(3, 6, seed=4)
        dist = SamplingDistribution.uniform(aset)
        est = estimate_nu(aset, dist, compute_metric(aset, dist), n_probe=200, rng=np.random.default_rng(5))
        assert est.nu > 0 and np.isfinite(est.nu)
        assert est.nu_prime > 0 and np.isfinite(est.nu_prime)
        # greedy scores dominate sampled ones, so nu <= nu'
        assert est.nu <= est.nu_prime + 1e-12


class TestRateEnvelope:
    def test_mean_gap_within_accel_envelope_on_coordinates(self):
        n, iters, seeds = 8, 120, 80
        f, aset = _coordinate_problem(n, seed=11)
        dist = SamplingDistribution.uniform(aset)
        metric = compute_metric(aset, dist)
        x_star, f_star = quadratic_optimum(f, aset)
        p_dist_sq = metric.norm_sq(x_star)
        gaps = []
        for seed in range(seeds):
            tr, _ = run_accel_rp(f, aset, dist, 1.0, float(n), _cfg(iters, seed=seed), np.zeros(n))
            gaps.append(tr.f_values - f_star)
        mean_gap = np.mean(gaps, axis=0)
        for t in (10, 60, 120):
            bound = 2.0 * float(n) * p_dist_sq / (t * (t + 1.0))
            assert mean_gap[t] <= bound * 1.1
