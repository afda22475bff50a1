import math

import numpy as np
import pytest
from scipy.integrate import quad

from lindeberg import (
    EsdFunction,
    MultisetPermutation,
    ResolventWorkspace,
    WignerEnsembleSpec,
    build_wigner,
    eigenvalues,
    gaussian_wigner,
    ks_distance,
    rademacher_perm_wigner,
    rank_inequality_check,
    semicircle_cdf,
    semicircle_density,
    semicircle_reference,
    semicircle_stieltjes,
    stieltjes_esd,
    thm13_experiment,
    wigner_matrix,
)
from lindeberg.sampling import point_mass, IidFromDistribution
from lindeberg.spectral import ENSEMBLES, contaminated_wigner, student_t_perm_wigner, upper_triangle_size


class TestWignerConstruction:
    def test_order_one(self):
        spec = WignerEnsembleSpec(1, MultisetPermutation((4.0,)))
        a, mu, sigma = build_wigner(spec, seed=0)
        assert np.array_equal(a, [[4.0]])
        assert mu == 4.0 and sigma == 0.0

    def test_order_two_entry_map(self):
        a = wigner_matrix([1.0, 2.0, 3.0], 2)
        root2 = math.sqrt(2.0)
        assert np.allclose(a, np.array([[1.0, 2.0], [2.0, 3.0]]) / root2, atol=1e-15)

    def test_wrong_entry_count(self):
        with pytest.raises(ValueError):
            wigner_matrix([1.0, 2.0], 2)

    def test_standardized_entries_have_unit_stats(self):
        spec = rademacher_perm_wigner(20)
        a, mu, sigma = build_wigner(spec, seed=5)
        assert abs(mu) <= 1e-12
        assert sigma == pytest.approx(1.0, abs=1e-12)
        assert np.array_equal(a, a.T)

    def test_ensemble_registry(self):
        for name, builder in ENSEMBLES.items():
            spec = builder(6)
            assert spec.label == name
            assert upper_triangle_size(6) == 21
            build_wigner(spec, seed=1)

    def test_frozen_heavy_tail_multiset(self):
        assert student_t_perm_wigner(8).entries == student_t_perm_wigner(8).entries
        m4 = np.mean(np.square(np.square(contaminated_wigner(14).entries.values)))
        assert m4 > 2.0  # outliers inflate the standardized fourth moment
        assert np.mean(np.square(np.square(
            rademacher_perm_wigner(14).entries.values))) == pytest.approx(1.0, abs=1e-2)


class TestEigenvalues:
    def test_diagonal(self):
        assert np.array_equal(eigenvalues(np.diag([1.0, 2.0, 3.0])).eigenvalues,
                              [1.0, 2.0, 3.0])

    def test_two_by_two_exchange(self):
        assert eigenvalues(np.array([[0.0, 1.0], [1.0, 0.0]])).eigenvalues == pytest.approx([-1.0, 1.0])

    def test_frobenius_identity_random(self):
        rng = np.random.default_rng(10)
        m = rng.standard_normal((50, 50))
        a = (m + m.T) / 2.0
        summary = eigenvalues(a)
        # oracle: sum of squared eigenvalues equals the squared Frobenius norm
        assert np.square(summary.eigenvalues).sum() == pytest.approx(
            np.square(a).sum(), rel=1e-10)
        assert summary.trace_error <= 1e-8 * 50 ** 1.5 * np.abs(a).max()

    def test_asymmetric_rejected(self):
        with pytest.raises(ValueError, match="symmetric"):
            eigenvalues(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_scaling_invariance(self):
        rng = np.random.default_rng(2)
        m = rng.standard_normal((30, 30))
        a = (m + m.T) / 2.0
        base = eigenvalues(a).eigenvalues
        scaled = eigenvalues(2.5 * a).eigenvalues
        assert np.max(np.abs(scaled - 2.5 * base)) <= 1e-8


class TestEsdFunction:
    def test_step_values_with_multiplicity(self):
        esd = EsdFunction([0.0, 0.0, 1.0])
        assert esd(-0.5) == 0.0
        assert esd(0.0) == pytest.approx(2.0 / 3.0)
        assert esd.left_value(0.0) == 0.0
        assert esd(1.0) == 1.0
        assert esd.left_value(1.0) == pytest.approx(2.0 / 3.0)
        assert np.array_equal(esd.jump_points, [0.0, 1.0])


class TestStieltjes:
    def test_single_eigenvalue(self):
        assert stieltjes_esd([1.0], 1j) == pytest.approx(0.5 + 0.5j)

    def test_identity_matrix_form(self):
        z = 0.3 + 0.7j
        assert stieltjes_esd(np.ones(6), z) == pytest.approx(1.0 / (1.0 - z))

    def test_symmetric_pair_is_purely_imaginary(self):
        assert stieltjes_esd([-1.0, 1.0], 1j) == pytest.approx(0.5j)

    def test_sign_and_magnitude_invariants(self):
        rng = np.random.default_rng(4)
        eigs = rng.uniform(-3, 3, 40)
        for z in (1j, -2j, 0.5 + 0.25j, -1.0 - 0.5j):
            m = stieltjes_esd(eigs, z)
            assert m.imag * z.imag > 0
            assert abs(m) <= 1.0 / abs(z.imag) + 1e-15

    def test_real_z_rejected(self):
        with pytest.raises(ValueError):
            stieltjes_esd([0.0], 1.0)


class TestSemicircle:
    def test_density_at_zero(self):
        assert semicircle_density(0.0) == pytest.approx(1.0 / math.pi, rel=1e-15)

    def test_cdf_anchors(self):
        assert semicircle_cdf(-2.0) == 0.0
        assert semicircle_cdf(0.0) == 0.5
        assert semicircle_cdf(2.0) == 1.0
        assert semicircle_cdf(-5.0) == 0.0 and semicircle_cdf(7.0) == 1.0

    def test_cdf_matches_integrated_density(self):
        xs = np.linspace(-2.0, 2.0, 1000)
        worst = max(abs(semicircle_cdf(x) - quad(semicircle_density, -2, x)[0])
                    for x in xs)
        assert worst <= 1e-8

    def test_transform_at_i_is_golden_ratio(self):
        m = semicircle_stieltjes(1j)
        assert m == pytest.approx(1j * (math.sqrt(5.0) - 1.0) / 2.0, abs=1e-14)

    def test_transform_matches_quadrature(self):
        # oracle: numerical integration of density(x)/(x - z)
        for z in (1j, 2j, 1 + 1j, -0.5 - 0.8j):
            re = quad(lambda x: semicircle_density(x) * (x - z.real)
                      / ((x - z.real) ** 2 + z.imag ** 2), -2, 2)[0]
            im = quad(lambda x: semicircle_density(x) * z.imag
                      / ((x - z.real) ** 2 + z.imag ** 2), -2, 2)[0]
            assert semicircle_stieltjes(z) == pytest.approx(re + 1j * im, abs=1e-9)

    def test_dispatcher(self):
        assert semicircle_reference("density", 0.0) == semicircle_density(0.0)
        assert semicircle_reference("cdf", 0.3) == semicircle_cdf(0.3)
        assert semicircle_reference("stieltjes", 2j) == semicircle_stieltjes(2j)
        with pytest.raises(ValueError):
            semicircle_reference("pdf", 0.0)


class TestKsDistance:
    def test_identical_lists(self):
        esd = EsdFunction([0.1, 0.7, 0.7, 2.0])
        assert ks_distance(esd, EsdFunction([0.1, 0.7, 0.7, 2.0])) == 0.0

    def test_disjoint_point_masses(self):
        assert ks_distance(EsdFunction(np.ones(10)), EsdFunction(np.zeros(10))) == 1.0

    def test_two_point_spectrum_against_semicircle(self):
        # oracle: sup over the two jumps; at -1 the step is 1/2 against
        # cdf(-1) = 1/2 - (sqrt(3)/(4 pi) + 1/6), giving sqrt(3)/(4 pi) + 1/6;
        # confirmed by numerical integration of the density
        expected = math.sqrt(3.0) / (4.0 * math.pi) + 1.0 / 6.0
        integral = quad(semicircle_density, -2, -1)[0]
        assert 0.5 - integral == pytest.approx(expected, abs=1e-10)
        ks = ks_distance(EsdFunction([-1.0, 1.0]), semicircle_cdf)
        assert ks == pytest.approx(expected, abs=1e-12)
        assert ks == pytest.approx(0.3044988905221147, abs=1e-12)

    def test_step_vs_step_matches_dense_grid(self):
        rng = np.random.default_rng(31)
        f = EsdFunction(rng.standard_normal(13))
        g = EsdFunction(rng.standard_normal(29))
        grid = np.linspace(-4, 4, 20_001)
        grid_sup = np.max(np.abs(f(grid) - g(grid)))
        exact = ks_distance(f, g)
        assert exact >= grid_sup - 1e-12
        assert exact <= grid_sup + 1.0 / 13.0  # grid can miss a jump by one step

    def test_bounded_by_one(self):
        rng = np.random.default_rng(8)
        f = EsdFunction(rng.standard_normal(17))
        assert 0.0 <= ks_distance(f, semicircle_cdf) <= 1.0


class TestRankInequality:
    def test_equal_matrices(self):
        a = np.diag([1.0, 2.0, 3.0])
        check = rank_inequality_check(a, a)
        assert check.ks == 0.0 and check.rank == 0 and check.ok

    def test_identity_versus_zero(self):
        check = rank_inequality_check(np.eye(10), np.zeros((10, 10)))
        assert check.ks == 1.0 and check.bound == 1.0 and check.ok

    def test_rank_one_perturbation(self):
        rng = np.random.default_rng(12)
        m = rng.standard_normal((10, 10))
        a = (m + m.T) / 2.0
        b = a.copy()
        b[0, 0] += 5.0
        check = rank_inequality_check(a, b)
        assert check.rank == 1
        assert check.ks <= 0.1 + 1e-12
        assert check.ok

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            rank_inequality_check(np.eye(3), np.eye(4))

    def test_random_low_rank_perturbations(self):
        rng = np.random.default_rng(77)
        for k in (1, 2, 5):
            m = rng.standard_normal((20, 20))
            a = (m + m.T) / 2.0
            update = np.zeros_like(a)
            for _ in range(k):
                u = rng.standard_normal(20)
                update += np.outer(u, u) * rng.uniform(0.5, 2.0)
            check = rank_inequality_check(a, a + update)
            assert check.rank == k
            assert check.ok


class TestConvergenceExperiment:
    def test_row_contents(self):
        row = thm13_experiment(rademacher_perm_wigner(30), [1j, 2j], seed=3)
        assert row.N == 30 and row.ensemble == "rademacher-perm"
        assert row.sigma_hat == pytest.approx(1.0, abs=1e-12)
        assert 0.0 <= row.ks <= 1.0
        assert len(row.stieltjes_gaps) == 2

    def test_esd_transform_matches_resolvent_trace(self):
        spec = gaussian_wigner(25)
        a, _, sigma = build_wigner(spec, seed=9)
        scaled = a / sigma
        eigs = eigenvalues(scaled).eigenvalues
        for z in (1j, 1 + 1j):
            via_eigs = stieltjes_esd(eigs, z)
            via_trace = ResolventWorkspace(scaled, z).trace_mean()
            assert via_eigs == pytest.approx(via_trace, abs=1e-8)

    def test_degenerate_entries_rejected(self):
        n = upper_triangle_size(4)
        spec = WignerEnsembleSpec(4, IidFromDistribution(point_mass(1.0), n))
        with pytest.raises(ValueError, match="degenerate"):
            thm13_experiment(spec, [1j], seed=0)

    def test_order_one_sanity(self):
        spec = WignerEnsembleSpec(1, MultisetPermutation((-1.0,)))
        with pytest.raises(ValueError):
            thm13_experiment(spec, [1j], seed=0)  # single value has sigma 0

    def test_gaussian_baseline_ks_shrinks(self):
        ks = {}
        for N in (20, 80):
            rows = [thm13_experiment(gaussian_wigner(N), [1j], seed=s) for s in range(8)]
            ks[N] = float(np.median([r.ks for r in rows]))
        assert ks[80] < ks[20]
