import math

import numpy as np
import pytest

from lindeberg import (
    ResolventWorkspace,
    fd_agreement_check,
    hs_norm,
    lemma41_bound,
    lemma41_constants,
    resolvent,
    resolvent_partials,
    tanh_clamp_profile,
    trace_bound_check,
    trace_bounds,
)
from lindeberg.resolvent import (
    composed_partials,
    dump_resolvent_csv,
    h_value,
    h_value_hp,
    perturbation_matrix,
    triu_pairs,
)
from lindeberg.spectral import upper_triangle_size


def _random_symmetric(rng, n):
    m = rng.standard_normal((n, n))
    return (m + m.T) / 2.0


class TestResolventWorkspace:
    def test_scalar_case(self):
        g = resolvent(np.array([[0.0]]), 1j)
        assert g[0, 0] == pytest.approx(1j)

    def test_identity_matrix(self):
        g = resolvent(np.eye(3), 2j)
        assert np.allclose(g, np.eye(3) / (1.0 - 2j))

    def test_residual_small(self):
        rng = np.random.default_rng(1)
        ws = ResolventWorkspace(_random_symmetric(rng, 6), 0.5 + 1j)
        assert ws.residual() <= 1e-8

    def test_resolvent_eigenvalue_cap(self):
        rng = np.random.default_rng(2)
        for v in (0.5, 1.0, 3.0):
            ws = ResolventWorkspace(_random_symmetric(rng, 8), 1.0 + v * 1j)
            mags = np.abs(1.0 / (ws.eigenvalues - ws.z))
            assert mags.max() <= 1.0 / v + 1e-12

    def test_squared_resolvent_entries_bounded(self):
        rng = np.random.default_rng(3)
        for v in (0.5, 2.0):
            ws = ResolventWorkspace(_random_symmetric(rng, 7), v * 1j)
            g2 = ws.G @ ws.G
            assert np.max(np.abs(g2)) <= 1.0 / v**2 + 1e-12

    def test_real_z_rejected(self):
        with pytest.raises(ValueError):
            resolvent(np.eye(2), 3.0)

    def test_asymmetric_rejected(self):
        with pytest.raises(ValueError):
            resolvent(np.array([[0.0, 1.0], [0.0, 0.0]]), 1j)

    def test_extended_precision_matches_float_path(self):
        rng = np.random.default_rng(4)
        x = rng.uniform(-2, 2, upper_triangle_size(6))
        hp = complex(h_value_hp(x, 6, 1j))
        assert hp == pytest.approx(h_value(x, 6, 1j), abs=1e-13)


class TestScalarFormulas:
    def test_first_derivative(self):
        # N = 1: h(x) = 1/(x - z), so dh = -1/(x - z)^2
        x = 0.5
        assert resolvent_partials([x], 1, 1j, (0, 0)) == pytest.approx(
            -1.0 / (x - 1j) ** 2)

    def test_second_derivative_two_equal_terms(self):
        x = 0.5
        _, d2 = resolvent_partials([x], 1, 1j, (0, 0), (0, 0))
        assert d2 == pytest.approx(2.0 / (x - 1j) ** 3)

    def test_third_derivative_six_equal_terms(self):
        x = -0.3
        _, _, d3 = resolvent_partials([x], 1, 2j, (0, 0), (0, 0), (0, 0))
        assert d3 == pytest.approx(-6.0 / (x - 2j) ** 4)

    def test_scalar_trace_bound(self):
        for x in (-2.0, 0.0, 1.5):
            val = abs(np.trace(resolvent(np.array([[x]]), 1j) @
                               perturbation_matrix((0, 0), 1) @
                               resolvent(np.array([[x]]), 1j)))
            assert val == pytest.approx(1.0 / (x * x + 1.0), rel=1e-12)
            assert val <= trace_bounds(1.0, 1).t1


class TestHilbertSchmidt:
    def test_identity_norm(self):
        assert hs_norm(np.eye(9)) == pytest.approx(3.0)

    def test_perturbation_norms(self):
        # off-diagonal direction has two entries, diagonal one
        assert hs_norm(perturbation_matrix((0, 2), 5)) == pytest.approx(
            math.sqrt(2.0 / 5.0))
        assert hs_norm(perturbation_matrix((1, 1), 5)) == pytest.approx(
            1.0 / math.sqrt(5.0))

    def test_trace_product_inequality(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            b = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
            c = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
            assert abs(np.trace(b @ c)) <= hs_norm(b) * hs_norm(c) + 1e-10

    def test_unitary_invariance(self):
        rng = np.random.default_rng(6)
        c = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
        q, _ = np.linalg.qr(rng.standard_normal((5, 5)))
        assert hs_norm(q @ c) == pytest.approx(hs_norm(c), abs=1e-10)
        assert hs_norm(c @ q) == pytest.approx(hs_norm(c), abs=1e-10)

    def test_normal_factor_bound(self):
        rng = np.random.default_rng(7)
        b = _random_symmetric(rng, 6)
        c = rng.standard_normal((6, 6))
        top = np.max(np.abs(np.linalg.eigvalsh(b)))
        assert max(hs_norm(b @ c), hs_norm(c @ b)) <= top * hs_norm(c) + 1e-10


class TestDerivativeFormulas:
    def test_mixed_partial_symmetry(self):
        rng = np.random.default_rng(8)
        N = 5
        x = rng.uniform(-2, 2, upper_triangle_size(N))
        pairs = triu_pairs(N)
        a, b = pairs[2], pairs[9]
        _, d_ab = resolvent_partials(x, N, 1j, a, b)
        _, d_ba = resolvent_partials(x, N, 1j, b, a)
        assert abs(d_ab - d_ba) <= 1e-10 * max(abs(d_ab), 1.0)

    def test_finite_difference_agreement(self):
        rng = np.random.default_rng(9)
        agree = fd_agreement_check([2, 3, 4, 5, 6, 7, 8], 12, 1j, rng)
        assert agree.order1 <= 1e-6
        assert agree.order2 <= 1e-6
        assert agree.order3 <= 1e-6

    def test_partials_bounded_by_trace_bounds(self):
        rng = np.random.default_rng(10)
        for _ in range(100):
            N = int(rng.integers(2, 9))
            x = rng.uniform(-2, 2, upper_triangle_size(N))
            pairs = triu_pairs(N)
            picks = [pairs[int(rng.integers(len(pairs)))] for _ in range(3)]
            d1, d2, d3 = resolvent_partials(x, N, 1j, *picks)
            bounds = trace_bounds(1.0, N)
            assert abs(d1) <= bounds.h1 + 1e-14
            assert abs(d2) <= bounds.h2 + 1e-14
            assert abs(d3) <= bounds.h3 + 1e-14

    def test_trace_ratio_check(self):
        rng = np.random.default_rng(11)
        x = rng.uniform(-2, 2, upper_triangle_size(6))
        ratios = trace_bound_check(x, 6, 1j, trials=40, rng=rng)
        assert max(ratios.order1, ratios.order2, ratios.order3) <= 1.0

    def test_invalid_index_pair(self):
        with pytest.raises(ValueError):
            perturbation_matrix((2, 1), 4)


class TestLemma41Constants:
    def test_pure_first_derivative_profile(self):
        c = lemma41_constants(1.0, 0.0, 0.0, 1.0, 4)
        assert c.k1 == 4.0
        assert c.k2 == pytest.approx(6.0 * 2.0**1.5)

    def test_all_zero_bounds(self):
        c = lemma41_constants(0.0, 0.0, 0.0, 2.0, 8)
        assert c.k1 == c.k2 == 0.0
        assert lemma41_bound(1.0, 1.0, 8, c) == 0.0

    def test_recorded_constants_reproduce_bound(self):
        # the bound must collapse exactly to C1/N sqrt(m4) + C2/sqrt(N) m3
        for N in (4, 16, 64):
            c = lemma41_constants(1.0, 0.77, 2.0, 1.0, N)
            m3, m4 = 1.3, 2.4
            direct = lemma41_bound(m3, m4, N, c)
            via_constants = c.c1 * math.sqrt(m4) / N + c.c2 * m3 / math.sqrt(N)
            assert direct == pytest.approx(via_constants, rel=1e-12)

    def test_rate_readback(self):
        g = tanh_clamp_profile(1.0)
        values = {N: lemma41_bound(1.0, 1.0, N, lemma41_constants(g.b1, g.b2, g.b3, 1.0, N))
                  for N in (64, 256)}
        # between Theta(1/N) and Theta(1/sqrt(N)) decay over a factor of 4
        ratio = values[256] / values[64]
        assert 0.25 <= ratio <= 0.5

    def test_invalid_inputs(self):
        with pytest.raises(ValueError):
            lemma41_constants(-1.0, 0.0, 0.0, 1.0, 4)
        with pytest.raises(ValueError):
            lemma41_constants(1.0, 0.0, 0.0, 0.0, 4)
        with pytest.raises(ValueError):
            lemma41_bound(-1.0, 1.0, 4, lemma41_constants(1, 1, 1, 1.0, 4))

    @pytest.mark.parametrize("N", [4, 8])
    def test_measured_mixed_partials_respect_bounds(self, N):
        rng = np.random.default_rng(13)
        g = tanh_clamp_profile(1.0)
        c = lemma41_constants(g.b1, g.b2, g.b3, 1.0, N)
        pairs = triu_pairs(N)
        for _ in range(10):
            x = rng.uniform(-2, 2, len(pairs))
            picks = [pairs[int(rng.integers(len(pairs)))] for _ in range(3)]
            assert abs(composed_partials(g, x, N, 1j, picks[0], picks[1])) <= c.l2p_bound
            assert abs(composed_partials(g, x, N, 1j, *picks)) <= c.l3p_bound


def test_resolvent_csv_dump(tmp_path):
    ws = ResolventWorkspace(np.eye(3), 1j)
    path = tmp_path / "g.csv"
    dump_resolvent_csv(ws.G, path)
    data = np.loadtxt(path, delimiter=",")
    assert data.shape == (3, 6)
    assert data[0, 0] == pytest.approx(ws.G[0, 0].real)
    assert data[0, 1] == pytest.approx(ws.G[0, 0].imag)
