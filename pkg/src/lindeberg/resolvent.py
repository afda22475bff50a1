"""Resolvent calculus for the normalized trace of (A(x) - zI)^{-1}.

For the symmetric matrix map A(x) built from an upper-triangle vector, the
map h(x) = Tr(G(x))/N with G = (A - zI)^{-1} has explicit trace formulas
for its partial derivatives.  This module evaluates them, bounds them
through Hilbert-Schmidt norm estimates, and assembles the constants that
turn those bounds into the summarization bound for spectral statistics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import permutations as _permutations

import numpy as np
from scipy.linalg import eigh

from .functions import GProfile, finite_difference
from .spectral import upper_triangle_size, wigner_matrix


def _check_z(z: complex) -> complex:
    z = complex(z)
    if z.imag == 0:
        raise ValueError("z must have a nonzero imaginary part")
    return z


class ResolventWorkspace:
    """Eigendecomposition-backed resolvent of a symmetric matrix.

    One real symmetric eigensolve serves every z: G(z) is assembled as
    Q diag(1/(lambda - z)) Q^T, so no complex linear solves are needed and
    each eigenvalue of G has magnitude at most 1/|Im z|.
    """

    def __init__(self, matrix, z: complex):
        a = np.asarray(matrix, dtype=float)
        if np.max(np.abs(a - a.T), initial=0.0) > 1e-12:
            raise ValueError("matrix must be symmetric")
        self.matrix = a
        self.z = _check_z(z)
        self.eigenvalues, self.vectors = eigh(a)
        self.G = self.resolvent_at(self.z)

    def resolvent_at(self, z: complex) -> np.ndarray:
        z = _check_z(z)
        scaled = self.vectors / (self.eigenvalues - z)
        return scaled @ self.vectors.T

    def residual(self) -> float:
        """max |(G (A - zI) - I)_ij|, relative to 1/|Im z|."""
        n = self.matrix.shape[0]
        r = self.G @ (self.matrix - self.z * np.eye(n)) - np.eye(n)
        return float(np.max(np.abs(r))) * abs(self.z.imag)

    def trace_mean(self) -> complex:
        return complex(np.trace(self.G)) / self.matrix.shape[0]


def resolvent(matrix, z: complex) -> np.ndarray:
    """(A - zI)^{-1} for symmetric A and z off the real axis."""
    return ResolventWorkspace(matrix, z).G


def h_value(x, N: int, z: complex) -> complex:
    """Tr((A(x) - zI)^{-1}) / N."""
    return ResolventWorkspace(wigner_matrix(x, N), z).trace_mean()


def h_value_hp(x, N: int, z: complex):
    """Tr((A(x) - zI)^{-1}) / N in extended precision.

    Partial-pivot Gaussian elimination on clongdouble keeps the evaluation
    noise near 1e-19, which third-order finite differences need; the
    eigendecomposition path bottoms out around 1e-14 and would dominate the
    difference quotients.
    """
    x = np.asarray(x, dtype=np.longdouble)
    a = np.zeros((N, N), dtype=np.clongdouble)
    iu = np.triu_indices(N)
    a[iu] = x / np.sqrt(np.longdouble(N))
    a.T[iu] = a[iu]
    m = a - np.clongdouble(z) * np.eye(N, dtype=np.clongdouble)
    inv = np.eye(N, dtype=np.clongdouble)
    for col in range(N):
        piv = col + int(np.argmax(np.abs(m[col:, col])))
        if piv != col:
            m[[col, piv]] = m[[piv, col]]
            inv[[col, piv]] = inv[[piv, col]]
        inv[col] /= m[col, col]
        m[col] /= m[col, col]
        for r in range(N):
            if r != col and m[r, col] != 0:
                inv[r] -= m[r, col] * inv[col]
                m[r] -= m[r, col] * m[col]
    return np.trace(inv) / N


# ---------------------------------------------------------------------------
# Upper-triangle index pairs and entry perturbations
# ---------------------------------------------------------------------------


def triu_pairs(N: int):
    """Row-major list of (i, j) with i <= j, matching the entry vector order."""
    return [(i, j) for i in range(N) for j in range(i, N)]


def perturbation_matrix(alpha, N: int) -> np.ndarray:
    """dA/dx_alpha: at most two entries of size N^{-1/2}, one on the diagonal."""
    i, j = alpha
    if not (0 <= i <= j < N):
        raise ValueError("index pair must satisfy 0 <= i <= j < N")
    d = np.zeros((N, N))
    d[i, j] = d[j, i] = 1.0 / math.sqrt(N)
    return d


def resolvent_partials(x, N: int, z: complex, alpha, beta=None, gamma=None):
    """Partial derivatives of h at x, from the exact trace formulas.

    Returns d_alpha h when only alpha is given; (d_alpha h, d_beta d_alpha h)
    with beta; all three orders with gamma.  The second order sums the two
    orderings of (beta, alpha); the third sums all six orderings.
    """
    ws = ResolventWorkspace(wigner_matrix(x, N), z)
    g = ws.G
    d_alpha = perturbation_matrix(alpha, N)
    first = -np.trace(g @ d_alpha @ g) / N
    if beta is None:
        return first
    d_beta = perturbation_matrix(beta, N)
    second = sum(
        np.trace(g @ p @ g @ q @ g)
        for p, q in _permutations((d_beta, d_alpha))
    ) / N
    if gamma is None:
        return first, second
    d_gamma = perturbation_matrix(gamma, N)
    third = -sum(
        np.trace(g @ p @ g @ q @ g @ r @ g)
        for p, q, r in _permutations((d_gamma, d_beta, d_alpha))
    ) / N
    return first, second, third


# ---------------------------------------------------------------------------
# Finite-difference verification of the trace formulas
# ---------------------------------------------------------------------------


def flat_index(pair, N: int) -> int:
    """Row-major position of an (i, j) pair in the upper-triangle vector."""
    i, j = pair
    return i * N - i * (i - 1) // 2 + (j - i)


@dataclass(frozen=True)
class FdAgreement:
    """Worst relative errors of the trace formulas against finite differences."""

    order1: float
    order2: float
    order3: float
    cases: tuple


def fd_agreement_check(N_values, tuples: int, z: complex, rng) -> FdAgreement:
    """Compare all three derivative orders against extrapolated differences.

    Random (x, alpha, beta, gamma) tuples with N drawn from ``N_values``;
    both the real and imaginary parts are checked.  Steps are powers of two
    so the perturbed points carry no representation error.
    """
    z = _check_z(z)
    worst = [0.0, 0.0, 0.0]
    cases = []
    for _ in range(tuples):
        N = int(rng.choice(list(N_values)))
        pairs = triu_pairs(N)
        x = rng.uniform(-2.0, 2.0, len(pairs)).astype(np.longdouble)
        alpha, beta, gamma = (pairs[int(rng.integers(len(pairs)))] for _ in range(3))
        d1, d2, d3 = resolvent_partials(x.astype(float), N, z, alpha, beta, gamma)
        fa, fb, fc = (flat_index(p, N) for p in (alpha, beta, gamma))
        for part in (np.real, np.imag):
            f = lambda xx: part(h_value_hp(xx, N, z))
            fd = (
                finite_difference(f, x, (fa,), step=0.03125, richardson=2),
                finite_difference(f, x, (fa, fb), step=0.0625, richardson=2),
                finite_difference(f, x, (fa, fb, fc), step=0.0625, richardson=2),
            )
            analytic = (float(part(d1)), float(part(d2)), float(part(d3)))
            for k in range(3):
                rel = abs(analytic[k] - fd[k]) / max(abs(analytic[k]), 1e-300)
                worst[k] = max(worst[k], rel)
                cases.append((N, k + 1, analytic[k], fd[k], rel))
    return FdAgreement(worst[0], worst[1], worst[2], tuple(cases))


# ---------------------------------------------------------------------------
# Hilbert-Schmidt machinery and the trace bounds
# ---------------------------------------------------------------------------


def hs_norm(b) -> float:
    """sqrt(sum |b_ij|^2)."""
    return float(np.linalg.norm(np.asarray(b), "fro"))


@dataclass(frozen=True)
class DerivativeBounds:
    """Trace bounds T_r and the induced bounds H_r on the partials of h.

    T1 = 2 |v|^-2 N^-1/2 caps |Tr(G dA G)|; T2 = 2 |v|^-3 N^-1 the two-factor
    trace; T3 = 2^{3/2} |v|^-4 N^-3/2 the three-factor trace.  The partials
    of h inherit them with multiplicities 1, 2, 6 and the 1/N prefactor.
    """

    t1: float
    t2: float
    t3: float
    h1: float
    h2: float
    h3: float


def trace_bounds(v: float, N: int) -> DerivativeBounds:
    if v == 0:
        raise ValueError("Im z must be nonzero")
    av = abs(v)
    t1 = 2.0 / (av ** 2 * math.sqrt(N))
    t2 = 2.0 / (av ** 3 * N)
    t3 = 2.0 ** 1.5 / (av ** 4 * N ** 1.5)
    return DerivativeBounds(t1, t2, t3, t1 / N, 2.0 * t2 / N, 6.0 * t3 / N)


@dataclass(frozen=True)
class TraceRatios:
    """Measured |trace| / bound, per order; all must stay at or below 1."""

    order1: float
    order2: float
    order3: float


def trace_bound_check(x, N: int, z: complex, trials: int, rng) -> TraceRatios:
    """Worst measured-to-bound trace ratios over random index tuples."""
    ws = ResolventWorkspace(wigner_matrix(x, N), z)
    g = ws.G
    bounds = trace_bounds(z.imag, N)
    pairs = triu_pairs(N)
    worst = [0.0, 0.0, 0.0]
    for _ in range(trials):
        picks = [pairs[int(rng.integers(len(pairs)))] for _ in range(3)]
        ds = [perturbation_matrix(p, N) for p in picks]
        t1 = abs(np.trace(g @ ds[0] @ g))
        t2 = abs(np.trace(g @ ds[0] @ g @ ds[1] @ g))
        t3 = abs(np.trace(g @ ds[0] @ g @ ds[1] @ g @ ds[2] @ g))
        worst[0] = max(worst[0], t1 / bounds.t1)
        worst[1] = max(worst[1], t2 / bounds.t2)
        worst[2] = max(worst[2], t3 / bounds.t3)
    return TraceRatios(*worst)


# ---------------------------------------------------------------------------
# Constants for the spectral application of the summarization bound
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Lemma41Constants:
    """Derivative-bound constants for f = g(Re h) at a fixed z and order N.

    Chain-rule expansion against the H_r bounds gives, for B_r = sup|g^(r)|:

      order 2: |d2 f| <= B2 H1^2 + B1 H2
                      = N^-2 (4 B2 |v|^-4 / N + 4 B1 |v|^-3)          = K1 N^-2
      order 3: |d3 f| <= B3 H1^3 + 3 B2 H1 H2 + B1 H3
                      = N^-5/2 (8 B3 |v|^-6 / N^2 + 24 B2 |v|^-5 / N
                                + 6 * 2^{3/2} B1 |v|^-4)              = K2 N^-5/2

    so L2' <= K1 N^-2 and L3' <= K2 N^-5/2.
    """

    k1: float
    k2: float
    l2p_bound: float
    l3p_bound: float
    c1: float
    c2: float


def lemma41_constants(b1: float, b2: float, b3: float, v: float, N: int) -> Lemma41Constants:
    if min(b1, b2, b3) < 0:
        raise ValueError("derivative bounds must be nonnegative")
    if v == 0:
        raise ValueError("Im z must be nonzero")
    av = abs(v)
    k1 = 4.0 * b2 / (av ** 4 * N) + 4.0 * b1 / av ** 3
    k2 = (8.0 * b3 / (av ** 6 * N ** 2) + 24.0 * b2 / (av ** 5 * N)
          + 6.0 * 2.0 ** 1.5 * b1 / av ** 4)
    c1 = 9.5 * k1 * math.sqrt((N + 1) / (2.0 * N))
    c2 = 6.5 * k2 * (N + 1) / N
    return Lemma41Constants(k1, k2, k1 / N ** 2, k2 / N ** 2.5, c1, c2)


def lemma41_bound(m3_tilde: float, m4_tilde: float, N: int,
                  constants: Lemma41Constants) -> float:
    """Summarization bound specialized to n = N(N+1)/2 upper-triangle entries.

    Equals 9.5 sqrt(m4) L2' sqrt(n) + 13 m3 L3' n, which collapses to
    C1 N^-1 sqrt(m4) + C2 N^-1/2 m3 with the recorded C1, C2.
    """
    if min(m3_tilde, m4_tilde) < 0:
        raise ValueError("moments must be nonnegative")
    n = upper_triangle_size(N)
    return (9.5 * math.sqrt(m4_tilde) * constants.l2p_bound * math.sqrt(n)
            + 13.0 * m3_tilde * constants.l3p_bound * n)


def composed_partials(profile: GProfile, x, N: int, z: complex,
                      alpha, beta=None, gamma=None):
    """Partials of f = g(Re h) by the chain rule on the exact trace formulas."""
    if gamma is not None:
        d_a = resolvent_partials(x, N, z, alpha).real
        d_b = resolvent_partials(x, N, z, beta).real
        d_c = resolvent_partials(x, N, z, gamma).real
        d_ab = resolvent_partials(x, N, z, alpha, beta)[1].real
        d_ac = resolvent_partials(x, N, z, alpha, gamma)[1].real
        d_bc = resolvent_partials(x, N, z, beta, gamma)[1].real
        d_abc = resolvent_partials(x, N, z, alpha, beta, gamma)[2].real
        u = h_value(x, N, z).real
        return (float(profile.d3(u)) * d_a * d_b * d_c
                + float(profile.d2(u)) * (d_ab * d_c + d_ac * d_b + d_bc * d_a)
                + float(profile.d1(u)) * d_abc)
    if beta is not None:
        d_a = resolvent_partials(x, N, z, alpha).real
        d_b = resolvent_partials(x, N, z, beta).real
        d_ab = resolvent_partials(x, N, z, alpha, beta)[1].real
        u = h_value(x, N, z).real
        return float(profile.d2(u)) * d_a * d_b + float(profile.d1(u)) * d_ab
    u = h_value(x, N, z).real
    return float(profile.d1(u)) * resolvent_partials(x, N, z, alpha).real


def dump_resolvent_csv(g: np.ndarray, path):
    """Debug dump of a complex resolvent with Re/Im columns interleaved."""
    g = np.asarray(g)
    out = np.empty((g.shape[0], 2 * g.shape[1]))
    out[:, 0::2] = g.real
    out[:, 1::2] = g.imag
    np.savetxt(path, out, delimiter=",")
