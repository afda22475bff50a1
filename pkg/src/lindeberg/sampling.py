"""Seeded samplers for exchangeable, independent, and Gaussian vectors.

Every sampler is a pure function of ``(spec, seed)``: the same pair always
reproduces the same vector, and replicate streams are derived with a
counter-based splitter so parallel Monte Carlo stays reproducible.  For
specs whose conditional laws can be enumerated (value multisets, finite
Markov chains, i.i.d. families) the module also provides exact
conditional-moment oracles.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

_MASK64 = (1 << 64) - 1
_KERNEL_ROW_TOL = 1e-12

# Relative threshold below which a sample standard deviation is treated as
# an exact zero (constant vector up to rounding).
_DEGENERATE_RTOL = 1e-13


def derive_child(seed: int, index: int) -> int:
    """Derive a 64-bit child seed from ``(seed, index)``.

    SplitMix64-style mixing; a pure function of its two arguments, so
    replicate ``index`` always maps to the same child stream.
    """
    z = (int(seed) + (int(index) + 1) * 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def rng_from(seed: int) -> np.random.Generator:
    """PCG64 generator for a 64-bit seed."""
    return np.random.default_rng(int(seed) & _MASK64)


# ---------------------------------------------------------------------------
# Scalar distributions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Distribution:
    """A scalar law with seeded sampling and exact moments where closed forms exist.

    ``kind`` is one of ``gaussian`` (params mu, sigma), ``uniform`` (params
    low, high), ``student_t`` (params df), or ``finite`` (explicit atoms and
    probabilities).
    """

    kind: str
    params: tuple = ()
    values: tuple = ()
    probs: tuple = ()

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        if self.kind == "gaussian":
            mu, sigma = self.params
            return rng.normal(mu, sigma, size)
        if self.kind == "uniform":
            low, high = self.params
            return rng.uniform(low, high, size)
        if self.kind == "student_t":
            (df,) = self.params
            return rng.standard_t(df, size)
        if self.kind == "finite":
            return rng.choice(np.asarray(self.values, dtype=float), size=size,
                              p=np.asarray(self.probs, dtype=float))
        raise ValueError(f"unknown distribution kind {self.kind!r}")

    def mean(self) -> float:
        if self.kind == "gaussian":
            return self.params[0]
        if self.kind == "uniform":
            return 0.5 * (self.params[0] + self.params[1])
        if self.kind == "student_t":
            return 0.0
        if self.kind == "finite":
            return float(np.dot(self.values, self.probs))
        raise ValueError(self.kind)

    def second_moment(self) -> float:
        if self.kind == "gaussian":
            mu, sigma = self.params
            return mu * mu + sigma * sigma
        if self.kind == "uniform":
            a, b = self.params
            return (a * a + a * b + b * b) / 3.0
        if self.kind == "student_t":
            (df,) = self.params
            if df <= 2:
                raise ValueError("second moment requires df > 2")
            return df / (df - 2.0)
        if self.kind == "finite":
            return float(np.dot(np.square(self.values), self.probs))
        raise ValueError(self.kind)

    def abs_moment(self, p: int):
        """E|X|^p in closed form, or None when only Monte Carlo is available."""
        if self.kind == "finite":
            return float(np.dot(np.abs(self.values) ** p, self.probs))
        if self.kind == "gaussian":
            mu, sigma = self.params
            if mu != 0.0:
                return None
            # E|sigma Z|^p = sigma^p 2^{p/2} Gamma((p+1)/2) / sqrt(pi)
            return sigma ** p * 2 ** (p / 2) * math.gamma((p + 1) / 2) / math.sqrt(math.pi)
        if self.kind == "uniform":
            a, b = self.params
            anti = lambda x: math.copysign(abs(x) ** (p + 1) / (p + 1), x)
            return (anti(b) - anti(a)) / (b - a)
        if self.kind == "student_t":
            (df,) = self.params
            if p >= df:
                return None
            return (df ** (p / 2) * math.gamma((p + 1) / 2) * math.gamma((df - p) / 2)
                    / (math.sqrt(math.pi) * math.gamma(df / 2)))
        raise ValueError(self.kind)

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        if self.params:
            d["params"] = list(self.params)
        if self.values:
            d["values"] = list(self.values)
            d["probs"] = list(self.probs)
        return d

    @staticmethod
    def from_dict(d: dict) -> "Distribution":
        return Distribution(
            kind=d["kind"],
            params=tuple(d.get("params", ())),
            values=tuple(d.get("values", ())),
            probs=tuple(d.get("probs", ())),
        )


def gaussian(mu: float = 0.0, sigma: float = 1.0) -> Distribution:
    return Distribution("gaussian", (float(mu), float(sigma)))


def uniform(low: float, high: float) -> Distribution:
    return Distribution("uniform", (float(low), float(high)))


def student_t(df: float) -> Distribution:
    return Distribution("student_t", (float(df),))


def finite(values: Sequence[float], probs: Sequence[float] | None = None) -> Distribution:
    values = tuple(float(v) for v in values)
    if probs is None:
        probs = (1.0 / len(values),) * len(values)
    probs = tuple(float(p) for p in probs)
    if abs(sum(probs) - 1.0) > 1e-12:
        raise ValueError("probabilities must sum to 1")
    return Distribution("finite", values=values, probs=probs)


def point_mass(c: float) -> Distribution:
    return finite([c])


def rademacher() -> Distribution:
    return finite([-1.0, 1.0])


# ---------------------------------------------------------------------------
# Exchangeable / weakly dependent vector specs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MultisetPermutation:
    """Uniformly random permutation of a fixed value multiset (exchangeable)."""

    values: tuple

    def __post_init__(self):
        if len(self.values) == 0:
            raise ValueError("multiset must be nonempty")
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))

    @property
    def n(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class IidFromDistribution:
    """n independent draws from a scalar distribution (exchangeable)."""

    dist: Distribution
    n: int


@dataclass(frozen=True)
class MarkovChain:
    """Finite-state chain with real state values.

    Generally not exchangeable; admitted as a weakly dependent input for the
    swapping bound, never for the exchangeable summarization bound.
    """

    states: tuple
    initial: tuple
    kernel: tuple
    n: int

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(float(s) for s in self.states))
        object.__setattr__(self, "initial", tuple(float(p) for p in self.initial))
        object.__setattr__(self, "kernel", tuple(tuple(float(p) for p in row) for row in self.kernel))


@dataclass(frozen=True)
class ConditionallyIid:
    """Mixture of i.i.d. laws: draw a parameter, then n conditional draws.

    ``conditional`` selects the conditional family: ``gaussian_mean`` is
    N(theta, scale^2); ``gaussian_scale`` is N(0, theta^2).
    """

    mixing: Distribution
    conditional: str
    scale: float
    n: int


ExchangeableSpec = Union[MultisetPermutation, IidFromDistribution, MarkovChain, ConditionallyIid]


def spec_length(spec: ExchangeableSpec) -> int:
    if isinstance(spec, MultisetPermutation):
        return spec.n
    return spec.n


def _validate_kernel(spec: MarkovChain) -> np.ndarray:
    kernel = np.asarray(spec.kernel, dtype=float)
    k = len(spec.states)
    if kernel.shape != (k, k):
        raise ValueError("kernel shape must match the number of states")
    if np.max(np.abs(kernel.sum(axis=1) - 1.0)) > _KERNEL_ROW_TOL:
        raise ValueError("kernel rows must sum to 1 within 1e-12")
    if kernel.min() < 0:
        raise ValueError("kernel entries must be nonnegative")
    init = np.asarray(spec.initial, dtype=float)
    if abs(init.sum() - 1.0) > _KERNEL_ROW_TOL or init.min() < 0:
        raise ValueError("initial distribution must be a probability vector")
    return kernel


def sample_batch(spec: ExchangeableSpec, seed: int, replicates: int) -> np.ndarray:
    """Draw ``replicates`` independent vectors; shape (replicates, n)."""
    rng = rng_from(seed)
    n = spec_length(spec)
    if isinstance(spec, MultisetPermutation):
        out = np.tile(np.asarray(spec.values, dtype=float), (replicates, 1))
        return rng.permuted(out, axis=1)
    if isinstance(spec, IidFromDistribution):
        return np.asarray(spec.dist.sample(rng, (replicates, n)), dtype=float)
    if isinstance(spec, MarkovChain):
        kernel = _validate_kernel(spec)
        states = np.asarray(spec.states, dtype=float)
        k = len(states)
        cum = np.cumsum(kernel, axis=1)
        out = np.empty((replicates, n))
        idx = rng.choice(k, size=replicates, p=np.asarray(spec.initial, dtype=float))
        out[:, 0] = states[idx]
        for t in range(1, n):
            u = rng.random(replicates)
            idx = np.minimum((u[:, None] >= cum[idx]).sum(axis=1), k - 1)
            out[:, t] = states[idx]
        return out
    if isinstance(spec, ConditionallyIid):
        theta = np.asarray(spec.mixing.sample(rng, replicates), dtype=float)
        z = rng.standard_normal((replicates, n))
        if spec.conditional == "gaussian_mean":
            return theta[:, None] + spec.scale * z
        if spec.conditional == "gaussian_scale":
            return np.abs(theta)[:, None] * z
        raise ValueError(f"unknown conditional family {spec.conditional!r}")
    raise TypeError(f"not an exchangeable spec: {spec!r}")


def sample_exchangeable(spec: ExchangeableSpec, seed: int) -> np.ndarray:
    """One draw from the spec's law, shape (n,)."""
    return sample_batch(spec, seed, 1)[0]


# ---------------------------------------------------------------------------
# Standardization and the Gaussian summary vector
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StandardizedVector:
    """Sample mean, sample sd (divisor n), and the standardized coordinates."""

    mu_hat: float
    sigma_hat: float
    x_tilde: np.ndarray
    degenerate: bool

    def check(self, tol: float = 1e-12):
        """Raise unless sum = 0 and sum of squares = n within ``tol * n``."""
        if self.degenerate:
            return
        n = self.x_tilde.size
        if abs(self.x_tilde.sum()) > tol * n or abs(np.square(self.x_tilde).sum() - n) > tol * n:
            raise AssertionError("standardized vector violates its sum identities")


def center_and_scale(x) -> StandardizedVector:
    """Standardize ``x`` to mean 0 and mean-square 1 (divisor n).

    A constant vector is a flagged success: the standardized coordinates are
    returned as zeros with ``degenerate=True``, not an error.
    """
    x = np.asarray(x, dtype=float)
    mu = float(x.mean())
    sigma = float(np.sqrt(np.mean(np.square(x - mu))))
    if sigma <= _DEGENERATE_RTOL * (1.0 + abs(mu)):
        return StandardizedVector(mu, 0.0, np.zeros_like(x), True)
    return StandardizedVector(mu, sigma, (x - mu) / sigma, False)


def build_y(mu_hat: float, sigma_hat: float, z) -> np.ndarray:
    """Gaussian summary vector mu + sigma * (z - mean(z)); its mean is exactly mu."""
    z = np.asarray(z, dtype=float)
    return mu_hat + sigma_hat * (z - z.mean())


# ---------------------------------------------------------------------------
# Exact conditional-moment oracles
# ---------------------------------------------------------------------------


def _remaining_multiset(values: Sequence[float], prefix: Sequence[float]) -> list:
    remaining = Counter(float(v) for v in values)
    for p in prefix:
        p = float(p)
        if remaining[p] <= 0:
            raise ValueError("prefix is not contained in the multiset")
        remaining[p] -= 1
    return [v for v, c in remaining.items() for _ in range(c)]


def exact_conditional_moments(spec: ExchangeableSpec, prefix: Sequence[float], order: int) -> float:
    """Exact E(X_i | prefix) (order 1) or E(X_i^2 | prefix) (order 2).

    Available in closed form for multiset permutations (uniformity over the
    remaining elements), finite Markov chains (kernel row of the last state),
    and i.i.d. specs (the marginal).  ``i`` is ``len(prefix) + 1``.
    """
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    if isinstance(spec, MultisetPermutation):
        rest = _remaining_multiset(spec.values, prefix)
        if not rest:
            raise ValueError("prefix exhausts the multiset")
        arr = np.asarray(rest)
        return float(np.mean(arr if order == 1 else arr * arr))
    if isinstance(spec, MarkovChain):
        kernel = _validate_kernel(spec)
        states = np.asarray(spec.states, dtype=float)
        vals = states if order == 1 else states * states
        if len(prefix) == 0:
            return float(np.dot(spec.initial, vals))
        last = float(prefix[-1])
        matches = np.nonzero(np.asarray(spec.states) == last)[0]
        if matches.size == 0:
            raise ValueError("prefix value is not a chain state")
        return float(np.dot(kernel[matches[0]], vals))
    if isinstance(spec, IidFromDistribution):
        return spec.dist.mean() if order == 1 else spec.dist.second_moment()
    raise ValueError("no exact conditional oracle for this spec; use nested Monte Carlo")


def marginal_mean(spec: ExchangeableSpec, i: int) -> float:
    """Exact E(X_i) (1-based i)."""
    if isinstance(spec, MultisetPermutation):
        return float(np.mean(spec.values))
    if isinstance(spec, IidFromDistribution):
        return spec.dist.mean()
    if isinstance(spec, MarkovChain):
        return float(np.dot(_step_distribution(spec, i), spec.states))
    if isinstance(spec, ConditionallyIid):
        if spec.conditional == "gaussian_mean":
            return spec.mixing.mean()
        return 0.0
    raise TypeError(spec)


def marginal_second_moment(spec: ExchangeableSpec, i: int) -> float:
    if isinstance(spec, MultisetPermutation):
        return float(np.mean(np.square(spec.values)))
    if isinstance(spec, IidFromDistribution):
        return spec.dist.second_moment()
    if isinstance(spec, MarkovChain):
        return float(np.dot(_step_distribution(spec, i), np.square(spec.states)))
    if isinstance(spec, ConditionallyIid):
        if spec.conditional == "gaussian_mean":
            return spec.mixing.second_moment() + spec.scale ** 2
        return spec.mixing.second_moment()
    raise TypeError(spec)


def marginal_abs_third_moment(spec: ExchangeableSpec, i: int):
    """Exact E|X_i|^3, or None when only Monte Carlo is available."""
    if isinstance(spec, MultisetPermutation):
        return float(np.mean(np.abs(spec.values) ** 3))
    if isinstance(spec, IidFromDistribution):
        return spec.dist.abs_moment(3)
    if isinstance(spec, MarkovChain):
        return float(np.dot(_step_distribution(spec, i), np.abs(spec.states) ** 3))
    return None


def _step_distribution(spec: MarkovChain, i: int) -> np.ndarray:
    kernel = _validate_kernel(spec)
    dist = np.asarray(spec.initial, dtype=float)
    for _ in range(i - 1):
        dist = dist @ kernel
    return dist


# ---------------------------------------------------------------------------
# JSON round trip
# ---------------------------------------------------------------------------


def spec_to_dict(spec: ExchangeableSpec) -> dict:
    if isinstance(spec, MultisetPermutation):
        return {"variant": "multiset", "values": list(spec.values)}
    if isinstance(spec, IidFromDistribution):
        return {"variant": "iid", "dist": spec.dist.to_dict(), "n": spec.n}
    if isinstance(spec, MarkovChain):
        return {"variant": "markov", "states": list(spec.states),
                "initial": list(spec.initial),
                "kernel": [list(r) for r in spec.kernel], "n": spec.n}
    if isinstance(spec, ConditionallyIid):
        return {"variant": "conditionally_iid", "mixing": spec.mixing.to_dict(),
                "conditional": spec.conditional, "scale": spec.scale, "n": spec.n}
    raise TypeError(spec)


def spec_from_dict(d: dict) -> ExchangeableSpec:
    variant = d["variant"]
    if variant == "multiset":
        return MultisetPermutation(tuple(d["values"]))
    if variant == "iid":
        return IidFromDistribution(Distribution.from_dict(d["dist"]), int(d["n"]))
    if variant == "markov":
        return MarkovChain(tuple(d["states"]), tuple(d["initial"]),
                           tuple(tuple(r) for r in d["kernel"]), int(d["n"]))
    if variant == "conditionally_iid":
        return ConditionallyIid(Distribution.from_dict(d["mixing"]),
                                d["conditional"], float(d["scale"]), int(d["n"]))
    raise ValueError(f"unknown spec variant {variant!r}")


def spec_to_json(spec: ExchangeableSpec) -> str:
    return json.dumps(spec_to_dict(spec), sort_keys=True)


def spec_from_json(text: str) -> ExchangeableSpec:
    return spec_from_dict(json.loads(text))


def standardized_multiset(values: Sequence[float]) -> MultisetPermutation:
    """Multiset spec whose values are standardized to mean 0, mean-square 1."""
    std = center_and_scale(np.asarray(values, dtype=float))
    if std.degenerate:
        raise ValueError("cannot standardize a constant multiset")
    return MultisetPermutation(tuple(std.x_tilde))
