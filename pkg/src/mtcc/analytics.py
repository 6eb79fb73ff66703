"""Closed-form coding delays, their approximations, and Gamma fits of piece sizes.

All delays are normalized by the file size (slots per file), except
:func:`finite_delay`, which counts slots on a realized piece table.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy import special, stats

from .content import PieceTable

__all__ = [
    "binom",
    "delay_infinite",
    "delay_block_sum",
    "delay_centralized",
    "delay_tdma",
    "delay_hybrid_L1",
    "taylor_delays",
    "delta_tc",
    "lower_bound",
    "hybrid_superior",
    "finite_delay",
    "GammaParams",
    "GammaFit",
    "DegenerateSample",
    "gamma_pdf",
    "gamma_cdf",
    "fit_gamma",
    "ks_statistic",
]


def binom(n: int, k: int) -> float:
    """Binomial coefficient as a float; log-space above n = 40."""
    if k < 0 or k > n:
        return 0.0
    if n <= 40:
        return float(math.comb(n, k))
    return math.exp(math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1))


def _level_weight(K: int, alpha: int, p: float) -> float:
    # C(K, alpha) p^(alpha-1) (1-p)^(K-alpha+1)
    return binom(K, alpha) * p ** (alpha - 1) * (1 - p) ** (K - alpha + 1)


def delay_infinite(K: int, L: int, p: float) -> float:
    """Large-file coding delay of decentralized placement with ZF multicast delivery."""
    if K == 0:
        return 0.0
    return sum(_level_weight(K, a, p) * a / min(a + L - 1, K) for a in range(1, K + 1))


def delay_block_sum(K: int, L: int, p: float) -> float:
    """Same quantity assembled block by block: #T x omega / n_split x expected piece size."""
    total = 0.0
    for a in range(1, K + 1):
        size = min(a + L - 1, K)
        piece = p ** (a - 1) * (1 - p) ** (K - a + 1)
        total += binom(K, size) * binom(size - 1, a - 1) / binom(K - a, size - a) * piece
    return total


def delay_centralized(K: int, L: int, p: float) -> float:
    """Centralized multi-transmitter delay K(1-p)/min(L + Kp, K)."""
    if K == 0 or p >= 1:
        return 0.0
    return K * (1 - p) / min(L + K * p, K)


def delay_tdma(K_c: int, K_d: int, L: int, p: float) -> float:
    """Hybrid placement served one group after the other."""
    return delay_centralized(K_c, L, p) + delay_infinite(K_d, L, p)


def delay_hybrid_L1(K_c: int, K_d: int, p: float) -> float:
    """Single-transmitter hybrid TDMA delay in resummed form."""
    first = K_c * (1 - p) / (1 + K_c * p)
    if K_d == 0:
        second = 0.0
    elif p == 0:
        second = float(K_d)
    else:
        # 1 - (1-p)^K_d via expm1/log1p keeps precision for tiny p
        second = (1 - p) * (-math.expm1(K_d * math.log1p(-p)) / p) if p < 1 else 0.0
    return first + second


def taylor_delays(K: int, K_c: int, K_d: int, p: float) -> tuple[float, float, float]:
    """First-order small-``p`` approximations: (hybrid, centralized, decentralized)."""
    hybrid = K - p * (K_c ** 2 + K + math.comb(K_d, 2))
    centralized = K - p * (K ** 2 + K)
    decentralized = K - p * (K + math.comb(K, 2))
    return hybrid, centralized, decentralized


def delta_tc(K: int, L: int, p: float) -> float:
    """Delay reduction credited to L transmitters in the lower bound."""
    return (L - 1) * sum(_level_weight(K, a, p) / (a + L - 1) for a in range(1, K + 1))


def lower_bound(K: int, L: int, p: float) -> float:
    return delay_infinite(K, 1, p) - delta_tc(K, L, p)


def hybrid_superior(K: int, K_c: int) -> bool:
    """Low-memory test for the hybrid placement beating pure decentralized placement."""
    if not 0 <= K_c <= K:
        raise ValueError(f"K_c={K_c} outside [0, {K}]")
    K_d = K - K_c
    return K_c ** 2 + math.comb(K_d, 2) > math.comb(K, 2)


def finite_delay(table: PieceTable, L: int) -> int:
    """Slots needed on a realized piece table.

    A piece of length ``X`` at level ``alpha`` is cut into ``n_split``
    consecutive fragments of ``ceil(X / n_split)`` symbols; the enclosing set
    ``T = U | Z`` receives fragment number ``rank(Z)``, the lexicographic rank
    of ``Z`` among the ``(|T| - alpha)``-subsets of the users outside ``U``.
    Each ``T`` costs ``omega`` repetitions of its longest fragment.
    """
    users = table.users
    K = len(users)
    lengths = table.lengths()
    total = 0
    for a in range(1, K + 1):
        size = min(a + L - 1, K)
        omega = math.comb(size - 1, a - 1)
        n_split = math.comb(K - a, size - a)
        longest: dict[tuple[int, ...], int] = {}
        for U in combinations(users, a):
            outside = [u for u in users if u not in U]
            for rank, Z in enumerate(combinations(outside, size - a)):
                T = tuple(sorted(U + Z))
                for r in U:
                    X = lengths.get((r, tuple(u for u in U if u != r)), 0)
                    width = -(-X // n_split)
                    frag = min(width, max(0, X - rank * width))
                    if frag > longest.get(T, 0):
                        longest[T] = frag
        total += omega * sum(longest.values())
    return total


# -- Gamma approximation of piece sizes --------------------------------------


class DegenerateSample(ValueError):
    """Samples have zero variance; no Gamma law fits."""


@dataclass(frozen=True)
class GammaParams:
    shape: float
    scale: float

    def __post_init__(self):
        if not (self.shape > 0 and self.scale > 0):
            raise ValueError(f"Gamma parameters must be positive, got shape={self.shape}, scale={self.scale}")

    @property
    def mean(self) -> float:
        return self.shape * self.scale


@dataclass(frozen=True)
class GammaFit:
    params: GammaParams
    n_used: int
    n_dropped_zero: int
    method: str


def gamma_pdf(x, params: GammaParams):
    x = np.asarray(x, dtype=float)
    k, theta = params.shape, params.scale
    with np.errstate(divide="ignore", invalid="ignore"):
        logpdf = (k - 1) * np.log(x) - x / theta - k * np.log(theta) - special.gammaln(k)
        return np.where(x > 0, np.exp(logpdf), 0.0)


def gamma_cdf(x, params: GammaParams):
    x = np.asarray(x, dtype=float)
    return special.gammainc(params.shape, np.clip(x, 0, None) / params.scale)


def _mle_shape(mean: float, mean_log: float, k0: float) -> float:
    # Newton on log k - digamma(k) = log(mean) - mean(log x)
    s = math.log(mean) - mean_log
    k = k0
    for _ in range(100):
        f = math.log(k) - special.digamma(k) - s
        df = 1 / k - special.polygamma(1, k)
        step = f / df
        k_new = k - step
        if k_new <= 0:
            k_new = k / 2
        if abs(k_new - k) < 1e-12 * k:
            return k_new
        k = k_new
    return k


def fit_gamma(samples, mle: bool = False) -> GammaFit:
    """Method-of-moments Gamma fit, optionally refined by maximum likelihood.

    Zero samples lie outside the Gamma support; they are dropped and counted.
    """
    x = np.asarray(samples, dtype=float)
    zeros = int(np.sum(x == 0))
    x = x[x > 0]
    if x.size == 0:
        raise DegenerateSample("no positive samples")
    mean = float(x.mean())
    var = float(x.var())
    if var == 0:
        raise DegenerateSample(f"all {x.size} positive samples equal {mean:g}")
    shape = mean ** 2 / var
    method = "moments"
    if mle:
        shape = _mle_shape(mean, float(np.log(x).mean()), shape)
        method = "mle"
    return GammaFit(GammaParams(shape, mean / shape), int(x.size), zeros, method)


def ks_statistic(samples, params: GammaParams) -> float:
    """Kolmogorov-Smirnov distance between the samples and the Gamma law."""
    x = np.asarray(samples, dtype=float)
    return float(stats.kstest(x, lambda v: gamma_cdf(v, params)).statistic)
