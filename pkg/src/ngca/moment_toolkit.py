"""Moments, cumulants and moment-gap diagnostics.

Moment sequences are 1-indexed by order where the API says so (``values[k-1]``
is M_k); internal helpers that need M_0 use plain arrays indexed by order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import comb

N_SE = 4.0


def gaussian_moment(k: int) -> float:
    """E[Z^k] for standard normal Z: 0 for odd k, (k-1)!! for even k."""
    if k < 0:
        raise ValueError("k must be >= 0")
    if k % 2:
        return 0.0
    out = 1.0
    for j in range(k - 1, 0, -2):
        out *= j
    return out


@dataclass(frozen=True)
class MomentVector:
    order_max: int
    values: np.ndarray  # values[k-1] = M_k
    std_errors: np.ndarray
    N: int

    def __getitem__(self, k: int) -> float:
        return float(self.values[k - 1])

    def se(self, k: int) -> float:
        return float(self.std_errors[k - 1])


def empirical_moments(samples, r: int) -> MomentVector:
    x = np.asarray(samples, dtype=float).ravel()
    if x.size < 30:
        raise ValueError("need at least 30 samples")
    if not 1 <= r <= 12:
        raise ValueError("r must lie in [1, 12]")
    vals = np.empty(r)
    ses = np.empty(r)
    p = np.ones_like(x)
    for k in range(1, r + 1):
        p = p * x
        vals[k - 1] = p.mean()
        ses[k - 1] = p.std() / math.sqrt(x.size)
    return MomentVector(order_max=r, values=vals, std_errors=ses, N=x.size)


def gaussian_moment_check(samples, orders=(3, 4), n_se: float = N_SE) -> dict[int, tuple[float, float, bool]]:
    """Per order k: (M_k - M_k(Z), std error, |gap| <= n_se * se)."""
    mv = empirical_moments(samples, max(orders))
    out = {}
    for k in orders:
        gap = mv[k] - gaussian_moment(k)
        out[k] = (gap, mv.se(k), abs(gap) <= n_se * mv.se(k))
    return out


def moments_to_cumulants(m: Sequence[float]) -> np.ndarray:
    """Raw moments m[0..K] (m[0] = 1) to cumulants kappa[0..K] (kappa[0] = 0)."""
    m = np.asarray(m, dtype=float)
    K = len(m) - 1
    kap = np.zeros(K + 1)
    for n in range(1, K + 1):
        kap[n] = m[n] - sum(comb(n - 1, j - 1, exact=True) * kap[j] * m[n - j] for j in range(1, n))
    return kap


def cumulants_to_moments(kap: Sequence[float]) -> np.ndarray:
    kap = np.asarray(kap, dtype=float)
    K = len(kap) - 1
    m = np.zeros(K + 1)
    m[0] = 1.0
    for n in range(1, K + 1):
        m[n] = sum(comb(n - 1, j - 1, exact=True) * kap[j] * m[n - j] for j in range(1, n + 1))
    return m


def linear_combination_moments(law_moments: Sequence[Sequence[float]], a, r: int) -> np.ndarray:
    """Exact moments M_0..M_r of sum_i a_i Y_i for independent Y_i.

    ``law_moments[i][k]`` is E[Y_i^k] indexed by order (entry 0 equal to 1).
    Uses additivity of cumulants under independent sums.
    """
    a = np.asarray(a, dtype=float)
    kap = np.zeros(r + 1)
    for ai, mom in zip(a, law_moments):
        ki = moments_to_cumulants(np.asarray(mom, dtype=float)[: r + 1])
        kap += ki * ai ** np.arange(r + 1)
    return cumulants_to_moments(kap)


def mixed_moment_gap(moments_Y: Sequence[float], signal_coeff: float, k: int) -> float:
    """M_k(W) - M_k(Z) for W = c Y + sqrt(1 - c^2) Z with c = ``signal_coeff``.

    ``moments_Y[j-1]`` is M_j(Y) for j = 1..k.
    """
    c = float(signal_coeff)
    if not 0.0 <= c <= 1.0:
        raise ValueError("signal coefficient must lie in [0, 1]")
    noise = math.sqrt(max(0.0, 1.0 - c * c))
    total = 0.0
    for j in range(1, k + 1):
        dj = moments_Y[j - 1] - gaussian_moment(j)
        if dj == 0.0:
            continue
        total += comb(k, j, exact=True) * c**j * dj * noise ** (k - j) * gaussian_moment(k - j)
    return float(total)


def moment_mixing(moments_Y: Sequence[float], t: float, k: int) -> float:
    """Gap of W = tY + sqrt(1-t^2) Z, i.e. the non-Gaussian coefficient is ``t``."""
    return mixed_moment_gap(moments_Y, t, k)


def smoothed_moment_gap(moments_Y: Sequence[float], t: float, k: int) -> float:
    """Gap of W_t = sqrt(1-t^2) Y + tZ, i.e. ``t`` is the noise coefficient."""
    return mixed_moment_gap(moments_Y, math.sqrt(1.0 - t * t), k)


@dataclass(frozen=True)
class SmoothedGap:
    value: float
    bernoulli: float


def predicted_smoothed_gap(D: float, k: int, t: float) -> SmoothedGap:
    """Lower bound on the order-k gap after smoothing with noise coefficient t."""
    if k < 3:
        raise ValueError("k must be >= 3")
    if not 0.0 <= t < 1.0:
        raise ValueError("t must lie in [0, 1)")
    s2 = 1.0 - t * t
    alt = s2 ** (k / 2) - t * s2**1.5 * (1.0 + math.sqrt(k - 3)) ** k
    bern = 1.0 - k * t * t / 2 - t * k ** (k / 2)
    return SmoothedGap(value=max(0.0, D * alt), bernoulli=D * bern)


@dataclass(frozen=True)
class GapReport:
    k_star: int | None
    gap: float | None
    D_threshold: float
    all_gaps: dict[int, float]


def detect_gap(mv: MomentVector, D: float, n_se: float = N_SE) -> GapReport:
    """Smallest k in [3, r] whose moment gap exceeds D by n_se standard errors."""
    gaps = {k: float(abs(mv[k] - gaussian_moment(k))) for k in range(3, mv.order_max + 1)}
    for k, g in gaps.items():
        if g - n_se * mv.se(k) >= D:
            return GapReport(k_star=k, gap=g, D_threshold=D, all_gaps=gaps)
    return GapReport(k_star=None, gap=None, D_threshold=D, all_gaps=gaps)


def truncation_level(K: float, D: float, r: int) -> float:
    """The level A = 4 r^2 K (3 + log(K/D)) used by the entropy lower bound."""
    return 4.0 * r * r * K * (3.0 + math.log(K / D))


def entropy_decay_bound(eps: float, D: float, r: int, K: float) -> float:
    """Upper bound 5 A r! (eps/D^2)^(1/2r) on the non-Gaussian weight of a direction
    whose smoothed marginal has relative entropy at most eps."""
    if min(eps, D, K) <= 0 or r < 1:
        raise ValueError("eps, D, K must be positive and r >= 1")
    A = truncation_level(K, D, r)
    return 5.0 * A * math.factorial(r) * (eps / D**2) ** (1.0 / (2 * r))
