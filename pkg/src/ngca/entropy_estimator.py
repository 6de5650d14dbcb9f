"""Histogram plug-in estimates of the relative entropy of 1-D marginals.

The relative entropy against the standard Gaussian is

    S(W) = int f log f + Var(W)/2 + log sqrt(2 pi),

and the first term is estimated from bucket counts N_i as
sum_i (N_i/N) log(N_i/(N B)) over buckets of width B covering [-A, A].
Two optional refinements reduce the estimator's noise and bias: averaging
over bin origins shifted by B/shifts, and the Miller-Madow correction
(m - 1)/(2N) for m occupied buckets.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, stats

from .errors import AllSamplesTruncated, QuadratureNonconvergent, VarianceOutOfRange

LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
MAX_BUCKETS = 10**7
VARIANCE_RANGE = (0.25, 4.0)


@dataclass(frozen=True)
class HistogramConfig:
    truncation_A: float
    bucket_width_B: float
    min_count_floor: int = 1
    shifts: int = 1  # number of bin origins averaged, offsets j*B/shifts
    bias_correction: bool = False  # Miller-Madow

    def __post_init__(self):
        if not (self.truncation_A > 0 and self.bucket_width_B > 0):
            raise ValueError("A and B must be positive")
        if self.truncation_A / self.bucket_width_B > MAX_BUCKETS:
            raise ValueError("A/B exceeds the bucket-count guard")
        if self.min_count_floor < 1 or self.shifts < 1:
            raise ValueError("min_count_floor and shifts must be >= 1")

    def with_(self, **kw) -> "HistogramConfig":
        d = dict(self.__dict__)
        d.update(kw)
        return HistogramConfig(**d)


@dataclass(frozen=True)
class EntropyEstimate:
    value: float
    raw_integral: float
    sample_variance: float
    config: HistogramConfig
    N: int
    std_error: float = float("nan")

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "raw_integral": self.raw_integral,
            "sample_variance": self.sample_variance,
            "N": self.N,
            "std_error": self.std_error,
            "A": self.config.truncation_A,
            "B": self.config.bucket_width_B,
        }


def default_config(N: int, K: float = 1.0, t: float = 0.3, *, shifts: int = 1,
                   bias_correction: bool = True) -> HistogramConfig:
    """A = K sqrt(2 log N) + 2, B = N^(-1/3) clipped to [1e-4, 0.2]."""
    if N < 1000 or K < 1 or not 0 < t < 1:
        raise ValueError("need N >= 1000, K >= 1 and 0 < t < 1")
    A = K * math.sqrt(2.0 * math.log(N)) + 2.0
    B = float(np.clip(N ** (-1.0 / 3.0), 1e-4, 0.2))
    return HistogramConfig(A, B, 1, shifts, bias_correction)


def _check_samples(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[0] < 100:
        raise ValueError("need at least 100 samples")
    if not np.all(np.isfinite(x)):
        raise ValueError("samples must be finite")
    return x


def _plogp_columns(M: np.ndarray, cfg: HistogramConfig) -> np.ndarray:
    """sum_i (N_i/N) log(N_i/(N B)) for every column of M, averaged over bin shifts."""
    N, c = M.shape
    A, B, R = cfg.truncation_A, cfg.bucket_width_B, cfg.shifts
    n_coarse = int(math.ceil(2 * A / B)) + 1
    n_fine = n_coarse * R
    ok = np.abs(M) <= A
    if not ok.any(axis=0).all():
        raise AllSamplesTruncated(f"no samples in [-{A}, {A}]")
    fine = np.floor((M + A) * (R / B)).astype(np.int64)
    np.clip(fine, 0, n_fine - 1, out=fine)
    fine += np.arange(c) * n_fine
    cnt = np.bincount(fine[ok], minlength=n_fine * c).reshape(c, n_fine).astype(float)
    padded = np.zeros((c, n_fine + 2 * R))
    padded[:, R: R + n_fine] = cnt
    out = np.zeros(c)
    for r in range(R):
        # shift r moves bin origins left by r*B/R
        co = padded[:, R - r: R - r + n_fine + R].reshape(c, n_coarse + 1, R).sum(axis=2)
        keep = co >= cfg.min_count_floor
        safe = np.where(keep, co, 1.0)
        out += np.where(keep, co / N * np.log(safe / (N * B)), 0.0).sum(axis=1)
        if cfg.bias_correction:
            out -= ((co > 0).sum(axis=1) - 1) / (2.0 * N)
    return out / R


def estimate_plogp(samples, cfg: HistogramConfig) -> float:
    """Plug-in estimate of int f log f from samples inside [-A, A]."""
    x = _check_samples(samples).ravel()
    return float(_plogp_columns(x[:, None], cfg)[0])


def entropy_columns(M: np.ndarray, cfg: HistogramConfig, chunk: int = 16) -> np.ndarray:
    """Relative-entropy estimates for each column of M (no variance guard)."""
    M = np.asarray(M, dtype=float)
    out = np.empty(M.shape[1])
    for j in range(0, M.shape[1], chunk):
        block = M[:, j: j + chunk]
        out[j: j + chunk] = _plogp_columns(block, cfg) + block.var(axis=0) / 2 + LOG_SQRT_2PI
    return out


def counted_samples(samples, cfg: HistogramConfig) -> int:
    return int(np.count_nonzero(np.abs(np.asarray(samples, dtype=float)) <= cfg.truncation_A))


def relative_entropy(samples, cfg: HistogramConfig,
                     variance_range: tuple[float, float] = VARIANCE_RANGE) -> EntropyEstimate:
    x = _check_samples(samples).ravel()
    var = float(x.var())
    lo, hi = variance_range
    if not lo <= var <= hi:
        raise VarianceOutOfRange(f"sample variance {var:.4g} outside [{lo}, {hi}]")
    raw = float(_plogp_columns(x[:, None], cfg)[0])
    value = raw + var / 2 + LOG_SQRT_2PI
    return EntropyEstimate(value=value, raw_integral=raw, sample_variance=var, config=cfg,
                           N=x.size, std_error=_std_error(x, cfg))


def _std_error(x: np.ndarray, cfg: HistogramConfig) -> float:
    # delta-method error: std of log(f_hat(x)/g(x)) over samples, divided by sqrt N
    A, B = cfg.truncation_A, cfg.bucket_width_B
    ok = np.abs(x) <= A
    idx = np.floor((x[ok] + A) / B).astype(np.int64)
    cnt = np.bincount(idx)
    logf = np.log(cnt[idx] / (x.size * B))
    return float(np.std(logf + x[ok] ** 2 / 2) / math.sqrt(x.size))


def histogram_tv_distance(samples, cfg: HistogramConfig) -> float:
    """Total variation between the histogram's bucket masses and the standard Gaussian."""
    x = _check_samples(samples).ravel()
    A, B = cfg.truncation_A, cfg.bucket_width_B
    nb = int(math.ceil(2 * A / B))
    edges = -A + B * np.arange(nb + 1)
    cnt, _ = np.histogram(x, bins=edges)
    gauss = np.diff(stats.norm.cdf(edges))
    inside = np.abs(cnt / x.size - gauss).sum()
    outside = abs((x.size - cnt.sum()) / x.size - (1.0 - gauss.sum()))
    return 0.5 * float(inside + outside)


# -- analytic oracles ---------------------------------------------------------


@dataclass(frozen=True)
class ScaledGaussian:
    """Law of lam * Z for standard normal Z."""

    lam: float

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("scale must be positive")


def scaled_gaussian(lam: float) -> ScaledGaussian:
    return ScaledGaussian(float(lam))


def analytic_relative_entropy(law, tol: float = 1e-8) -> float:
    """Exact S for a scaled Gaussian; adaptive quadrature of int f log(f/g) otherwise."""
    if isinstance(law, ScaledGaussian):
        return -math.log(law.lam) + (law.lam**2 - 1.0) / 2.0
    lo, hi = law.support
    lo, hi = max(lo, -40.0), min(hi, 40.0)

    def integrand(x):
        lf = float(law.logpdf(x))
        if lf == -math.inf:
            return 0.0
        return math.exp(lf) * (lf + x * x / 2 + LOG_SQRT_2PI)

    pts = [p for p in (-3.0, -1.0, 0.0, 1.0, 3.0) if lo < p < hi]
    val, err = integrate.quad(integrand, lo, hi, points=pts or None, epsabs=1e-11, epsrel=1e-11, limit=500)
    if not err < tol:
        raise QuadratureNonconvergent(f"quadrature error estimate {err:.2e} exceeds {tol:.0e}")
    return float(val)
