"""Planted NGCA instances: non-Gaussian laws, sampling, whitening, smoothing, projection."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np
from scipy import optimize, special, stats

from . import moment_toolkit as mt
from .errors import DimensionMismatch, MomentGapTooSmall, SingularCovariance
from .subspace_algebra import Subspace

LAW_KINDS = (
    "uniform",
    "laplace_truncated",
    "two_point_smoothed",
    "gaussian_mixture_symmetric",
    "exponential_truncated",
)
_DEFAULT_PARAMS = {
    "uniform": (),
    "laplace_truncated": (4.0,),
    "two_point_smoothed": (0.3,),
    "gaussian_mixture_symmetric": (0.8,),
    "exponential_truncated": (6.0,),
}
MAX_ORDER = 12


def _mixture_raw_moment(center: float, sd: float, k: int) -> float:
    # E[(center*R + sd*G)^k] for Rademacher R and standard normal G
    if k % 2:
        return 0.0
    return float(sum(special.comb(k, j, exact=True) * sd**j * mt.gaussian_moment(j) * center ** (k - j)
                     for j in range(0, k + 1, 2)))


def _trunc_exp_raw(j: int, c: float) -> float:
    # E[Y^j] for Y ~ Exp(1) conditioned on [0, c]
    return math.gamma(j + 1) * special.gammainc(j + 1, c) / (-math.expm1(-c))


@dataclass(frozen=True)
class NonGaussianLaw:
    """A mean-zero, unit-variance, subgaussian law with closed-form moments.

    Kinds and parameters:

    * ``uniform``: uniform on [-sqrt 3, sqrt 3]; no parameters.
    * ``laplace_truncated``: Laplace(0, 1) conditioned on |y| <= c, rescaled; params (c,).
    * ``two_point_smoothed``: (R + sigma G) / sqrt(1 + sigma^2), R Rademacher; params (sigma,).
    * ``gaussian_mixture_symmetric``: 1/2 N(mu, 1-mu^2) + 1/2 N(-mu, 1-mu^2); params (mu,).
    * ``exponential_truncated``: Exp(1) conditioned on [0, c], centred and rescaled.
      Skewed; used as a fixture for third-order checks.
    """

    kind: str
    params: tuple = ()

    def __post_init__(self):
        if self.kind not in LAW_KINDS:
            raise ValueError(f"unknown law kind {self.kind!r}; expected one of {LAW_KINDS}")
        params = tuple(float(p) for p in self.params) or _DEFAULT_PARAMS[self.kind]
        object.__setattr__(self, "params", params)
        if self.kind == "two_point_smoothed" and not params[0] > 0:
            raise ValueError("sigma must be positive")
        if self.kind == "gaussian_mixture_symmetric" and not 0 <= params[0] < 1:
            raise ValueError("mu must lie in [0, 1)")
        if self.kind in ("laplace_truncated", "exponential_truncated") and not params[0] > 0:
            raise ValueError("truncation must be positive")

    # -- shape parameters -------------------------------------------------
    @cached_property
    def _mixture(self) -> tuple[float, float]:
        if self.kind == "two_point_smoothed":
            s = self.params[0]
            scale = 1.0 / math.sqrt(1.0 + s * s)
            return scale, s * scale
        mu = self.params[0]
        return mu, math.sqrt(1.0 - mu * mu)

    @cached_property
    def _laplace_scale(self) -> float:
        c = self.params[0]
        return 1.0 / math.sqrt(_trunc_exp_raw(2, c))

    @cached_property
    def _exp_shape(self) -> tuple[float, float]:
        c = self.params[0]
        m1 = _trunc_exp_raw(1, c)
        var = _trunc_exp_raw(2, c) - m1 * m1
        return m1, math.sqrt(var)

    # -- moments ------------------------------------------------------------
    @cached_property
    def raw_moments(self) -> np.ndarray:
        """E[Y^k] for k = 0..12, indexed by order."""
        out = np.empty(MAX_ORDER + 1)
        for k in range(MAX_ORDER + 1):
            out[k] = self._moment(k)
        out[0], out[1], out[2] = 1.0, 0.0, 1.0
        return out

    def _moment(self, k: int) -> float:
        kind = self.kind
        if kind == "uniform":
            return 0.0 if k % 2 else 3.0 ** (k / 2) / (k + 1)
        if kind == "laplace_truncated":
            if k % 2:
                return 0.0
            return _trunc_exp_raw(k, self.params[0]) * self._laplace_scale**k
        if kind in ("two_point_smoothed", "gaussian_mixture_symmetric"):
            return _mixture_raw_moment(*self._mixture, k)
        c = self.params[0]
        m1, sd = self._exp_shape
        central = sum(special.comb(k, j, exact=True) * _trunc_exp_raw(j, c) * (-m1) ** (k - j)
                      for j in range(k + 1))
        return central / sd**k

    @property
    def analytic_moments(self) -> np.ndarray:
        """M_1..M_8 (mean 0, variance 1)."""
        return self.raw_moments[1:9].copy()

    def moment(self, k: int) -> float:
        return float(self.raw_moments[k])

    # -- densities and sampling --------------------------------------------
    @property
    def support(self) -> tuple[float, float]:
        if self.kind == "uniform":
            return -math.sqrt(3.0), math.sqrt(3.0)
        if self.kind == "laplace_truncated":
            b = self.params[0] * self._laplace_scale
            return -b, b
        if self.kind == "exponential_truncated":
            m1, sd = self._exp_shape
            return -m1 / sd, (self.params[0] - m1) / sd
        return -math.inf, math.inf

    def logpdf(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        lo, hi = self.support
        inside = (x >= lo) & (x <= hi)
        kind = self.kind
        if kind == "uniform":
            val = np.full_like(x, -math.log(2 * math.sqrt(3.0)))
        elif kind == "laplace_truncated":
            s, c = self._laplace_scale, self.params[0]
            val = -np.abs(x) / s - math.log(2 * s * -math.expm1(-c))
        elif kind == "exponential_truncated":
            m1, sd = self._exp_shape
            c = self.params[0]
            val = -(x * sd + m1) + math.log(sd) - math.log(-math.expm1(-c))
        else:
            m, sd = self._mixture
            a = stats.norm.logpdf(x, loc=m, scale=sd)
            b = stats.norm.logpdf(x, loc=-m, scale=sd)
            val = np.logaddexp(a, b) - math.log(2.0)
        return np.where(inside, val, -np.inf)

    def pdf(self, x) -> np.ndarray:
        return np.exp(self.logpdf(x))

    def tail(self, t: float) -> float:
        """P(|Y| >= t) for t >= 0."""
        t = float(t)
        kind = self.kind
        if kind == "uniform":
            return max(0.0, 1.0 - t / math.sqrt(3.0))
        if kind == "laplace_truncated":
            c = self.params[0]
            u = t / self._laplace_scale
            if u >= c:
                return 0.0
            return (math.exp(-u) - math.exp(-c)) / -math.expm1(-c)
        if kind == "exponential_truncated":
            m1, sd = self._exp_shape
            c = self.params[0]
            z = -math.expm1(-c)

            def cdf(y):
                y = min(max(y, 0.0), c)
                return -math.expm1(-y) / z

            return max(0.0, 1.0 - cdf(m1 + t * sd)) + cdf(m1 - t * sd) * (m1 - t * sd > 0)
        m, sd = self._mixture
        return float(stats.norm.sf((t - m) / sd) + stats.norm.cdf((-t - m) / sd))

    @cached_property
    def subgaussian_K(self) -> float:
        """Smallest K >= 1 with P(|Y| >= t) <= 2 exp(-t^2/K^2) for all t (on a fine grid)."""
        lo, hi = self.support
        top = min(max(abs(lo), abs(hi)), 40.0)
        best = 1.0
        for t in np.linspace(1e-3, top, 4000):
            p = self.tail(t)
            if p <= 0.0:
                break
            if p >= 2.0:
                continue
            best = max(best, t / math.sqrt(math.log(2.0 / p)))
        return best * (1.0 + 1e-6)

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        kind = self.kind
        if kind == "uniform":
            a = math.sqrt(3.0)
            return rng.uniform(-a, a, size)
        if kind == "laplace_truncated":
            c = self.params[0]
            u = rng.random(size)
            mag = -np.log1p(u * math.expm1(-c))
            sign = np.where(rng.random(size) < 0.5, -1.0, 1.0)
            return sign * mag * self._laplace_scale
        if kind == "exponential_truncated":
            c = self.params[0]
            m1, sd = self._exp_shape
            y = -np.log1p(rng.random(size) * math.expm1(-c))
            return (y - m1) / sd
        m, sd = self._mixture
        sign = np.where(rng.random(size) < 0.5, -1.0, 1.0)
        return sign * m + sd * rng.standard_normal(size)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": list(self.params)}


# -- samples -------------------------------------------------------------------


@dataclass(frozen=True)
class SampleSet:
    """N x n sample matrix plus the seed and the list of transforms applied to it."""

    data: np.ndarray
    seed: int = 0
    lineage: tuple = ()

    def __post_init__(self):
        d = np.array(self.data, dtype=float, copy=True)
        if d.ndim == 1:
            d = d[:, None]
        if d.ndim != 2:
            raise DimensionMismatch("sample data must be 2-d")
        d.setflags(write=False)
        object.__setattr__(self, "data", d)
        object.__setattr__(self, "lineage", tuple(self.lineage))

    @property
    def N(self) -> int:
        return self.data.shape[0]

    @property
    def ambient_dim(self) -> int:
        return self.data.shape[1]

    def with_data(self, data, step: dict) -> "SampleSet":
        return SampleSet(data, seed=self.seed, lineage=self.lineage + (step,))


def _seed_of(rng) -> int:
    ss = getattr(rng.bit_generator, "seed_seq", None)
    ent = getattr(ss, "entropy", None)
    if isinstance(ent, int) and 0 <= ent < 2**64:
        return ent
    return 0


def as_rng(seed_or_rng) -> np.random.Generator:
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return np.random.default_rng(seed_or_rng)


def haar_rotation(rng: np.random.Generator, n: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.where(np.diag(r) < 0, -1.0, 1.0)


@dataclass(frozen=True)
class NgcaInstance:
    n: int
    p: int
    rotation: np.ndarray
    laws: tuple
    D: float | None
    r: int
    D_method: str = "analytic"
    joint_sampler: Callable | None = field(default=None, repr=False, compare=False)

    @property
    def q(self) -> int:
        return self.n - self.p

    @property
    def gaussian_only(self) -> bool:
        return self.q == 0

    @property
    def gamma(self) -> Subspace:
        """Ground-truth Gaussian subspace."""
        return Subspace(self.rotation[:, : self.p])

    @property
    def nongaussian(self) -> Subspace:
        return Subspace(self.rotation[:, self.p:])

    @property
    def subgaussian_K(self) -> float:
        return max([1.0] + [law.subgaussian_K for law in self.laws])

    def marginal_moments(self, a, r: int | None = None) -> np.ndarray:
        """Exact M_0..M_r of <X~, a> for a in latent non-Gaussian coordinates."""
        r = r or self.r
        return mt.linear_combination_moments([law.raw_moments for law in self.laws], a, r)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "p": self.p,
            "q": self.q,
            "r": self.r,
            "D": self.D,
            "D_method": self.D_method,
            "laws": [law.to_dict() for law in self.laws],
            "rotation": self.rotation.tolist(),
            "gamma": self.gamma.basis.tolist(),
        }


def max_moment_gap(moments: np.ndarray, r: int) -> float:
    return max(abs(moments[k] - mt.gaussian_moment(k)) for k in range(3, r + 1))


def _product_gap_min(laws, r: int, probes: np.ndarray) -> float:
    moms = [law.raw_moments for law in laws]

    def gap(v):
        v = np.asarray(v, dtype=float)
        nv = np.linalg.norm(v)
        if nv == 0:
            return np.inf
        return max_moment_gap(mt.linear_combination_moments(moms, v / nv, r), r)

    vals = np.array([gap(a) for a in probes])
    if probes.shape[1] == 1:
        return float(vals.min())
    best = float(vals.min())
    for idx in np.argsort(vals)[:5]:
        res = optimize.minimize(gap, probes[idx], method="Nelder-Mead",
                                options={"xatol": 1e-6, "fatol": 1e-9, "maxiter": 2000})
        best = min(best, float(res.fun))
    return best


def synthesize_instance(n: int, p: int, laws, r: int, rng, joint_sampler=None,
                        n_probe: int = 50) -> NgcaInstance:
    """Draw a Haar rotation and compute the instance's moment gap D.

    D is the minimum over directions a of Gamma-perp of max_{3<=k<=r}
    |M_k(<X~, a>) - M_k(Z)|, computed exactly from cumulant additivity for
    product laws (probe set of axes, ``n_probe`` random directions and a local
    search from the best probes). With ``joint_sampler`` (callable
    ``(rng, N) -> N x q``) D is estimated by Monte Carlo on the probe set.
    """
    rng = as_rng(rng)
    laws = tuple(laws)
    q = n - p
    if not 0 <= p <= n:
        raise ValueError("need 0 <= p <= n")
    if joint_sampler is None and len(laws) != q:
        raise ValueError(f"need {q} laws, got {len(laws)}")
    if r < 3:
        raise ValueError("r must be >= 3")
    rotation = haar_rotation(rng, n)
    if q == 0:
        return NgcaInstance(n=n, p=p, rotation=rotation, laws=(), D=None, r=r, D_method="gaussian_only")

    probes = np.vstack([np.eye(q), rng.standard_normal((n_probe, q))])
    probes /= np.linalg.norm(probes, axis=1, keepdims=True)
    if joint_sampler is None:
        D = _product_gap_min(laws, r, probes)
        method = "analytic"
    else:
        xs = np.asarray(joint_sampler(rng, 100_000), dtype=float)
        D = min(max_moment_gap(np.r_[1.0, mt.empirical_moments(xs @ a, r).values], r) for a in probes)
        method = "monte_carlo"
    if D < 1e-3:
        raise MomentGapTooSmall(f"moment gap D = {D:.3g} < 1e-3")
    return NgcaInstance(n=n, p=p, rotation=rotation, laws=laws, D=float(D), r=r, D_method=method,
                        joint_sampler=joint_sampler)


def draw_samples(inst: NgcaInstance, N: int, rng) -> SampleSet:
    if N < 1:
        raise ValueError("N must be >= 1")
    seed = rng if isinstance(rng, (int, np.integer)) else None
    rng = as_rng(rng)
    z = rng.standard_normal((N, inst.p))
    if inst.joint_sampler is not None:
        xt = np.asarray(inst.joint_sampler(rng, N), dtype=float).reshape(N, inst.q)
    else:
        xt = np.column_stack([law.sample(rng, N) for law in inst.laws]) if inst.q else np.zeros((N, 0))
    latent = np.hstack([z, xt])
    return SampleSet(latent @ inst.rotation.T, seed=int(seed) if seed is not None else _seed_of(rng),
                     lineage=({"op": "draw", "N": N, "n": inst.n},))


def isotropize(s: SampleSet) -> tuple[SampleSet, np.ndarray]:
    """Centre and whiten with the symmetric inverse square root of the empirical covariance."""
    x = s.data
    mu = x.mean(axis=0)
    xc = x - mu
    cov = xc.T @ xc / s.N
    w, v = np.linalg.eigh(cov)
    if s.N <= s.ambient_dim or w[0] <= 1e-10:
        raise SingularCovariance(f"empirical covariance is singular (min eigenvalue {w[0]:.3g})")
    transform = (v * w**-0.5) @ v.T
    out = xc @ transform
    # second pass removes roundoff left by the first
    out -= out.mean(axis=0)
    step = {"op": "whiten", "mean": mu.tolist(), "transform": transform.tolist()}
    return s.with_data(out, step), transform


def smooth_with_gaussian(s: SampleSet, t: float, rng) -> SampleSet:
    """Replace each row x by sqrt(1-t^2) x + t g with fresh standard Gaussian g."""
    if not 0.0 <= t < 1.0:
        raise ValueError("t must lie in [0, 1)")
    rng = as_rng(rng)
    if t == 0.0:
        return s.with_data(s.data, {"op": "smooth", "t": 0.0})
    out = math.sqrt(1.0 - t * t) * s.data + t * rng.standard_normal(s.data.shape)
    return s.with_data(out, {"op": "smooth", "t": float(t)})


def project_samples(s: SampleSet, v: Subspace) -> SampleSet:
    """Coordinates of P_v(x) in the orthonormal basis of v (ambient dim becomes dim v)."""
    if v.ambient_dim != s.ambient_dim:
        raise DimensionMismatch(f"subspace in R^{v.ambient_dim}, samples in R^{s.ambient_dim}")
    return s.with_data(s.data @ v.basis, {"op": "project", "dim": v.dim, "basis": v.basis.tolist()})


def marginal(s: SampleSet, u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if u.shape != (s.ambient_dim,):
        raise DimensionMismatch(f"direction has shape {u.shape}, samples live in R^{s.ambient_dim}")
    return s.data @ u
