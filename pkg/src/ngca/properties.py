"""Seeded property suites that exercise the library's invariants end to end."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special, stats

from . import entropy_estimator as ee
from . import moment_toolkit as mt
from .cumulant_baseline import cumulant_gram
from .instance_model import LAW_KINDS, NonGaussianLaw, SampleSet, isotropize
from .subspace_algebra import (
    check_perturbation_bound,
    orthogonal_complement,
    random_subspace,
    random_unit_vector,
    subspace_distance,
)


@dataclass
class SuiteResult:
    name: str
    passed: bool
    cases: int
    failures: int
    stats: dict = field(default_factory=dict)
    seconds: float = 0.0

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "cases": self.cases,
                "failures": self.failures, "stats": self.stats}

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.cases - self.failures}/{self.cases}"


def metric_axioms(seed: int = 0, cases: int = 100, tol: float = 1e-9) -> SuiteResult:
    """Symmetry, complement invariance, triangle inequality, projector idempotence and symmetry."""
    rng = np.random.default_rng(seed)
    fails = 0
    worst = 0.0
    for _ in range(cases):
        n = int(rng.integers(2, 13))
        k = int(rng.integers(1, n))
        a, b, c = (random_subspace(rng, n, k) for _ in range(3))
        dab, dba = subspace_distance(a, b), subspace_distance(b, a)
        dcomp = subspace_distance(orthogonal_complement(a), orthogonal_complement(b))
        tri = dab - subspace_distance(a, c) - subspace_distance(c, b)
        p = a.projector()
        errs = [abs(dab - dba), abs(dab - dcomp), max(tri, 0.0),
                np.max(np.abs(p @ p - p)), np.max(np.abs(p - p.T))]
        worst = max(worst, max(errs))
        fails += max(errs) > tol
    return SuiteResult("metric_axioms", fails == 0, cases, fails, {"max_error": worst})


def _gaussian_scaled_entropy_quad(lam: float) -> float:
    # independent of the closed form: integrate f log(f/g) for f = N(0, lam^2)
    def integrand(x):
        lf = stats.norm.logpdf(x, scale=lam)
        return math.exp(lf) * (lf - stats.norm.logpdf(x))

    val, _ = integrate.quad(integrand, -np.inf, np.inf, epsabs=1e-12, epsrel=1e-12, limit=400)
    return val


def entropy_scaling(seed: int = 0, N: int = 100_000, lams=(0.5, 1.0, 2.0), est_lams=(0.5, 0.8, 1.25, 2.0),
                    est_tol: float = 0.05, quad_tol: float = 1e-6) -> SuiteResult:
    rng = np.random.default_rng(seed)
    fails, cases = 0, 0
    stats_ = {}
    for lam in lams:
        exact = ee.analytic_relative_entropy(ee.scaled_gaussian(lam))
        quad = _gaussian_scaled_entropy_quad(lam)
        err = abs(exact - quad)
        stats_[f"analytic_err_{lam}"] = err
        cases += 1
        fails += err > quad_tol
    z = rng.standard_normal(N)
    cfg = ee.default_config(N)
    for lam in est_lams:
        est = ee.relative_entropy(lam * z, cfg, variance_range=(0.1, 10.0)).value
        err = abs(est - ee.analytic_relative_entropy(ee.scaled_gaussian(lam)))
        stats_[f"estimator_err_{lam}"] = err
        cases += 1
        fails += err > est_tol
    return SuiteResult("entropy_scaling", fails == 0, cases, fails, stats_)


def moment_mixing(seed: int = 0, N: int = 1_000_000, ts=(0.2, 0.5, 0.8), ks=(3, 4),
                  n_se: float = 4.0, kinds=LAW_KINDS) -> SuiteResult:
    """Closed-form gap of tY + sqrt(1-t^2) Z against Monte Carlo for each law."""
    rng = np.random.default_rng(seed)
    fails, cases = 0, 0
    worst = 0.0
    for kind in kinds:
        law = NonGaussianLaw(kind)
        moms = law.raw_moments[1:]
        for t in ts:
            w = t * law.sample(rng, N) + math.sqrt(1 - t * t) * rng.standard_normal(N)
            for k in ks:
                wk = w**k
                emp = wk.mean() - mt.gaussian_moment(k)
                se = wk.std() / math.sqrt(N)
                z = abs(emp - mt.moment_mixing(moms, t, k)) / se
                worst = max(worst, z)
                cases += 1
                fails += z > n_se
    return SuiteResult("moment_mixing", fails == 0, cases, fails, {"max_z": worst})


def _perturbed(rng, lam: np.ndarray, eps: float) -> np.ndarray:
    n, k = lam.shape
    out = np.empty_like(lam)
    for i in range(k):
        e = eps if i == 0 else eps * rng.random()
        w = rng.standard_normal(n)
        w -= lam[:, i] * (lam[:, i] @ w)
        w /= np.linalg.norm(w)
        c = 1.0 - e
        out[:, i] = c * lam[:, i] + math.sqrt(1.0 - c * c) * w
    return out


def perturbation_bound(seed: int = 0, trials: int = 200, ks=(2, 5), ns=(8, 16), epss=(1e-3, 1e-5)) -> SuiteResult:
    rng = np.random.default_rng(seed)
    combos = [(k, n, e) for k in ks for n in ns for e in epss]
    fails = 0
    worst = 0.0
    violated = 0
    for i in range(trials):
        k, n, eps = combos[i % len(combos)]
        lam = random_subspace(rng, n, k).basis
        rep = check_perturbation_bound(lam, _perturbed(rng, lam, eps))
        worst = max(worst, rep.distance / rep.bound)
        violated += rep.hypothesis_violated
        fails += not rep.holds
    return SuiteResult("perturbation_bound", fails == 0, trials, fails,
                       {"max_distance_over_bound": worst, "hypothesis_violated": violated})


def cap_probability(n: int, alpha: float) -> float:
    """P(|<x, v>| >= alpha) for x uniform on the unit sphere in R^n, by quadrature."""
    # density of one coordinate is c_n (1 - x^2)^((n-3)/2) on [-1, 1]
    logc = special.gammaln(n / 2) - 0.5 * math.log(math.pi) - special.gammaln((n - 1) / 2)
    val, _ = integrate.quad(lambda x: (1 - x * x) ** ((n - 3) / 2), alpha, 1.0, epsabs=1e-13, epsrel=1e-12)
    return 2.0 * math.exp(logc) * val


def spherical_concentration(seed: int = 0, n: int = 20, draws: int = 100_000, dim_v1: int = 2) -> SuiteResult:
    """Empirical P(|P_V1 r| / |P_V2 r| >= 1/n^2) against the one-dimensional cap volume.

    The cap volume bounds the event from below for every nonempty V1 (it is
    the worst case). With ``dim_v1 = 1`` the two probabilities nearly
    coincide, so that case is reported as agreement within 4 standard errors.
    """
    rng = np.random.default_rng(seed)
    alpha = 1.0 / n**2
    bound = cap_probability(n, alpha)
    r = rng.standard_normal((draws, n))
    r /= np.linalg.norm(r, axis=1, keepdims=True)
    out = {"cap_bound": bound}
    ok = True
    for d in sorted({dim_v1, 1}):
        v1 = random_subspace(rng, n, d)
        v2 = orthogonal_complement(v1)
        ratio = np.linalg.norm(r @ v1.basis, axis=1) / np.linalg.norm(r @ v2.basis, axis=1)
        p = float(np.mean(ratio >= alpha))
        se = math.sqrt(max(p * (1 - p), 1.0 / draws) / draws)
        out[f"empirical_dim{d}"] = p
        out[f"se_dim{d}"] = se
        if d == dim_v1:
            ok &= p >= bound
        if d == 1:
            ok &= abs(p - bound) <= 4 * se
    return SuiteResult("spherical_concentration", bool(ok), 1, int(not ok), out)


def cumulant_equivariance(seed: int = 0, n: int = 5, N: int = 200_000, pairs: int = 3) -> SuiteResult:
    """gram(QX) = Q gram(X) Q^T up to the noise budget 8 n^2 / sqrt(N)."""
    rng = np.random.default_rng(seed)
    fails = 0
    worst = 0.0
    budget = 8 * n * n / math.sqrt(N)
    for _ in range(pairs):
        x = np.column_stack([NonGaussianLaw("uniform").sample(rng, N), rng.standard_normal((N, n - 1))])
        s, _ = isotropize(SampleSet(x))
        q = random_subspace(rng, n, n).basis
        g1 = cumulant_gram(s)
        g2 = cumulant_gram(SampleSet(s.data @ q.T))
        err = float(np.linalg.norm(g2 - q @ g1 @ q.T, "fro"))
        worst = max(worst, err)
        fails += err > budget
    return SuiteResult("cumulant_equivariance", fails == 0, pairs, fails, {"max_error": worst, "budget": budget})


SUITES = {
    "metric_axioms": metric_axioms,
    "entropy_scaling": entropy_scaling,
    "moment_mixing": moment_mixing,
    "perturbation_bound": perturbation_bound,
    "spherical_concentration": spherical_concentration,
    "cumulant_equivariance": cumulant_equivariance,
}


def run_property_suite(selector: str | None = None, seed: int = 0) -> list[SuiteResult]:
    names = list(SUITES) if selector in (None, "all") else [selector]
    unknown = [s for s in names if s not in SUITES]
    if unknown:
        raise KeyError(f"unknown suite {unknown[0]!r}; choose from {sorted(SUITES)}")
    out = []
    for name in names:
        t0 = time.perf_counter()
        res = SUITES[name](seed=seed)
        res.seconds = time.perf_counter() - t0
        out.append(res)
    return out
