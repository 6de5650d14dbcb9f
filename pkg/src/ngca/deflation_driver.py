"""Full algorithm: smooth once, find Gaussian directions one level at a time, deflate."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import moment_toolkit as mt
from .instance_model import SampleSet, as_rng, project_samples, smooth_with_gaussian
from .sphere_descent import DescentConfig, DescentOutcome, grad_des
from .subspace_algebra import Subspace, orthogonal_complement

log = logging.getLogger(__name__)

EPS2_FLOOR = 1e-4


def termination_thresholds(D: float, K: float, r: int, n: int, floor: float = EPS2_FLOOR,
                           grad_floor: float = 0.0) -> tuple[float, float]:
    """(eps1, eps2) from eps2 = 0.5 D^2 A^(-2r), floored; eps1 = max(eps2/10, grad_floor)."""
    if not (D > 0 and K >= 1 and r >= 3):
        raise ValueError("need D > 0, K >= 1, r >= 3")
    A = mt.truncation_level(K, D, r)
    eps2 = max(0.5 * D * D * A ** (-2 * r), floor)
    return max(eps2 / 10.0, grad_floor), eps2


def noise_level(r: int) -> float:
    """Positive root of (r/2) t^2 + r^(r/2) t - 1/2 = 0, clipped to [0.01, 0.3]."""
    if r < 3:
        raise ValueError("r must be >= 3")
    a, b, c = r / 2.0, r ** (r / 2.0), -0.5
    t = (-b + math.sqrt(b * b - 4 * a * c)) / (2 * a)
    return float(min(max(t, 0.01), 0.3))


@dataclass(frozen=True)
class FullConfig:
    descent: DescentConfig = field(default_factory=DescentConfig)
    noise_t_prime: float | None = None  # None: noise_level(r)
    restarts_per_level: int = 5
    D_hint: float = 0.5
    K_hint: float = 2.0
    r: int = 4
    eps_target: float = 0.35
    # accept the lowest-entropy restart when none met both thresholds but some ended below eps2
    accept_below_eps2: bool = True

    def __post_init__(self):
        if self.noise_t_prime is None:
            object.__setattr__(self, "noise_t_prime", noise_level(self.r))
        if not 0 < self.noise_t_prime < 1:
            raise ValueError("noise_t_prime must lie in (0, 1)")
        if self.restarts_per_level < 1:
            raise ValueError("restarts_per_level must be >= 1")


def default_full_config(N: int, n: int, D: float = 0.5, K: float = 2.0, r: int = 4, **descent_kw) -> FullConfig:
    """Thresholds scaled to the estimator's noise at sample size N.

    The entropy threshold is the larger of the theoretical floor and 200/N
    (a few times the null estimator's spread); the gradient threshold is 0.02.
    """
    eps1, eps2 = termination_thresholds(D, K, r, n, floor=max(EPS2_FLOOR, 200.0 / N), grad_floor=0.02)
    return FullConfig(descent=DescentConfig(eps1=eps1, eps2=eps2, **descent_kw), D_hint=D, K_hint=K, r=r)


@dataclass(frozen=True)
class LevelReport:
    level: int
    accepted: bool
    relaxed: bool  # accepted on the entropy threshold alone
    restarts_used: int
    final_entropies: tuple
    outcome: DescentOutcome | None = field(repr=False)
    direction: np.ndarray | None  # original coordinates
    level_basis: np.ndarray = field(repr=False)  # basis of the level's search space, original coordinates

    def to_dict(self) -> dict:
        out = self.outcome
        return {
            "level": self.level,
            "accepted": self.accepted,
            "relaxed": self.relaxed,
            "restarts_used": self.restarts_used,
            "final_entropies": list(self.final_entropies),
            "iterations_used": out.iterations_used if out else 0,
            "final_grad_norm": out.final_grad_norm if out else None,
            "final_entropy": out.final_entropy if out else None,
            "direction": None if self.direction is None else self.direction.tolist(),
        }


@dataclass(frozen=True)
class NgcaResult:
    gaussian_directions: np.ndarray  # n x k, orthonormal columns
    nongaussian_subspace: Subspace
    levels: tuple
    config_used: FullConfig
    samples_used: SampleSet | None = field(default=None, repr=False)

    @property
    def n_gaussian(self) -> int:
        return self.gaussian_directions.shape[1]

    @property
    def gaussian_subspace(self) -> Subspace:
        return Subspace(self.gaussian_directions)

    def to_dict(self) -> dict:
        return {
            "gaussian_directions": self.gaussian_directions.T.tolist(),
            "nongaussian_basis": self.nongaussian_subspace.basis.tolist(),
            "levels": [lv.to_dict() for lv in self.levels],
            "noise_t_prime": self.config_used.noise_t_prime,
            "eps1": self.config_used.descent.eps1,
            "eps2": self.config_used.descent.eps2,
        }


def full_alg(s: SampleSet, cfg: FullConfig, rng) -> NgcaResult:
    """Recover the non-Gaussian subspace of isotropic samples ``s``."""
    rng = as_rng(rng)
    n = s.ambient_dim
    dcfg = cfg.descent
    cur = smooth_with_gaussian(s, cfg.noise_t_prime, rng)
    smoothed = cur
    basis = np.eye(n)
    found = []
    levels = []
    for level in range(n):
        m = cur.ambient_dim
        outcomes = []
        chosen, relaxed = None, False
        for _ in range(cfg.restarts_per_level):
            out = grad_des(cur, dcfg, rng)
            outcomes.append(out)
            if out.success:
                chosen = out
                break
        if chosen is None and cfg.accept_below_eps2:
            best = min(outcomes, key=lambda o: o.final_entropy)
            if best.final_entropy <= dcfg.eps2:
                chosen, relaxed = best, True
        entropies = tuple(o.final_entropy for o in outcomes)
        if chosen is None:
            log.info("level %d: no Gaussian direction (min entropy %.3g)", level, min(entropies))
            levels.append(LevelReport(level, False, False, len(outcomes), entropies,
                                      min(outcomes, key=lambda o: o.final_entropy), None, basis.copy()))
            break
        u = chosen.direction if chosen.direction is not None else chosen.last_point
        u = u / np.linalg.norm(u)
        direction = basis @ u
        levels.append(LevelReport(level, True, relaxed, len(outcomes), entropies, chosen, direction, basis.copy()))
        found.append(direction)
        comp = orthogonal_complement(Subspace(u))
        basis = basis @ comp.basis
        cur = project_samples(cur, comp)
        log.info("level %d: accepted after %d restart(s), entropy %.3g", level, len(outcomes), chosen.final_entropy)
        if m == 1:
            break
    dirs = np.column_stack(found) if found else np.zeros((n, 0))
    return NgcaResult(
        gaussian_directions=dirs,
        nongaussian_subspace=Subspace(basis, check=True),
        levels=tuple(levels),
        config_used=cfg,
        samples_used=smoothed,
    )


def with_descent(cfg: FullConfig, **kw) -> FullConfig:
    return replace(cfg, descent=replace(cfg.descent, **kw))
