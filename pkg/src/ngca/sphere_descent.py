"""Finite-difference gradient of u -> S(<X, u>) and projected gradient descent on the sphere."""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import entropy_estimator as ee
from .errors import DegenerateStep, DimensionMismatch
from .instance_model import SampleSet, as_rng
from .subspace_algebra import Subspace, random_unit_vector

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class DescentConfig:
    eta: float = 0.25
    eps1: float = 0.02
    eps2: float = 1e-3
    max_iters: int = 400
    fd_step_h: float = 0.05
    grad_repeats: int = 3
    entropy_cfg: ee.HistogramConfig | None = None  # None: default_config(N) at run time
    # stop early once the best entropy has not improved by stall_tol for this many iterations
    patience: int | None = 40
    stall_tol: float = 1e-4
    min_eta: float = 1e-3

    def __post_init__(self):
        if not (self.eta > 0 and self.eps1 > 0 and self.eps2 > 0):
            raise ValueError("eta, eps1, eps2 must be positive")
        if not 1e-6 < self.fd_step_h < 0.5:
            raise ValueError("fd_step_h must lie in (1e-6, 0.5)")
        if self.max_iters < 1 or self.grad_repeats < 1:
            raise ValueError("max_iters and grad_repeats must be >= 1")

    def histogram(self, N: int) -> ee.HistogramConfig:
        base = self.entropy_cfg or ee.default_config(max(N, 1000))
        return base.with_(shifts=self.grad_repeats)


@dataclass(frozen=True)
class TraceRow:
    grad_norm: float
    entropy: float
    entropy_se: float
    u: np.ndarray


@dataclass(frozen=True)
class DescentOutcome:
    status: str  # "success" | "failure"
    direction: np.ndarray | None
    final_grad_norm: float
    final_entropy: float
    iterations_used: int
    trace: tuple = field(default=(), repr=False)
    last_point: np.ndarray | None = field(default=None, repr=False)

    @property
    def success(self) -> bool:
        return self.status == "success"


def _entropy_and_gradient(x: np.ndarray, u: np.ndarray, cfg: DescentConfig,
                          hist: ee.HistogramConfig) -> tuple[float, np.ndarray]:
    n = u.size
    h = cfg.fd_step_h
    eye = np.eye(n)
    dirs = np.column_stack([u, u[:, None] + h * eye, u[:, None] - h * eye])
    vals = ee.entropy_columns(x @ dirs, hist)
    grad = (vals[1: n + 1] - vals[n + 1:]) / (2 * h)
    return float(vals[0]), grad


def estimate_gradient(s: SampleSet, u, cfg: DescentConfig) -> np.ndarray:
    """Central-difference gradient of the estimated relative entropy at u.

    Each of the 2n evaluations uses the same samples and averages
    ``grad_repeats`` shifted-histogram estimates.
    """
    u = np.asarray(u, dtype=float)
    if u.shape != (s.ambient_dim,):
        raise DimensionMismatch(f"u has shape {u.shape}, samples live in R^{s.ambient_dim}")
    return _entropy_and_gradient(s.data, u, cfg, cfg.histogram(s.N))[1]


def projected_step(u, delta, eta: float) -> np.ndarray:
    v = np.asarray(u, dtype=float) - eta * np.asarray(delta, dtype=float)
    nrm = np.linalg.norm(v)
    if nrm <= 1e-12:
        raise DegenerateStep("step lands at the origin")
    return v / nrm


def grad_des(s: SampleSet, cfg: DescentConfig, rng, u0=None) -> DescentOutcome:
    """Projected gradient descent of the marginal relative entropy from a random start.

    Accepts as soon as the gradient norm is at most eps1 and the entropy at
    most eps2. Never raises on non-convergence; returns a failure outcome.
    """
    rng = as_rng(rng)
    n = s.ambient_dim
    if n < 1:
        raise DimensionMismatch("ambient dimension must be >= 1")
    x = s.data
    hist = cfg.histogram(s.N)
    u = random_unit_vector(rng, n) if u0 is None else np.asarray(u0, dtype=float) / np.linalg.norm(u0)
    eta = cfg.eta
    trace = []
    prev = math.inf
    rises = 0
    best, best_at = math.inf, 0
    status = "failure"
    for it in range(cfg.max_iters):
        S, g = _entropy_and_gradient(x, u, cfg, hist)
        gn = float(np.linalg.norm(g))
        se = ee._std_error(x @ u, hist)
        trace.append(TraceRow(gn, S, se, u.copy()))
        if gn <= cfg.eps1 and S <= cfg.eps2:
            status = "success"
            break
        if cfg.patience is not None:
            if S < best - cfg.stall_tol:
                best, best_at = S, it
            elif it - best_at >= cfg.patience:
                break
        rises = rises + 1 if S > prev else 0
        if rises >= 2:
            eta = max(eta / 2, cfg.min_eta)
            rises = 0
        prev = S
        if n == 1:
            break
        u = projected_step(u, g, eta)
    last = trace[-1]
    log.debug("grad_des %s after %d iterations: |g|=%.3g S=%.3g", status, len(trace), last.grad_norm, last.entropy)
    return DescentOutcome(
        status=status,
        direction=last.u.copy() if status == "success" else None,
        final_grad_norm=last.grad_norm,
        final_entropy=last.entropy,
        iterations_used=len(trace),
        trace=tuple(trace),
        last_point=last.u.copy(),
    )


def trace_rows(outcome: DescentOutcome, gamma: Subspace | None = None, lift=None) -> list[dict]:
    """Trace as dicts; ``lift`` maps iterates into gamma's coordinates (e.g. a deflation level basis)."""
    rows = []
    for i, t in enumerate(outcome.trace):
        row = {"iter": i, "grad_norm": t.grad_norm, "entropy": t.entropy}
        if gamma is not None:
            u = t.u if lift is None else np.asarray(lift) @ t.u
            row["u_proj_gamma"] = float(np.linalg.norm(gamma.basis.T @ u))
        rows.append(row)
    return rows


def write_trace_csv(outcome: DescentOutcome, path, gamma: Subspace | None = None, lift=None) -> None:
    rows = trace_rows(outcome, gamma, lift)
    cols = ["iter", "grad_norm", "entropy"] + (["u_proj_gamma"] if rows and "u_proj_gamma" in rows[0] else [])
    with Path(path).open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=cols)
        w.writeheader()
        for row in rows:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
