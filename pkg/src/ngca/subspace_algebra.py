"""Orthonormal bases, projectors, complements and the projector-distance metric."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, EmptyInput, RankDeficient, UnequalRank

log = logging.getLogger(__name__)

RANK_TOL = 1e-8
ORTHO_TOL = 1e-9


@dataclass(frozen=True)
class Subspace:
    """A k-dimensional subspace of R^n held as an n x k orthonormal basis."""

    basis: np.ndarray
    check: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        b = np.array(self.basis, dtype=float, copy=True)
        if b.ndim == 1:
            b = b[:, None]
        if b.ndim != 2:
            raise DimensionMismatch(f"basis must be 2-d, got shape {b.shape}")
        n, k = b.shape
        if k > n:
            raise DimensionMismatch(f"dim {k} exceeds ambient dim {n}")
        if self.check and k:
            err = np.max(np.abs(b.T @ b - np.eye(k)))
            if err > ORTHO_TOL:
                raise ValueError(f"basis columns not orthonormal (max err {err:.2e})")
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.T

    @classmethod
    def full(cls, n: int) -> "Subspace":
        return cls(np.eye(n))

    @classmethod
    def zero(cls, n: int) -> "Subspace":
        return cls(np.zeros((n, 0)))


def orthonormalize(vectors, tol: float = RANK_TOL) -> Subspace:
    """Gram-Schmidt over the columns of ``vectors`` with one reorthogonalization pass.

    Columns whose residual falls below ``tol`` (relative to the largest input
    norm) are dropped, so the result has the numerical rank of the input.
    """
    v = np.asarray(vectors, dtype=float)
    if v.ndim == 1:
        v = v[:, None]
    if v.size == 0 or v.shape[1] == 0:
        raise EmptyInput("no vectors to orthonormalize")
    n, m = v.shape
    scale = max(np.max(np.linalg.norm(v, axis=0)), np.finfo(float).tiny)
    q = np.zeros((n, 0))
    for j in range(m):
        w = v[:, j].copy()
        for _ in range(2):
            w -= q @ (q.T @ w)
        nrm = np.linalg.norm(w)
        if nrm <= tol * scale:
            continue
        q = np.column_stack([q, w / nrm])
        if q.shape[1] == n:
            break
    if q.shape[1] < m:
        log.info("orthonormalize: effective rank %d of %d inputs", q.shape[1], m)
    return Subspace(q)


def _check_vec(s: Subspace, v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape[0] != s.ambient_dim:
        raise DimensionMismatch(f"vector has dim {v.shape[0]}, subspace lives in R^{s.ambient_dim}")
    return v


def project(s: Subspace, v) -> np.ndarray:
    v = _check_vec(s, v)
    return s.basis @ (s.basis.T @ v)


def orthogonal_complement(s: Subspace) -> Subspace:
    n, k = s.basis.shape
    if k == 0:
        return Subspace.full(n)
    if k == n:
        return Subspace.zero(n)
    # trailing left singular vectors span the complement
    u, _, _ = np.linalg.svd(s.basis, full_matrices=True)
    comp = u[:, k:]
    # one cleanup pass keeps orthogonality to s at roundoff level
    comp -= s.basis @ (s.basis.T @ comp)
    q, _ = np.linalg.qr(comp)
    return Subspace(q)


def subspace_distance(a: Subspace, b: Subspace) -> float:
    """Frobenius norm of the difference of the two orthogonal projectors."""
    if a.ambient_dim != b.ambient_dim:
        raise DimensionMismatch(f"ambient dims differ: {a.ambient_dim} vs {b.ambient_dim}")
    if a.dim != b.dim:
        raise UnequalRank(f"subspace dims differ: {a.dim} vs {b.dim}")
    return float(np.linalg.norm(a.projector() - b.projector(), "fro"))


@dataclass(frozen=True)
class PerturbationReport:
    k: int
    epsilon: float
    distance: float
    bound: float
    holds: bool
    hypothesis_violated: bool
    threshold_25: float
    threshold_50: float


def check_perturbation_bound(lambdas, gammas) -> PerturbationReport:
    """Check d(span lambdas, span gammas) <= 6 k^2 eps^(1/4).

    ``lambdas`` holds k orthonormal columns, ``gammas`` k unit columns with
    eps = max_i (1 - <lambda_i, gamma_i>). The hypothesis eps < 1/(25 k^2)
    is reported, not enforced; the tighter 1/(50 k^2) threshold used when
    the bound is applied during deflation is reported alongside.
    """
    lam = np.asarray(lambdas, dtype=float)
    gam = np.asarray(gammas, dtype=float)
    if lam.ndim == 1:
        lam, gam = lam[:, None], gam[:, None]
    if lam.shape != gam.shape:
        raise DimensionMismatch(f"shape mismatch {lam.shape} vs {gam.shape}")
    k = lam.shape[1]
    eps = float(max(0.0, np.max(1.0 - np.einsum("ij,ij->j", lam, gam))))
    span_l = Subspace(lam)
    span_g = orthonormalize(gam)
    if span_g.dim < k:
        raise RankDeficient(f"gammas have numerical rank {span_g.dim} < {k}")
    dist = subspace_distance(span_l, span_g)
    bound = 6.0 * k**2 * eps**0.25
    t25 = 1.0 / (25 * k**2)
    return PerturbationReport(
        k=k,
        epsilon=eps,
        distance=dist,
        bound=bound,
        holds=dist <= bound + 1e-12,  # roundoff slack for eps = 0
        hypothesis_violated=not (eps < t25),
        threshold_25=t25,
        threshold_50=1.0 / (50 * k**2),
    )


def random_unit_vector(rng: np.random.Generator, n: int) -> np.ndarray:
    if n < 1:
        raise ValueError("n must be >= 1")
    while True:
        g = rng.standard_normal(n)
        nrm = np.linalg.norm(g)
        if nrm > 0:
            return g / nrm


def random_subspace(rng: np.random.Generator, n: int, k: int) -> Subspace:
    if k == 0:
        return Subspace.zero(n)
    q, r = np.linalg.qr(rng.standard_normal((n, k)))
    return Subspace(q * np.sign(np.diag(r)))


def as_unit_vector(v, tol: float = 1e-9) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if abs(np.linalg.norm(v) - 1.0) > tol:
        raise ValueError("vector is not unit norm")
    return v
