"""Cumulant-kernel baseline: Gaussian directions annihilate all cumulants of order 3 and 4."""
from __future__ import annotations

import csv
import itertools
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import NotIsotropic
from .instance_model import SampleSet
from .subspace_algebra import Subspace

MAX_DIM = 32
ISO_TOL = 1e-2


class DegenerateSpectrum(UserWarning):
    """No factor-10 gap separates the kernel from the rest of the spectrum."""


@dataclass(frozen=True)
class CumulantGram:
    order_set: tuple
    gram: np.ndarray
    eigvals: np.ndarray  # ascending
    eigvecs: np.ndarray
    noise_floor: float
    threshold: float
    kernel_dim: int
    gap_ratio: float
    reliable: bool

    def to_dict(self) -> dict:
        return {
            "orders": list(self.order_set),
            "eigvals": self.eigvals.tolist(),
            "noise_floor": self.noise_floor,
            "threshold": self.threshold,
            "kernel_dim": self.kernel_dim,
            "gap_ratio": self.gap_ratio,
            "reliable": self.reliable,
        }


def _centered(s: SampleSet) -> np.ndarray:
    x = s.data
    if s.N < 1000:
        raise ValueError("need N >= 1000")
    if s.ambient_dim > MAX_DIM:
        raise ValueError(f"dense tensors limited to n <= {MAX_DIM}")
    x = x - x.mean(axis=0)
    assert np.linalg.norm(x.mean(axis=0)) <= 1e-6
    return x


def _canonical(t: np.ndarray) -> np.ndarray:
    # copy every entry from its sorted multi-index so the tensor is exactly symmetric
    idx = np.sort(np.indices(t.shape).reshape(t.ndim, -1), axis=0)
    return t[tuple(idx)].reshape(t.shape)


def joint_cumulant_order3(s: SampleSet) -> np.ndarray:
    x = _centered(s)
    N, n = x.shape
    pair = (x[:, :, None] * x[:, None, :]).reshape(N, n * n)
    return _canonical((pair.T @ x / N).reshape(n, n, n))


def joint_cumulant_order4(s: SampleSet) -> np.ndarray:
    x = _centered(s)
    N, n = x.shape
    cov = x.T @ x / N
    err = np.max(np.abs(cov - np.eye(n)))
    if err > ISO_TOL:
        raise NotIsotropic(f"covariance differs from I by {err:.3g} in max norm")
    pair = (x[:, :, None] * x[:, None, :]).reshape(N, n * n)
    m4 = (pair.T @ pair / N).reshape(n, n, n, n)
    eye = np.eye(n)
    iso = (np.einsum("ij,kl->ijkl", eye, eye) + np.einsum("ik,jl->ijkl", eye, eye)
           + np.einsum("il,jk->ijkl", eye, eye))
    return _canonical(m4 - iso)


def symmetrize(t: np.ndarray) -> np.ndarray:
    perms = list(itertools.permutations(range(t.ndim)))
    return sum(np.transpose(t, p) for p in perms) / len(perms)


def gaussian_noise_floor(n: int, N: int, orders) -> float:
    """Mean eigenvalue of the Gram matrix expected on raw Gaussian data.

    Each tensor entry has null variance (product of Gaussian moments of its
    index pattern)/N; summing over entries and dividing by n gives the mean
    of the Gram's diagonal. Whitening removes part of that variance, so on
    isotropized data this is a conservative budget.
    """
    total = 0.0
    if 3 in orders:
        total += n * 15 + 3 * n * (n - 1) * 3 + n * (n - 1) * (n - 2)
    if 4 in orders:
        total += (n * 96 + 4 * n * (n - 1) * 15 + 3 * n * (n - 1) * 8
                  + 6 * n * (n - 1) * (n - 2) * 3 + n * (n - 1) * (n - 2) * (n - 3))
    return total / (n * N)


def cumulant_gram(s: SampleSet, orders=(3, 4)) -> np.ndarray:
    orders = tuple(sorted(set(orders)))
    if not orders or not set(orders) <= {3, 4}:
        raise ValueError("orders must be a nonempty subset of {3, 4}")
    n = s.ambient_dim
    gram = np.zeros((n, n))
    if 3 in orders:
        m = joint_cumulant_order3(s).reshape(n * n, n)
        gram += m.T @ m
    if 4 in orders:
        m = joint_cumulant_order4(s).reshape(n**3, n)
        gram += m.T @ m
    return (gram + gram.T) / 2


def cumulant_kernel(s: SampleSet, orders=(3, 4), kernel_tol: float = 0.05) -> tuple[Subspace, CumulantGram]:
    """Gaussian subspace estimate: eigenvectors of the cumulant Gram with small eigenvalues.

    An eigenvalue belongs to the kernel when it is at most
    max(kernel_tol * largest eigenvalue, 10 * Gaussian noise floor).
    A ``DegenerateSpectrum`` warning is issued (and the report marked
    unreliable) when the kernel is not separated by a factor of 10.
    """
    orders = tuple(sorted(set(orders)))
    gram = cumulant_gram(s, orders)
    w, v = np.linalg.eigh(gram)
    floor = gaussian_noise_floor(s.ambient_dim, s.N, orders)
    thr = max(kernel_tol * w[-1], 10.0 * floor)
    k = int(np.count_nonzero(w <= thr))
    if 0 < k < w.size:
        ratio = float(w[k] / max(w[k - 1], 1e-300))
    else:
        ratio = float("inf")
    reliable = ratio >= 10.0
    if not reliable:
        warnings.warn(f"cumulant spectrum gap ratio {ratio:.2f} < 10", DegenerateSpectrum, stacklevel=2)
    report = CumulantGram(orders, gram, w, v, floor, thr, k, ratio, reliable)
    return Subspace(v[:, :k]), report


def write_spectrum_csv(report: CumulantGram, path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "eigenvalue"])
        for i, val in enumerate(report.eigvals):
            w.writerow([i, repr(float(val))])
