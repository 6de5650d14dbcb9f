import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ngca.errors import DimensionMismatch, EmptyInput, RankDeficient, UnequalRank
from ngca.subspace_algebra import (
    Subspace,
    check_perturbation_bound,
    orthogonal_complement,
    orthonormalize,
    project,
    random_subspace,
    random_unit_vector,
    subspace_distance,
)

seeds = st.integers(0, 2**32 - 1)


def sub_pair(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 10))
    k = int(rng.integers(1, n))
    return rng, n, k


class TestOrthonormalize:
    def test_identity_columns(self):
        s = orthonormalize(np.eye(3))
        assert np.allclose(s.basis, np.eye(3))

    def test_drops_dependent_column(self):
        v = np.array([[1.0, 2.0, 0.0], [0.0, 0.0, 1.0], [0.0, 0.0, 0.0]])
        s = orthonormalize(v)
        assert s.dim == 2

    def test_empty_raises(self):
        with pytest.raises(EmptyInput):
            orthonormalize(np.zeros((3, 0)))

    def test_nearly_parallel_columns(self):
        v = np.array([[1.0, 1.0], [0.0, 1e-12]])
        assert orthonormalize(v).dim == 1

    @settings(max_examples=40, deadline=None)
    @given(seeds)
    def test_span_preserved(self, seed):
        rng, n, k = sub_pair(seed)
        v = rng.standard_normal((n, k))
        s = orthonormalize(v)
        assert s.dim == k
        assert np.allclose(s.basis.T @ s.basis, np.eye(k), atol=1e-10)
        assert np.allclose(s.projector() @ v, v, atol=1e-9)


class TestProjectAndComplement:
    def test_project_onto_axis(self):
        s = Subspace(np.array([[1.0], [0.0], [0.0]]))
        assert np.allclose(project(s, [3.0, 4.0, 5.0]), [3.0, 0.0, 0.0])

    def test_project_dim_mismatch(self):
        with pytest.raises(DimensionMismatch):
            project(Subspace.full(3), np.ones(4))

    def test_complement_of_full_and_zero(self):
        assert orthogonal_complement(Subspace.full(4)).dim == 0
        assert orthogonal_complement(Subspace.zero(4)).dim == 4

    @settings(max_examples=40, deadline=None)
    @given(seeds)
    def test_complement_properties(self, seed):
        rng, n, k = sub_pair(seed)
        s = random_subspace(rng, n, k)
        c = orthogonal_complement(s)
        assert c.dim == n - k
        assert np.max(np.abs(s.basis.T @ c.basis)) < 1e-12
        assert np.allclose(s.projector() + c.projector(), np.eye(n), atol=1e-12)

    def test_non_orthonormal_basis_rejected(self):
        with pytest.raises(ValueError):
            Subspace(np.array([[1.0, 1.0], [0.0, 1.0]]))


class TestDistance:
    def test_same_subspace_zero(self, rng):
        s = random_subspace(rng, 6, 2)
        assert subspace_distance(s, s) < 1e-12

    def test_orthogonal_lines(self):
        a = Subspace(np.array([[1.0], [0.0]]))
        b = Subspace(np.array([[0.0], [1.0]]))
        assert subspace_distance(a, b) == pytest.approx(np.sqrt(2), abs=1e-12)

    def test_errors(self, rng):
        with pytest.raises(DimensionMismatch):
            subspace_distance(random_subspace(rng, 3, 1), random_subspace(rng, 4, 1))
        with pytest.raises(UnequalRank):
            subspace_distance(random_subspace(rng, 4, 1), random_subspace(rng, 4, 2))

    def test_line_angle_oracle(self):
        # two lines at angle theta: ||P1 - P2||_F = sqrt(2) sin(theta)
        theta = 0.3
        a = Subspace(np.array([[1.0], [0.0]]))
        b = Subspace(np.array([[np.cos(theta)], [np.sin(theta)]]))
        assert subspace_distance(a, b) == pytest.approx(np.sqrt(2) * np.sin(theta), abs=1e-12)

    @settings(max_examples=60, deadline=None)
    @given(seeds)
    def test_metric_axioms(self, seed):
        rng, n, k = sub_pair(seed)
        a, b, c = (random_subspace(rng, n, k) for _ in range(3))
        dab = subspace_distance(a, b)
        assert dab == pytest.approx(subspace_distance(b, a), abs=1e-12)
        assert dab == pytest.approx(subspace_distance(orthogonal_complement(a), orthogonal_complement(b)), abs=1e-9)
        assert dab <= subspace_distance(a, c) + subspace_distance(c, b) + 1e-9
        assert 0 <= dab <= np.sqrt(2 * min(k, n - k)) + 1e-9

    @settings(max_examples=30, deadline=None)
    @given(seeds)
    def test_principal_angle_oracle(self, seed):
        # ||P_a - P_b||_F^2 = 2 sum sin^2(principal angles), angles from SVD of a^T b
        rng, n, k = sub_pair(seed)
        a, b = random_subspace(rng, n, k), random_subspace(rng, n, k)
        cosines = np.clip(np.linalg.svd(a.basis.T @ b.basis, compute_uv=False), 0, 1)
        assert subspace_distance(a, b) ** 2 == pytest.approx(2 * np.sum(1 - cosines**2), abs=1e-10)


class TestPerturbation:
    def test_identical_vectors(self, rng):
        lam = random_subspace(rng, 8, 3).basis
        rep = check_perturbation_bound(lam, lam)
        assert rep.epsilon == pytest.approx(0.0, abs=1e-12)
        assert rep.distance < 1e-9 and rep.holds and not rep.hypothesis_violated

    def test_thresholds_reported(self, rng):
        lam = random_subspace(rng, 8, 2).basis
        rep = check_perturbation_bound(lam, lam)
        assert rep.threshold_25 == pytest.approx(1 / 100)
        assert rep.threshold_50 == pytest.approx(1 / 200)

    def test_hypothesis_flag(self):
        lam = np.eye(3)[:, :1]
        gam = np.array([[np.cos(1.0)], [np.sin(1.0)], [0.0]])
        assert check_perturbation_bound(lam, gam).hypothesis_violated

    def test_rank_deficient(self):
        lam = np.eye(3)[:, :2]
        u = np.array([1.0, 1.0, 0.0]) / np.sqrt(2)
        with pytest.raises(RankDeficient):
            check_perturbation_bound(lam, np.column_stack([u, u]))

    @settings(max_examples=40, deadline=None)
    @given(seeds, st.sampled_from([1e-3, 1e-4, 1e-6]))
    def test_bound_holds(self, seed, eps):
        from ngca.properties import _perturbed

        rng = np.random.default_rng(seed)
        k = int(rng.integers(1, 5))
        n = int(rng.integers(k + 1, 14))
        lam = random_subspace(rng, n, k).basis
        rep = check_perturbation_bound(lam, _perturbed(rng, lam, eps))
        assert rep.epsilon <= eps + 1e-12
        assert rep.holds


def test_random_unit_vector_norm(rng):
    for n in (1, 2, 17):
        assert np.linalg.norm(random_unit_vector(rng, n)) == pytest.approx(1.0, abs=1e-12)
