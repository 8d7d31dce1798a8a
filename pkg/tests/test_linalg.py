import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eigenplace import (
    NumericFailureError,
    OrthonormalBasis,
    min_eigenspace_projector,
    nullspace_projector,
    orthonormalize,
    secular_min_eigenvalue,
    sym_eigendecompose,
)
from conftest import random_spd, random_symmetric

GOLDEN_PLUS = (3.0 + math.sqrt(5.0)) / 2.0
GOLDEN_MINUS = (3.0 - math.sqrt(5.0)) / 2.0


def check_eigensystem(a, eig):
    a = np.asarray(a, dtype=float)
    lam, u = eig.eigenvalues, eig.eigenvectors
    assert np.all(lam[:-1] >= lam[1:])
    assert np.max(np.abs(u.T @ u - np.eye(len(lam)))) <= 1e-10
    recon = u @ np.diag(lam) @ u.T
    assert np.max(np.abs(recon - a)) <= 1e-9 * max(1.0, np.max(np.abs(a)))


class TestSymEigendecompose:
    def test_identity(self):
        eig = sym_eigendecompose(np.eye(2))
        np.testing.assert_allclose(eig.eigenvalues, [1.0, 1.0])
        check_eigensystem(np.eye(2), eig)

    def test_hand_2x2(self):
        eig = sym_eigendecompose([[2.0, 1.0], [1.0, 1.0]])
        np.testing.assert_allclose(
            eig.eigenvalues, [GOLDEN_PLUS, GOLDEN_MINUS], atol=1e-12
        )

    def test_hand_rank_one_update(self):
        # diag(3,1) + [1,1][1,1]^T = [[4,1],[1,2]]
        eig = sym_eigendecompose([[4.0, 1.0], [1.0, 2.0]])
        np.testing.assert_allclose(
            eig.eigenvalues, [3.0 + math.sqrt(2.0), 3.0 - math.sqrt(2.0)],
            atol=1e-12,
        )

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            sym_eigendecompose([[1.0, np.nan], [np.nan, 1.0]])

    def test_rejects_asymmetric(self):
        with pytest.raises(ValueError):
            sym_eigendecompose([[1.0, 0.5], [0.0, 1.0]])

    def test_deterministic(self):
        rs = np.random.default_rng(7)
        a = random_symmetric(rs, 6)
        e1 = sym_eigendecompose(a)
        e2 = sym_eigendecompose(a)
        assert np.array_equal(e1.eigenvalues, e2.eigenvalues)
        assert np.array_equal(e1.eigenvectors, e2.eigenvectors)

    def test_sign_convention(self):
        eig = sym_eigendecompose([[2.0, 0.0], [0.0, 1.0]])
        for j in range(2):
            col = eig.eigenvectors[:, j]
            assert col[np.argmax(np.abs(col))] > 0

    @settings(max_examples=60, deadline=None)
    @given(st.integers(min_value=0, max_value=10_000))
    def test_reconstruction_random_8x8(self, seed):
        a = random_symmetric(np.random.default_rng(seed), 8)
        check_eigensystem(a, sym_eigendecompose(a))


class TestOrthonormalize:
    def test_already_orthonormal(self):
        basis = orthonormalize([np.array([1.0, 0.0]), np.array([0.0, 1.0])])
        np.testing.assert_allclose(basis.vectors, np.eye(2))

    def test_hand_gram_schmidt(self):
        basis = orthonormalize([np.array([2.0, 0.0]), np.array([1.0, 1.0])])
        np.testing.assert_allclose(basis.vectors, np.eye(2), atol=1e-12)

    def test_dependent_vector_dropped(self):
        basis = orthonormalize([np.array([1.0, 0.0]), np.array([2.0, 0.0])])
        assert basis.count == 1
        np.testing.assert_allclose(basis.vectors, [[1.0, 0.0]])

    def test_empty_input(self):
        basis = orthonormalize([], dim=3)
        assert basis.count == 0 and basis.dim == 3

    def test_span_preserved(self):
        rs = np.random.default_rng(3)
        vecs = [rs.normal(size=5) for _ in range(3)]
        basis = orthonormalize(vecs)
        v = basis.vectors
        assert np.max(np.abs(v @ v.T - np.eye(3))) <= 1e-10
        for x in vecs:  # each input reconstructs from the basis
            np.testing.assert_allclose(v.T @ (v @ x), x, atol=1e-9)


class TestNullspaceProjector:
    def test_empty_basis(self):
        p = nullspace_projector(OrthonormalBasis(dim=2, vectors=np.zeros((0, 2))))
        np.testing.assert_allclose(p.matrix, np.eye(2))
        assert p.subspace_dim == 2

    def test_hand_projector(self):
        b = orthonormalize([np.array([1.0, 1.0])])
        p = nullspace_projector(b)
        np.testing.assert_allclose(
            p.matrix, [[0.5, -0.5], [-0.5, 0.5]], atol=1e-12
        )
        assert p.subspace_dim == 1

    def test_full_basis(self):
        p = nullspace_projector(orthonormalize([np.eye(2)[0], np.eye(2)[1]]))
        np.testing.assert_allclose(p.matrix, np.zeros((2, 2)), atol=1e-12)
        assert p.subspace_dim == 0

    @settings(max_examples=40, deadline=None)
    @given(st.integers(min_value=0, max_value=10_000),
           st.integers(min_value=1, max_value=5))
    def test_projector_invariants(self, seed, count):
        rs = np.random.default_rng(seed)
        basis = orthonormalize([rs.normal(size=6) for _ in range(count)])
        p = nullspace_projector(basis)
        m = p.matrix
        assert np.max(np.abs(m - m.T)) <= 1e-12
        assert np.max(np.abs(m @ m - m)) <= 1e-9
        assert abs(np.trace(m) - p.subspace_dim) <= 1e-8


class TestMinEigenspaceProjector:
    def test_simple_minimum(self):
        eig = sym_eigendecompose(np.diag([3.0, 1.0]))
        p, mu = min_eigenspace_projector(eig)
        assert mu == 1
        np.testing.assert_allclose(p.matrix, np.diag([0.0, 1.0]), atol=1e-12)

    def test_fully_degenerate(self):
        eig = sym_eigendecompose(2.0 * np.eye(2))
        p, mu = min_eigenspace_projector(eig)
        assert mu == 2
        np.testing.assert_allclose(p.matrix, np.eye(2), atol=1e-12)

    def test_tolerance_clustering(self):
        eig = sym_eigendecompose(np.diag([5.0, 1.0 + 1e-12, 1.0]))
        p, mu = min_eigenspace_projector(eig, mult_tol=1e-8)
        assert mu == 2
        expected = np.diag([0.0, 1.0, 1.0])
        np.testing.assert_allclose(p.matrix, expected, atol=1e-10)


class TestSecularMinEigenvalue:
    def test_lemma2_case(self):
        assert secular_min_eigenvalue([3.0, 1.0], [0.0, 1.0], 1) == pytest.approx(
            2.0, abs=1e-10
        )

    def test_hand_root(self):
        got = secular_min_eigenvalue([3.0, 1.0], [1.0, 1.0], 1)
        assert got == pytest.approx(3.0 - math.sqrt(2.0), abs=1e-10)

    def test_zero_update(self):
        assert secular_min_eigenvalue([3.0, 1.0], [0.0, 0.0], 1) == 1.0

    def test_root_past_unmoved_eigenvalue(self):
        # z is zero at the next eigenvalue up: the moving root jumps past it
        # and interlacing pins the answer there.
        got = secular_min_eigenvalue([3.0, 1.0], [0.0, 2.0], 1)
        dense = sym_eigendecompose(np.diag([3.0, 1.0]) + np.outer([0, 2], [0, 2]))
        assert got == pytest.approx(dense.eigenvalues[1], abs=1e-10)

    def test_full_cluster(self):
        # mu_n = n: explicit root lam_min + |z|^2
        assert secular_min_eigenvalue([2.0, 2.0], [1.0, 1.0], 2) == pytest.approx(
            4.0, abs=1e-12
        )

    def test_rejects_unsorted(self):
        with pytest.raises(ValueError):
            secular_min_eigenvalue([1.0, 3.0], [1.0, 1.0], 1)

    @settings(max_examples=80, deadline=None)
    @given(st.integers(min_value=0, max_value=100_000),
           st.integers(min_value=1, max_value=3))
    def test_against_dense(self, seed, mu):
        rs = np.random.default_rng(seed)
        n = int(rs.integers(mu + 1, 9))
        lam = np.sort(rs.uniform(0.0, 10.0, size=n))[::-1]
        lam[n - mu:] = lam[n - mu]
        z = rs.normal(size=n)
        z[rs.uniform(size=n) < 0.3] = 0.0
        got = secular_min_eigenvalue(lam, z, mu)
        dense = sym_eigendecompose(np.diag(lam) + np.outer(z, z))
        assert got == pytest.approx(float(dense.eigenvalues[n - mu]), abs=1e-8)


class TestSpectralTheory:
    def test_eigenvalue_projection_identity(self):
        # each eigenvalue of Phi^T Phi equals the squared projections of the
        # rows onto the paired eigenvector, summed
        rs = np.random.default_rng(11)
        for _ in range(200):
            k = int(rs.integers(1, 11))
            n = int(rs.integers(1, 11))
            phi = rs.normal(size=(k, n))
            eig = sym_eigendecompose(phi.T @ phi)
            proj = (phi @ eig.eigenvectors) ** 2
            np.testing.assert_allclose(
                eig.eigenvalues, proj.sum(axis=0), atol=1e-9
            )

    def test_rank_one_interlacing(self):
        rs = np.random.default_rng(12)
        for _ in range(200):
            n = int(rs.integers(2, 9))
            a = random_spd(rs, n)
            c = rs.normal(size=n)
            la = sym_eigendecompose(a).eigenvalues
            lb = sym_eigendecompose(a + np.outer(c, c)).eigenvalues
            assert np.all(lb >= la - 1e-9)
            assert np.all(la[:-1] >= lb[1:] - 1e-9)

    def test_min_eigenvector_minimizes_image_norm(self):
        rs = np.random.default_rng(13)
        phi = rs.normal(size=(8, 5))
        eig = sym_eigendecompose(phi.T @ phi)
        v = eig.eigenvectors[:, -1]
        base = np.sum((phi @ v) ** 2)
        x = rs.normal(size=(1000, 5))
        x /= np.linalg.norm(x, axis=1, keepdims=True)
        vals = np.sum((x @ phi.T) ** 2, axis=1)
        assert np.all(base <= vals + 1e-9)
