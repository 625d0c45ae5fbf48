import numpy as np
import pytest

from covact import ParameterError, build_lift, sample_sphere_sequences
from covact.signatures import SignatureSet


class TestSampling:
    def test_column_norms(self):
        sigs = sample_sphere_sequences(20, 1400, np.random.default_rng(0))
        np.testing.assert_allclose(
            sigs.column_norms, np.sqrt(20.0), rtol=1e-12
        )

    def test_cross_coherence_mean(self):
        # for independent sphere vectors E|s_i^H s_k|^2 = L, so the ratio is 1
        rng = np.random.default_rng(1)
        sigs = sample_sphere_sequences(16, 10_000, rng)
        S = sigs.matrix
        i = rng.integers(0, 10_000, size=20_000)
        k = rng.integers(0, 10_000, size=20_000)
        keep = i != k
        inner = np.abs(np.sum(S[:, i[keep]].conj() * S[:, k[keep]], axis=0)) ** 2
        assert inner.mean() / 16.0 == pytest.approx(1.0, rel=0.05)

    def test_determinism(self):
        a = sample_sphere_sequences(8, 100, np.random.default_rng(5))
        b = sample_sphere_sequences(8, 100, np.random.default_rng(5))
        assert np.array_equal(a.matrix, b.matrix)

    def test_rejects_bad_sizes(self):
        with pytest.raises(ParameterError):
            sample_sphere_sequences(0, 5, np.random.default_rng(0))


class TestLift:
    def test_scalar_case(self):
        lift = build_lift(SignatureSet(np.array([[1.0 + 0.0j]])))
        np.testing.assert_allclose(lift.s_tilde, [[1.0]])
        np.testing.assert_allclose(lift.w, [[1.0]])

    def test_kronecker_arithmetic(self):
        s = np.array([[1.0], [1.0j]])
        lift = build_lift(SignatureSet(s))
        np.testing.assert_allclose(
            lift.s_tilde[:, 0], [1.0, 1.0j, -1.0j, 1.0]
        )

    def test_lift_matches_explicit_kron(self):
        sigs = sample_sphere_sequences(5, 7, np.random.default_rng(3))
        lift = build_lift(sigs)
        for i in range(7):
            s = sigs.matrix[:, i]
            np.testing.assert_allclose(
                lift.s_tilde[:, i], np.kron(s.conj(), s), atol=1e-14
            )

    def test_inner_product_preservation(self):
        rng = np.random.default_rng(4)
        sigs = sample_sphere_sequences(8, 40, rng)
        lift = build_lift(sigs)
        S = sigs.matrix
        for _ in range(50):
            i, k = rng.integers(0, 40, size=2)
            lhs = lift.w[:, i] @ lift.w[:, k]
            rhs = np.abs(np.vdot(S[:, i], S[:, k])) ** 2
            assert lhs == pytest.approx(rhs, rel=1e-9)

    def test_identity_row_sums(self):
        # u^T s_tilde = ||s||^2 = L for every column (u = vec of identity)
        L = 6
        sigs = sample_sphere_sequences(L, 30, np.random.default_rng(6))
        lift = build_lift(sigs)
        u = np.eye(L).reshape(-1)
        np.testing.assert_allclose(u @ lift.s_tilde, L * np.ones(30), atol=1e-10)

    def test_identity_under_gain_scaling(self):
        # u^T s_tilde diag(g) x == L * 1^T diag(g) x for arbitrary real x
        rng = np.random.default_rng(7)
        L, n = 5, 24
        sigs = sample_sphere_sequences(L, n, rng)
        lift = build_lift(sigs)
        u = np.eye(L).reshape(-1)
        g = rng.uniform(0.1, 3.0, size=n)
        x = rng.standard_normal(n)
        lhs = u @ (lift.s_tilde @ (g * x))
        assert lhs.imag == pytest.approx(0.0, abs=1e-10)
        assert lhs.real == pytest.approx(L * np.sum(g * x), rel=1e-10)

    def test_real_representation_completeness(self):
        # vectors in the numerical null space of W also annihilate s_tilde
        rng = np.random.default_rng(8)
        L, n = 4, 30  # L^2 = 16 < 30 so the null space is nontrivial
        sigs = sample_sphere_sequences(L, n, rng)
        lift = build_lift(sigs)
        _, svals, vt = np.linalg.svd(lift.w, full_matrices=True)
        null = vt[(svals > 1e-9 * svals[0]).sum():].T
        assert null.shape[1] == n - L * L
        x = null @ rng.standard_normal(null.shape[1])
        s_norm = np.linalg.norm(lift.s_tilde)
        assert np.linalg.norm(lift.s_tilde @ x) <= 1e-8 * s_norm * np.linalg.norm(x)
        # and conversely W x small wherever s_tilde x is small
        assert np.linalg.norm(lift.w @ x) <= 1e-8 * np.linalg.norm(lift.w) * np.linalg.norm(x)

    def test_embedding_norm_equals_stilde_norm(self):
        sigs = sample_sphere_sequences(6, 12, np.random.default_rng(9))
        lift = build_lift(sigs)
        np.testing.assert_allclose(
            np.linalg.norm(lift.w, axis=0),
            np.linalg.norm(lift.s_tilde, axis=0),
            rtol=1e-12,
        )
