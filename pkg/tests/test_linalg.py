import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bkmf.errors import AssumptionsViolated
from bkmf.linalg import (blk, block_hessenberg_reduce, block_unit, circ_apply,
                         is_block_hessenberg, oblique_project, thin_block_qr)
from bkmf.polynomial import MatrixPolynomial

from conftest import crandn, random_block_hessenberg, rel_err


class TestThinBlockQR:
    def test_orthonormal_input(self):
        V = np.eye(3)[:, :2]
        Q, R, rank = thin_block_qr(V)
        np.testing.assert_allclose(Q, V, atol=1e-15)
        np.testing.assert_allclose(R, np.eye(2), atol=1e-15)
        assert rank == 2

    def test_repeated_column(self, rng):
        v = rng.standard_normal(6)
        assert thin_block_qr(np.column_stack([v, v]))[2] == 1

    def test_recomposition(self, rng):
        V = crandn(rng, 20, 3)
        Q, R, rank = thin_block_qr(V)
        assert rank == 3
        assert np.linalg.norm(Q @ R - V) / np.linalg.norm(V) <= 1e-13
        assert np.linalg.norm(Q.conj().T @ Q - np.eye(3)) <= 1e-13
        assert np.allclose(R, np.triu(R))
        assert np.all(np.diag(R).real > 0) and np.allclose(np.diag(R).imag, 0)

    def test_external_scale_detects_deflation(self, rng):
        V = 1e-14 * rng.standard_normal((10, 2))
        assert thin_block_qr(V)[2] == 2
        assert thin_block_qr(V, scale=1.0)[2] == 0

    def test_too_few_rows(self):
        with pytest.raises(ValueError):
            thin_block_qr(np.ones((2, 3)))


class TestCircApply:
    def test_identity_polynomial(self, rng):
        A, B = crandn(rng, 5, 5), crandn(rng, 5, 2)
        np.testing.assert_allclose(circ_apply(MatrixPolynomial.identity(2), A, B), B)

    def test_single_power(self, rng):
        A, B = crandn(rng, 5, 5), crandn(rng, 5, 2)
        P = MatrixPolynomial([np.zeros((2, 2)), np.eye(2)])
        np.testing.assert_allclose(circ_apply(P, A, B), A @ B, rtol=1e-14)

    def test_naive_power_sum(self, rng):
        A, B = crandn(rng, 8, 8), crandn(rng, 8, 2)
        coeffs = crandn(rng, 4, 2, 2)
        naive = sum(np.linalg.matrix_power(A, i) @ B @ coeffs[i] for i in range(4))
        assert rel_err(circ_apply(coeffs, A, B), naive) <= 1e-12

    def test_scalar_case(self, rng):
        A, b = rng.standard_normal((6, 6)), rng.standard_normal((6, 1))
        c = rng.standard_normal(4)
        expected = sum(c[i] * np.linalg.matrix_power(A, i) @ b for i in range(4))
        got = circ_apply(c[:, None, None], A, b)
        assert rel_err(got, expected) <= 1e-12

    def test_dimension_mismatch(self, rng):
        with pytest.raises(ValueError):
            circ_apply(MatrixPolynomial.identity(3), np.eye(4), np.ones((4, 2)))
        with pytest.raises(ValueError):
            circ_apply(MatrixPolynomial.identity(2), np.eye(5), np.ones((4, 2)))

    def test_callable_operator(self, rng):
        A, B = rng.standard_normal((5, 5)), rng.standard_normal((5, 2))
        P = crandn(rng, 3, 2, 2)
        np.testing.assert_allclose(circ_apply(P, lambda X: A @ X, B), circ_apply(P, A, B))

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 2 ** 32 - 1), alpha=st.complex_numbers(max_magnitude=10),
           beta=st.complex_numbers(max_magnitude=10))
    def test_linearity(self, seed, alpha, beta):
        rng = np.random.default_rng(seed)
        A = crandn(rng, 7, 7) / 3
        B1, B2 = crandn(rng, 7, 2), crandn(rng, 7, 2)
        P1, P2 = crandn(rng, 3, 2, 2), crandn(rng, 3, 2, 2)
        lhs = circ_apply(P1, A, alpha * B1 + beta * B2)
        rhs = alpha * circ_apply(P1, A, B1) + beta * circ_apply(P1, A, B2)
        scale = 1 + abs(alpha) + abs(beta)
        assert np.linalg.norm(lhs - rhs) <= 1e-12 * scale * np.linalg.norm(rhs) + 1e-12
        lhs = circ_apply(alpha * P1 + beta * P2, A, B1)
        rhs = alpha * circ_apply(P1, A, B1) + beta * circ_apply(P2, A, B1)
        assert np.linalg.norm(lhs - rhs) <= 1e-12 * scale * np.linalg.norm(rhs) + 1e-12


class TestBlockHessenbergReduce:
    def _check(self, N, W, red):
        Q, H, M, s = red.Q, red.H, red.M, red.s
        j = H.shape[0] // s
        assert np.linalg.norm(Q.conj().T @ Q - np.eye(j * s)) <= 1e-13
        assert np.linalg.norm(Q.conj().T @ N @ Q - H) <= 1e-12 * np.linalg.norm(N)
        assert is_block_hessenberg(H, s)
        np.testing.assert_allclose(Q.conj().T @ W, block_unit(j, 1, s) @ M,
                                   atol=1e-12 * np.linalg.norm(W))
        assert np.allclose(M, np.triu(M))

    def test_fixed_point(self, rng):
        N = random_block_hessenberg(rng, 3, 2)
        W = block_unit(3, 1, 2)
        red = block_hessenberg_reduce(N, W)
        self._check(N, W, red)
        # unique up to a unitary block diagonal factor
        D = red.Q
        for k in range(3):
            Dk = blk(D, k + 1, k + 1, 2)
            np.testing.assert_allclose(Dk.conj().T @ Dk, np.eye(2), atol=1e-12)
        assert np.linalg.norm(D - np.diag(np.diag(D))) <= 1e-12 or \
            np.linalg.norm(np.abs(D) - np.abs(np.kron(np.eye(3), np.ones((2, 2))) * D)) <= 1e-12
        np.testing.assert_allclose(np.abs(red.M), np.eye(2), atol=1e-12)

    def test_scalar_case_spectrum(self, rng):
        N, w = crandn(rng, 7, 7), crandn(rng, 7, 1)
        red = block_hessenberg_reduce(N, w)
        self._check(N, w, red)
        ev_h = np.sort_complex(np.linalg.eigvals(red.H))
        ev_n = np.sort_complex(np.linalg.eigvals(N))
        assert np.max(np.abs(ev_h - ev_n)) <= 1e-10 * np.linalg.norm(N)

    def test_controllable_pair(self, rng):
        N, W = crandn(rng, 6, 6), crandn(rng, 6, 2)
        red = block_hessenberg_reduce(N, W)
        self._check(N, W, red)
        assert red.singular_block is None
        for i in (2, 3):
            assert np.linalg.svd(red.gamma(i), compute_uv=False)[-1] > 1e-10
        K = np.hstack([np.linalg.matrix_power(N, k) @ W for k in range(3)])
        assert np.linalg.matrix_rank(K) == 6

    @pytest.mark.parametrize("j,s", [(2, 1), (3, 2), (4, 3)])
    def test_spectrum_preserved(self, rng, j, s):
        N, W = crandn(rng, j * s, j * s), crandn(rng, j * s, s)
        H = block_hessenberg_reduce(N, W).H
        a = np.sort_complex(np.linalg.eigvals(H))
        b = np.sort_complex(np.linalg.eigvals(N))
        assert np.max(np.abs(a - b)) <= 1e-10 * np.linalg.norm(N)

    def test_uncontrollable_pair_flagged(self, rng):
        # N block diagonal and W supported on the first block only
        N = np.zeros((4, 4), dtype=complex)
        N[:2, :2] = crandn(rng, 2, 2)
        N[2:, 2:] = crandn(rng, 2, 2)
        W = np.zeros((4, 2), dtype=complex)
        W[:2] = crandn(rng, 2, 2)
        assert block_hessenberg_reduce(N, W).singular_block == 2

    def test_rank_deficient_start(self, rng):
        N = crandn(rng, 4, 4)
        w = crandn(rng, 4, 1)
        assert block_hessenberg_reduce(N, np.hstack([w, w])).singular_block == 1


class TestObliqueProject:
    def test_range_annihilated(self, rng):
        U = np.linalg.qr(crandn(rng, 10, 3))[0]
        X = U @ crandn(rng, 3, 2)
        assert np.linalg.norm(oblique_project(U, U, X)) <= 1e-12 * np.linalg.norm(X)

    def test_orthogonal_complement_kept(self, rng):
        Q = np.linalg.qr(crandn(rng, 10, 5))[0]
        U, X = Q[:, :3], Q[:, 3:]
        np.testing.assert_allclose(oblique_project(U, U, X), X, atol=1e-14)

    def test_oblique_defining_property(self, rng):
        U = np.linalg.qr(crandn(rng, 12, 4))[0]
        Z = np.linalg.qr(crandn(rng, 12, 4))[0]
        X = crandn(rng, 12, 2)
        Y = oblique_project(U, Z, X)
        assert np.linalg.norm(Z.conj().T @ Y) <= 1e-12 * np.linalg.norm(X)
        np.testing.assert_allclose(oblique_project(U, Z, Y), Y, atol=1e-12)

    def test_singular_coupling(self, rng):
        Q = np.linalg.qr(crandn(rng, 8, 4))[0]
        with pytest.raises(AssumptionsViolated):
            oblique_project(Q[:, :2], Q[:, 2:], crandn(rng, 8, 1))
