import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bkmf.charpoly import (block_clenshaw_apply, charpoly_hessenberg, charpoly_of,
                           charpoly_rational, eigen_triplets, gamma_product,
                           lambda_inverse_keldysh, normalization)
from bkmf.errors import (InfinitePoleUnsupported, SimpleEigsRequired, SingularSubdiagonal,
                         UncontrollablePair, ZIsRitzValue)
from bkmf.krylov import rational_block_arnoldi
from bkmf.linalg import blk, block_unit, circ_apply
from bkmf.poles import INF
from bkmf.polynomial import MatrixPolynomial

from conftest import crandn, random_block_hessenberg, random_stable, rel_err


def upper_tri(rng, s):
    return np.triu(crandn(rng, s, s)) + 3 * np.eye(s)


def annihilation(P, N, W):
    return np.linalg.norm(circ_apply(P, N, W))


class TestCharpolyHessenberg:
    def test_single_block(self, rng):
        Phi, M = crandn(rng, 2, 2), upper_tri(rng, 2)
        P = charpoly_hessenberg(Phi, M)
        expected = MatrixPolynomial([-np.linalg.solve(M, Phi @ M), np.eye(2)])
        assert P.allclose(expected, rtol=1e-12)

    def test_scalar_matches_eigenvalue_product(self, rng):
        H = random_block_hessenberg(rng, 6, 1)
        P = charpoly_hessenberg(H, np.array([[2.0]]))
        ref = np.poly(np.linalg.eigvals(H))[::-1]
        assert rel_err(P.coeffs[:, 0, 0], ref) <= 1e-8

    @pytest.mark.parametrize("j,s", [(2, 1), (3, 2), (4, 3), (5, 2)])
    def test_annihilation_and_monic(self, rng, j, s):
        H = random_block_hessenberg(rng, j, s)
        M = upper_tri(rng, s)
        P = charpoly_hessenberg(H, M)
        assert P.degree == j and P.is_monic
        W = block_unit(j, 1, s) @ M
        assert annihilation(P, H, W) <= 1e-10 * np.linalg.norm(H, 2) ** j * np.linalg.norm(M)

    def test_singular_subdiagonal(self, rng):
        H = random_block_hessenberg(rng, 3, 2)
        H[4:6, 2:4] = 0
        with pytest.raises(SingularSubdiagonal) as exc:
            charpoly_hessenberg(H, np.eye(2))
        assert exc.value.index == 3

    def test_uniqueness_up_to_leading_coefficient(self, rng):
        H = random_block_hessenberg(rng, 3, 2)
        P = charpoly_hessenberg(H, np.eye(2))
        L = crandn(rng, 2, 2)
        Q = P @ L  # another annihilating polynomial with leading coefficient L
        assert annihilation(Q, H, block_unit(3, 1, 2)) <= 1e-9 * np.linalg.norm(H) ** 3
        assert (Q @ np.linalg.inv(L)).allclose(P @ np.eye(2), rtol=1e-10)

    def test_similarity_covariance(self, rng):
        H = random_block_hessenberg(rng, 3, 2)
        M, X = upper_tri(rng, 2), crandn(rng, 2, 2)
        lhs = charpoly_of(H, block_unit(3, 1, 2) @ M @ X)
        rhs = charpoly_hessenberg(H, M).conjugate_by(X)
        assert lhs.allclose(rhs, rtol=1e-10)

    def test_unitary_invariance(self, rng):
        N, W = crandn(rng, 6, 6), crandn(rng, 6, 2)
        Q = np.linalg.qr(crandn(rng, 6, 6))[0]
        P1 = charpoly_of(N, W)
        P2 = charpoly_of(Q.conj().T @ N @ Q, Q.conj().T @ W)
        assert P1.allclose(P2, rtol=1e-10)

    def test_determinant_identity(self, rng):
        j, s = 4, 2
        H = random_block_hessenberg(rng, j, s)
        G = [blk(H, i, i - 1, s) for i in range(2, j + 1)]
        P = charpoly_hessenberg(H, np.eye(s)) @ np.linalg.inv(gamma_product(H, s))
        for lam in crandn(rng, 5):
            lhs = np.linalg.det(lam * np.eye(j * s) - H)
            rhs = np.prod([np.linalg.det(g) for g in G]) * np.linalg.det(P(lam))
            assert abs(abs(lhs) - abs(rhs)) <= 1e-8 * abs(lhs)
            assert min(abs(lhs - rhs), abs(lhs + rhs)) <= 1e-8 * abs(lhs)

    def test_uncontrollable(self, rng):
        N = np.kron(np.eye(2), crandn(rng, 2, 2))
        W = np.vstack([crandn(rng, 2, 2), np.zeros((2, 2))])
        with pytest.raises(UncontrollablePair):
            charpoly_of(N, W)

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 2 ** 32 - 1), j=st.integers(1, 5), s=st.integers(1, 3))
    def test_annihilation_property(self, seed, j, s):
        rng = np.random.default_rng(seed)
        N, W = crandn(rng, j * s, j * s), crandn(rng, j * s, s)
        P = charpoly_of(N, W)
        scale = max(np.linalg.norm(N, 2), 1) ** j * np.linalg.norm(W)
        assert annihilation(P, N, W) <= 1e-9 * scale


class TestCharpolyRational:
    def _brad(self, rng, poles, s=2, n=30):
        A = random_stable(rng, n)
        B = rng.standard_normal((n, s))
        return A, rational_block_arnoldi(A, B, poles)

    def test_all_infinite_rejected(self, rng):
        A, r = self._brad(rng, [INF] * 3)
        with pytest.raises(InfinitePoleUnsupported):
            charpoly_rational(r.Hbar, r.Kbar, r.poles)
        # the polynomial path on H K^{-1} = H covers this case
        P = charpoly_hessenberg(r.H @ np.linalg.inv(r.K), np.eye(2))
        assert P.allclose(charpoly_of(r.H, block_unit(3, 1, 2)), rtol=1e-10)

    def test_single_infinite_pole(self, rng):
        A, r = self._brad(rng, [INF])
        data = charpoly_rational(r.Hbar, r.Kbar, r.poles)
        Aproj = r.H @ np.linalg.inv(r.K)
        assert data.monic().allclose(charpoly_of(Aproj, np.eye(2)), rtol=1e-10)

    @pytest.mark.parametrize("poles", [[1.0, INF], [1.0, 2.0, INF], [0.5, 1.5, 2.0 + 1j, 3.0, INF]])
    def test_annihilation_and_leading(self, rng, poles):
        A, r = self._brad(rng, poles)
        data = charpoly_rational(r.Hbar, r.Kbar, r.poles)
        j, s = len(poles), 2
        assert data.P.degree == j
        Aproj = r.H @ np.linalg.inv(r.K)
        E1 = block_unit(j, 1, s)
        scale = max(np.linalg.norm(Aproj, 2), 1) ** j * np.linalg.norm(data.P.leading)
        assert annihilation(data.P, Aproj, E1) <= 1e-10 * scale
        ref = np.linalg.inv(np.linalg.solve(r.K, E1)[(j - 1) * s:])
        assert rel_err(data.P.leading, ref) <= 1e-10
        assert rel_err(data.leadingInv, ref) <= 1e-10

    def test_eigenvalues_match_pencil(self, rng):
        A, r = self._brad(rng, [1.0, 2.0, 3.0, INF])
        data = charpoly_rational(r.Hbar, r.Kbar, r.poles)
        import scipy.linalg as sla
        ref = sla.eigvals(r.H, r.K)
        got = data.P.companion_eigvals()
        assert len(got) == len(ref)
        dist = np.abs(got[:, None] - ref[None, :])
        assert np.max(dist.min(axis=0)) <= 1e-8 * np.max(np.abs(ref))
        assert np.max(dist.min(axis=1)) <= 1e-8 * np.max(np.abs(ref))

    def test_monic_with_rb(self, rng):
        A, r = self._brad(rng, [1.0, 2.0, INF])
        data = charpoly_rational(r.Hbar, r.Kbar, r.poles)
        Aproj = r.H @ np.linalg.inv(r.K)
        ref = charpoly_of(Aproj, block_unit(3, 1, 2) @ r.R_B)
        assert data.monic(r.R_B).allclose(ref, rtol=1e-9)


class TestBlockClenshaw:
    def test_annihilation(self, rng):
        H = random_block_hessenberg(rng, 4, 2)
        M = upper_tri(rng, 2)
        out = block_clenshaw_apply(H, block_unit(4, 1, 2) @ M, H, block_unit(4, 1, 2) @ M)
        assert np.linalg.norm(out) <= 1e-10 * np.linalg.norm(H, 2) ** 4 * np.linalg.norm(M)

    def test_scalar_evaluation(self, rng):
        H = random_block_hessenberg(rng, 5, 1)
        M = np.array([[1.7]])
        P = charpoly_hessenberg(H, M)
        for lam in crandn(rng, 3):
            got = block_clenshaw_apply(H, block_unit(5, 1, 1) @ M, np.array([[lam]]), np.eye(1))
            assert rel_err(got[0, 0], P(lam)[0, 0]) <= 1e-10

    @pytest.mark.parametrize("monic", [True, False])
    def test_random_against_coefficient_path(self, rng, monic):
        N, W = crandn(rng, 12, 12), crandn(rng, 12, 2)
        A, B = crandn(rng, 12, 12) / 3, crandn(rng, 12, 2)
        P = charpoly_of(N, W)
        if not monic:
            from bkmf.linalg import block_hessenberg_reduce
            red = block_hessenberg_reduce(N, W)
            P = P @ np.linalg.inv(gamma_product(red.H, 2) @ red.M)
        ref = circ_apply(P, A, B)
        assert rel_err(block_clenshaw_apply(N, W, A, B, monic=monic), ref) <= 1e-10

    def test_uncontrollable(self, rng):
        N = np.kron(np.eye(2), crandn(rng, 2, 2))
        W = np.vstack([crandn(rng, 2, 2), np.zeros((2, 2))])
        with pytest.raises(UncontrollablePair):
            block_clenshaw_apply(N, W, np.eye(4), np.ones((4, 2)))


class TestKeldysh:
    def test_single_block(self, rng):
        Phi, R = crandn(rng, 2, 2), upper_tri(rng, 2)
        z = 5.0 + 2j
        got = lambda_inverse_keldysh(Phi, [], R, z)
        Pt = np.linalg.solve(R, Phi @ R)
        np.testing.assert_allclose(got, np.linalg.inv(z * np.eye(2) - Pt), atol=1e-13)

    def test_product_with_charpoly_is_identity(self, rng):
        j, s = 4, 2
        H = random_block_hessenberg(rng, j, s)
        R = upper_tri(rng, s)
        gammas = [blk(H, i, i - 1, s) for i in range(2, j + 1)]
        P = charpoly_hessenberg(H, R)
        for z in 10 * crandn(rng, 3):
            Li = lambda_inverse_keldysh(H, gammas, R, z)
            np.testing.assert_allclose(P(z) @ Li, np.eye(s), atol=1e-9)

    def test_monic_asymptotics(self, rng):
        j, s = 3, 2
        H = random_block_hessenberg(rng, j, s)
        gammas = [blk(H, i, i - 1, s) for i in range(2, j + 1)]
        z = 1e6
        Li = lambda_inverse_keldysh(H, gammas, np.eye(s), z)
        assert rel_err(z ** j * Li, np.eye(s)) <= 1e-4

    def test_ritz_value_rejected(self, rng):
        H = random_block_hessenberg(rng, 2, 2)
        theta = np.linalg.eigvals(H)[0]
        with pytest.raises(ZIsRitzValue):
            lambda_inverse_keldysh(H, [blk(H, 2, 1, 2)], np.eye(2), theta)


class TestEigenTriplets:
    def test_scalar_finite_difference(self, rng):
        j = 5
        H = random_block_hessenberg(rng, j, 1)
        R = np.array([[1.3]])
        G = gamma_product(H, 1)
        t = eigen_triplets(H, R, N=G)
        P = charpoly_hessenberg(H, R)
        h = 1e-6
        for th, v, w in zip(t.thetas, t.V[0], t.W[0]):
            dP = (P(th + h)[0, 0] - P(th - h)[0, 0]) / (2 * h)
            assert abs(np.conj(w) * dP * v - 1) <= 1e-6

    @pytest.mark.parametrize("j,s", [(3, 1), (3, 2), (4, 3)])
    def test_eigen_identities(self, rng, j, s):
        H = random_block_hessenberg(rng, j, s)
        R = upper_tri(rng, s)
        t = eigen_triplets(H, R)
        P = charpoly_hessenberg(H, R)
        dP = P.derivative()
        normP = np.linalg.norm(P.coeffs)
        for i, th in enumerate(t.thetas):
            v, w = t.V[:, i], t.W[:, i]
            assert np.linalg.norm(P(th) @ v) <= 1e-8 * normP * np.linalg.norm(v) * max(1, abs(th)) ** j
            assert np.linalg.norm(w.conj() @ P(th)) <= 1e-8 * normP * np.linalg.norm(w) * max(1, abs(th)) ** j
            assert abs(w.conj() @ dP(th) @ v - 1) <= 1e-8

    def test_keldysh_reconstruction(self, rng):
        j, s = 4, 2
        H = random_block_hessenberg(rng, j, s)
        R = upper_tri(rng, s)
        gammas = [blk(H, i, i - 1, s) for i in range(2, j + 1)]
        t = eigen_triplets(H, R)
        for z in 5 * crandn(rng, 5):
            ref = lambda_inverse_keldysh(H, gammas, R, z)
            assert rel_err(t.inverse(z), ref) <= 1e-8

    def test_rational_keldysh(self, rng):
        A = random_stable(rng, 30)
        r = rational_block_arnoldi(A, rng.standard_normal((30, 2)), [1.0, 2.0, INF])
        Aproj = r.H @ np.linalg.inv(r.K)
        roots = [1.0, 2.0]
        phi = lambda z: (z - 1.0) * (z - 2.0)
        N = normalization(Aproj, 2, K=r.K, m=2)
        t = eigen_triplets(Aproj, r.R_B, K=r.K, phi_roots=roots)
        data = charpoly_rational(r.Hbar, r.Kbar, r.poles)
        Lam = data.monic(r.R_B)
        for z in 3 * crandn(rng, 4):
            Li = lambda_inverse_keldysh(Aproj, N, r.R_B, z, K=r.K, phi=phi)
            assert rel_err(t.inverse(z), Li) <= 1e-8
            np.testing.assert_allclose(Lam(z) @ Li, np.eye(2), atol=1e-8)
        dL = Lam.derivative()
        for i, th in enumerate(t.thetas):
            assert abs(t.W[:, i].conj() @ dL(th) @ t.V[:, i] - 1) <= 1e-8

    def test_repeated_eigenvalue(self, rng):
        H = np.diag([1.0, 1.0, 2.0, 3.0]).astype(complex)
        H[2, 0] = H[3, 1] = 1.0
        H[2:, :2] = np.eye(2)
        H[:2, :2] = np.eye(2)
        with pytest.raises(SimpleEigsRequired):
            eigen_triplets(H, np.eye(2))
