import numpy as np
import pytest
from hypothesis import given, settings, strategies as hst

from conedge import symspace as ss


def sym_strategy(max_n=5, scale=10.0):
    def build(draw):
        n = draw(hst.integers(min_value=1, max_value=max_n))
        vals = draw(hst.lists(
            hst.floats(-scale, scale, allow_nan=False), min_size=n * n, max_size=n * n))
        a = np.array(vals).reshape(n, n)
        return 0.5 * (a + a.T)
    return hst.composite(lambda draw: build(draw))()


class TestBasics:
    def test_inner_identity(self):
        assert ss.inner(np.eye(3), np.eye(3)) == pytest.approx(3.0)

    def test_inner_traceless_vs_identity(self):
        assert ss.inner(np.diag([1.0, -1.0]), np.eye(2)) == pytest.approx(0.0)

    def test_inner_rank_one_projector(self):
        for n in (2, 4, 7):
            p = np.zeros((n, n))
            p[0, 0] = 1.0
            assert ss.inner(p, p) == pytest.approx(1.0)

    def test_dimension_mismatch(self):
        with pytest.raises(ss.DimensionMismatch):
            ss.inner(np.eye(2), np.eye(3))

    def test_sym_matrix_symmetrizes(self):
        a = ss.sym_matrix([[1.0, 2.0 + 1e-14], [2.0, 3.0]])
        assert np.allclose(a, a.T)

    def test_sym_matrix_rejects_asymmetric(self):
        with pytest.raises(ValueError):
            ss.sym_matrix([[0.0, 1.0], [0.0, 0.0]])

    def test_sym_matrix_rejects_oversize(self):
        with pytest.raises(ValueError):
            ss.sym_matrix(np.eye(17))


class TestEigh:
    def test_diagonal_sorted(self):
        spec = ss.eigh(np.diag([3.0, 1.0, 2.0]))
        assert np.allclose(spec.eigenvalues, [1.0, 2.0, 3.0])

    def test_reflection(self):
        spec = ss.eigh(np.array([[0.0, 1.0], [1.0, 0.0]]))
        assert np.allclose(spec.eigenvalues, [-1.0, 1.0])

    def test_identity(self):
        spec = ss.eigh(np.eye(5))
        assert np.allclose(spec.eigenvalues, 1.0)

    def test_roundtrip_many_dims(self, rng):
        for n in range(2, 13):
            for _ in range(100):
                a = ss.random_symmetric(n, rng, scale=rng.uniform(0.1, 10))
                spec = ss.eigh(a)
                scale = 1.0 + ss.frob_norm(a)
                assert ss.frob_norm(a - spec.reconstruct()) <= 1e-9 * scale
                v = spec.eigenvectors
                assert np.abs(v.T @ v - np.eye(n)).max() <= 1e-10


class TestPlaneProjector:
    def test_axis(self):
        p = ss.plane_projector([np.array([1.0, 0.0])])
        assert np.allclose(p, np.diag([1.0, 0.0]))

    def test_full_space(self):
        p = ss.plane_projector(np.eye(2))
        assert np.allclose(p, np.eye(2))

    def test_diagonal_direction(self):
        v = np.array([1.0, 1.0]) / np.sqrt(2)
        p = ss.plane_projector([v])
        assert np.allclose(p, np.full((2, 2), 0.5))

    def test_rejects_non_orthonormal(self):
        with pytest.raises(ValueError):
            ss.plane_projector([np.array([1.0, 1.0])])

    def test_idempotent_and_trace(self, rng):
        for _ in range(25):
            n = int(rng.integers(2, 7))
            k = int(rng.integers(1, n + 1))
            q, _ = np.linalg.qr(rng.normal(size=(n, k)))
            p = ss.plane_projector(q.T)
            assert ss.frob_norm(p @ p - p) < 1e-10
            assert np.trace(p) == pytest.approx(k)
            a = ss.random_symmetric(n, rng)
            direct = sum(q[:, i] @ a @ q[:, i] for i in range(k))
            assert ss.inner(a, p) == pytest.approx(direct, abs=1e-10)


class TestSubspaces:
    def test_dependent_pair(self):
        s = ss.orthonormalize([np.eye(3), 2.0 * np.eye(3)])
        assert s.dim == 1
        assert np.allclose(s.basis[0], np.eye(3) / np.sqrt(3))

    def test_two_dim(self):
        s = ss.orthonormalize([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])])
        assert s.dim == 2

    def test_random_rank_one_span(self, rng):
        gens = []
        for _ in range(50):
            e = rng.normal(size=3)
            e /= np.linalg.norm(e)
            gens.append(np.outer(e, e))
        # oracle: rank of the flattened generator matrix
        flat = np.array([g.ravel() for g in gens])
        oracle = np.linalg.matrix_rank(flat, tol=1e-9)
        s = ss.orthonormalize(gens)
        assert s.dim == oracle == 6

    def test_empty_input(self):
        s = ss.orthonormalize([], ambient_n=3)
        assert s.dim == 0

    def test_project_onto_identity_line(self, rng):
        n = 4
        s = ss.orthonormalize([np.eye(n)])
        a = ss.random_symmetric(n, rng)
        assert np.allclose(ss.subspace_project(s, a), np.trace(a) / n * np.eye(n))

    def test_project_identity_on_traceless(self):
        s = ss.orthonormalize([np.diag([1.0, -1.0])])
        assert ss.frob_norm(ss.subspace_project(s, np.eye(2))) < 1e-12

    def test_idempotence(self, rng):
        s = ss.orthonormalize([ss.random_symmetric(4, rng) for _ in range(3)])
        b = ss.from_coords(s, rng.normal(size=s.dim))
        assert ss.frob_norm(ss.subspace_project(s, b) - b) < 1e-10

    def test_complement_dims(self):
        n = 4
        s = ss.orthonormalize([np.eye(n)])
        c = ss.complement(s)
        assert c.dim == n * (n + 1) // 2 - 1
        for b in c.basis:
            assert abs(np.trace(b)) < 1e-10

    def test_complement_of_zero(self):
        c = ss.complement(ss.zero_subspace(3))
        assert c.dim == 6

    def test_complement_involution(self, rng):
        s = ss.orthonormalize([ss.random_symmetric(3, rng) for _ in range(2)])
        cc = ss.complement(ss.complement(s))
        assert ss.subspace_equal(s, cc, 1e-9)

    def test_pythagoras(self, rng):
        s = ss.orthonormalize([ss.random_symmetric(5, rng) for _ in range(4)])
        for _ in range(100):
            a = ss.random_symmetric(5, rng)
            pa = ss.subspace_project(s, a)
            total = ss.inner(a, a)
            split = ss.inner(pa, pa) + ss.inner(a - pa, a - pa)
            assert abs(total - split) <= 1e-9 * (1 + total)

    def test_projection_decomposition(self, rng):
        s = ss.orthonormalize([ss.random_symmetric(4, rng) for _ in range(3)])
        c = ss.complement(s)
        for _ in range(100):
            a = ss.random_symmetric(4, rng)
            back = ss.subspace_project(s, a) + ss.subspace_project(c, a)
            assert ss.frob_norm(back - a) <= 1e-9 * (1 + ss.frob_norm(a))


@settings(max_examples=40, deadline=None)
@given(sym_strategy())
def test_inner_symmetric_and_positive(a):
    b = a[::-1, ::-1].copy()  # another symmetric matrix of the same size
    assert ss.inner(a, b) == pytest.approx(ss.inner(b, a), rel=1e-10, abs=1e-10)
    self_pairing = ss.inner(a, a)
    assert self_pairing >= -1e-12
    if self_pairing <= 1e-12 * (1 + np.abs(a).max()) ** 2:
        assert np.abs(a).max() <= 1e-5


@settings(max_examples=25, deadline=None)
@given(hst.integers(min_value=1, max_value=5), hst.integers(min_value=0, max_value=2**32 - 1))
def test_gram_schmidt_preserves_span(n, seed):
    rng = np.random.default_rng(seed)
    count = int(rng.integers(1, 5))
    gens = [ss.random_symmetric(n, rng) for _ in range(count)]
    s = ss.orthonormalize(gens)
    s.validate()
    for g in gens:
        assert ss.residual_norm(s, g) <= 1e-8 * (1 + ss.frob_norm(g))
