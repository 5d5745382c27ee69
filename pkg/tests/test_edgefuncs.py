import numpy as np
import pytest

from conedge import catalog as cat
from conedge import cones as cn
from conedge import dirichlet as dh
from conedge import edgefuncs as ef
from conedge import symspace as ss


@pytest.fixture(scope="module")
def lap1():
    return cat.build_cone("laplace", 1)


@pytest.fixture(scope="module")
def pc2():
    return cat.build_cone("P_C", 2)


def grid_from(fn, dom):
    pts = dom.coords().reshape(-1, dom.n)
    return dh.GridField(dom, np.asarray(fn(pts)).reshape(dom.shape))


class TestEdgeQuadratic:
    def test_affine_eval(self):
        h = ef.make_edge_quadratic(ss.zero_subspace(2), 1.0, np.array([2.0, 0.0]),
                                   np.zeros((2, 2)))
        assert h(np.array([1.0, 0.0])) == pytest.approx(3.0)

    def test_harmonic_quadratic_eval(self):
        edge = ss.orthonormalize([np.diag([1.0, -1.0])])
        h = ef.make_edge_quadratic(edge, 0.5, np.array([1.0, 1.0]),
                                   np.diag([1.0, -1.0]))
        x = np.array([1.0, 1.0])
        assert h(x) == pytest.approx(0.5 + 2.0 + 0.0)

    def test_refuses_curvature_off_edge(self):
        edge = ss.orthonormalize([np.diag([1.0, -1.0])])
        with pytest.raises(ValueError):
            ef.make_edge_quadratic(edge, 0.0, np.zeros(2), np.eye(2))

    def test_projects_tiny_residue(self):
        edge = ss.orthonormalize([np.diag([1.0, -1.0])])
        curv = np.diag([1.0, -1.0]) + 1e-9 * np.eye(2)
        h = ef.make_edge_quadratic(edge, 0.0, np.zeros(2), curv)
        assert ss.residual_norm(edge, h.curvature) <= 1e-12

    def test_vectorized_eval(self, rng):
        edge = ss.orthonormalize([np.diag([1.0, -1.0])])
        h = ef.make_edge_quadratic(edge, 0.3, rng.normal(size=2),
                                   0.7 * np.diag([1.0, -1.0]))
        pts = rng.normal(size=(10, 2))
        vals = h(pts)
        for p, v in zip(pts, vals):
            assert h(p) == pytest.approx(v)


class TestSampling:
    def test_affine_family(self):
        out = ef.sample_edge_quadratics(ss.zero_subspace(2), 10, 1.0, 3)
        assert len(out) == 10
        assert all(np.abs(h.curvature).max() == 0.0 for h in out)

    def test_all_validate(self, pc2):
        out = ef.sample_edge_quadratics(pc2.edge, 20, 2.0, 5)
        for h in out:
            ef.make_edge_quadratic(pc2.edge, h.c, h.b, h.curvature)
            assert ss.frob_norm(h.curvature) <= 2.0 + 1e-9

    def test_seed_repeat(self, pc2):
        a = ef.sample_edge_quadratics(pc2.edge, 5, 1.0, 11)
        b = ef.sample_edge_quadratics(pc2.edge, 5, 1.0, 11)
        for ha, hb in zip(a, b):
            assert ha.c == hb.c
            assert np.array_equal(ha.b, hb.b)
            assert np.array_equal(ha.curvature, hb.curvature)


class TestSubTest:
    def test_strictly_below(self):
        dom = dh.GridDomain.box([-1.0], [1.0], 0.25)
        h = ef.make_edge_quadratic(ss.zero_subspace(1), 1.0, np.zeros(1),
                                   np.zeros((1, 1)))
        u = grid_from(lambda p: h(p) - 1.0, dom)
        ok, info = ef.sub_test(u, h)
        assert ok and info["premise_holds"]

    def test_convex_below_cap(self):
        dom = dh.GridDomain.box([-1.0], [1.0], 0.25)
        u = grid_from(lambda p: p[:, 0] ** 2, dom)
        h = ef.make_edge_quadratic(ss.zero_subspace(1), 1.0, np.zeros(1),
                                   np.zeros((1, 1)))
        ok, info = ef.sub_test(u, h, tol=1e-12)
        assert ok and info["premise_holds"] and not info["vacuous"]

    def test_concave_bump_cases(self):
        dom = dh.GridDomain.box([-1.0], [1.0], 0.25)
        u = grid_from(lambda p: -p[:, 0] ** 2 + 1.0, dom)
        cap_one = ef.make_edge_quadratic(ss.zero_subspace(1), 1.0, np.zeros(1),
                                         np.zeros((1, 1)))
        ok, info = ef.sub_test(u, cap_one, tol=1e-12)
        assert ok  # u(0) = 1 <= 1
        cap_zero = ef.make_edge_quadratic(ss.zero_subspace(1), 0.0, np.zeros(1),
                                          np.zeros((1, 1)))
        ok, info = ef.sub_test(u, cap_zero, tol=1e-12)
        assert not ok and info["premise_holds"]
        assert info["interior_excess"] == pytest.approx(1.0)

    def test_vacuous_flag(self):
        dom = dh.GridDomain.box([-1.0], [1.0], 0.25)
        u = grid_from(lambda p: np.full(len(p), 2.0), dom)
        h = ef.make_edge_quadratic(ss.zero_subspace(1), 0.0, np.zeros(1),
                                   np.zeros((1, 1)))
        ok, info = ef.sub_test(u, h)
        assert ok and info["vacuous"] and not info["premise_holds"]


class TestEdgeQuadraticsAreHarmonic:
    @pytest.mark.parametrize("name,n", [("laplace", 2), ("P_C", 2), ("P", 2)])
    def test_two_sided_membership_of_hessian(self, name, n, rng):
        cone = cat.build_cone(name, n)
        dom = dh.GridDomain.box([-1.0] * n, [1.0] * n, 0.25)
        for h in ef.sample_edge_quadratics(cone.edge, 5, 1.0, 17):
            u = grid_from(lambda p: h(p), dom)
            interior = np.argwhere(dom.interior)
            for row in interior[:: max(1, len(interior) // 20)]:
                hess = dh.discrete_hessian(u, tuple(row))
                assert cone.contains(hess).verdict is not cn.Verdict.OUTSIDE
                assert cone.contains(-hess).verdict is not cn.Verdict.OUTSIDE


class TestViolationWitness:
    def test_hand_example_1d(self, lap1):
        dom = dh.GridDomain.box([-1.0], [1.0], 0.25)
        u = grid_from(lambda p: -p[:, 0] ** 2, dom)
        w = ef.violation_witness(u, lap1, (4,))
        assert w is not None
        # P = 2, alpha = 1, r = 3h: the shifted cap is the constant -alpha r^2
        assert w.margin == pytest.approx(1.0 * (3 * 0.25) ** 2)
        assert abs(w.quadratic.curvature).max() <= 1e-8
        assert w.verified

    def test_no_witness_for_convex(self, lap1):
        dom = dh.GridDomain.box([-1.0], [1.0], 0.25)
        u = grid_from(lambda p: p[:, 0] ** 2, dom)
        assert ef.violation_witness(u, lap1, (4,)) is None

    def test_complex_line_collapse(self, pc2):
        # in one complex dimension the cone is the trace half-space
        dom = dh.GridDomain.box([-1.0, -1.0], [1.0, 1.0], 0.25)
        u = grid_from(lambda p: -(p ** 2).sum(axis=1), dom)
        center = (4, 4)
        w = ef.violation_witness(u, pc2, center)
        assert w is not None and w.verified

    def test_witness_iff_dual_outside(self, pc2, rng):
        dom = dh.GridDomain.box([-1.0, -1.0], [1.0, 1.0], 0.25)
        for trial in range(10):
            coeffs = rng.normal(size=(3,))
            def fn(p, c=coeffs):
                return (c[0] * p[:, 0] ** 2 + c[1] * p[:, 0] * p[:, 1]
                        + c[2] * p[:, 1] ** 2)
            u = grid_from(fn, dom)
            idx = (4, 4)
            hess = dh.discrete_hessian(u, idx)
            dual = pc2.dual_contains(hess)
            w = ef.violation_witness(u, pc2, idx)
            if dual.verdict is cn.Verdict.BOUNDARY:
                continue
            assert (w is not None) == (dual.verdict is cn.Verdict.OUTSIDE)

    def test_bump_construction_with_subtest(self, pc2):
        dom = dh.GridDomain.box([-1.0, -1.0], [1.0, 1.0], 0.125)
        quads = ef.sample_edge_quadratics(pc2.edge, 3, 1.0, 23)
        for q in quads:
            pts = dom.coords().reshape(-1, 2)
            beta = 0.9
            vals = q(pts) - beta * (pts ** 2).sum(axis=1)
            u = dh.GridField(dom, vals.reshape(dom.shape))
            center = tuple(np.array(dom.shape) // 2)
            w = ef.violation_witness(u, pc2, center)
            assert w is not None and w.verified
            # confirm the failure on the local ball patch around the center
            patch = dh.GridDomain.ball(w.radius, dom.h, center=np.zeros(2))
            ppts = patch.coords().reshape(-1, 2)
            pvals = q(ppts) - beta * (ppts ** 2).sum(axis=1)
            up = dh.GridField(patch, pvals.reshape(patch.shape))
            ok, info = ef.sub_test(up, w.quadratic, tol=1e-8)
            assert not ok and info["premise_holds"]

    def test_certified_dual_subharmonic_no_witness(self, pc2, rng):
        dom = dh.GridDomain.box([-1.0, -1.0], [1.0, 1.0], 0.25)
        quads = ef.sample_edge_quadratics(pc2.edge, 3, 1.0, 29)
        for q in quads:
            pts = dom.coords().reshape(-1, 2)
            vals = q(pts) + 0.4 * (pts ** 2).sum(axis=1)
            u = dh.GridField(dom, vals.reshape(dom.shape))
            for idx in np.argwhere(dom.interior)[::5]:
                hess = dh.discrete_hessian(u, tuple(idx))
                assert pc2.dual_contains(hess).is_member
                assert ef.violation_witness(u, pc2, tuple(idx)) is None

    def test_dual_certified_passes_sub_test(self, pc2, rng):
        # dual members stay below every edge quadratic that caps them on
        # the boundary
        dom = dh.GridDomain.box([-1.0, -1.0], [1.0, 1.0], 0.25)
        pts = dom.coords().reshape(-1, 2)
        base = ef.sample_edge_quadratics(pc2.edge, 1, 0.5, 31)[0]
        u_vals = base(pts) + 0.3 * (pts ** 2).sum(axis=1)
        u = dh.GridField(dom, u_vals.reshape(dom.shape))
        checked = 0
        for h in ef.sample_edge_quadratics(pc2.edge, 200, 1.0, 37):
            hv = h(pts).reshape(dom.shape)
            shift = float((u.values - hv)[dom.boundary].max())
            h_above = ef.EdgeQuadratic(h.c + shift, h.b, h.curvature)
            ok, info = ef.sub_test(u, h_above, tol=1e-9)
            assert info["premise_holds"]
            assert ok
            checked += 1
        assert checked == 200

    def test_witness_record_roundtrip(self, lap1):
        dom = dh.GridDomain.box([-1.0], [1.0], 0.25)
        pts = dom.coords().reshape(-1, 1)
        u = dh.GridField(dom, (-pts[:, 0] ** 2).reshape(dom.shape))
        w = ef.violation_witness(u, lap1, (4,))
        rec = ef.witness_record(w)
        assert rec["verified"] is True
        assert rec["center"] == [4]
        assert len(rec["b"]) == 1
