import numpy as np
import pytest

from mconvex import numkit, surfaces, tubular


def generic_sphere():
    """Unit-ball domain stripped of its exact projection, to exercise the
    multi-start solver on a case with a known answer."""
    ball = surfaces.sphere()
    return surfaces.ImplicitDomain(
        "generic-sphere", 3, ball.phi, ball._grad, ball._hess,
        boundary_sampler=ball._boundary_sampler, box=ball.box,
    )


def test_signed_distance_ball_inside():
    ball = surfaces.sphere()
    res = tubular.signed_distance(ball, np.array([0.5, 0.0, 0.0]))
    assert res.distance == pytest.approx(-0.5, abs=1e-12)
    assert np.allclose(res.foot, [1.0, 0.0, 0.0], atol=1e-12)
    assert res.multiplicity == 1


def test_signed_distance_ball_outside():
    ball = surfaces.sphere()
    res = tubular.signed_distance(ball, np.array([2.0, 0.0, 0.0]))
    assert res.distance == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(res.foot, [1.0, 0.0, 0.0], atol=1e-12)


def test_generic_solver_matches_exact_on_sphere():
    gen = generic_sphere()
    rng = np.random.default_rng(2)
    pts = rng.uniform(-0.9, 0.9, size=(20, 3))
    feet, delta, mult = tubular.project_batch(gen, pts)
    exact = np.linalg.norm(pts, axis=-1) - 1.0
    assert np.max(np.abs(delta - exact)) < 1e-9
    assert np.max(np.abs(np.abs(np.linalg.norm(feet, axis=-1)) - 1.0)) < 1e-9


def test_catenoid_axis_multiplicity():
    cat = surfaces.catenoid()
    res = tubular.signed_distance(cat, np.zeros(3))
    assert res.distance == pytest.approx(-1.0, abs=1e-8)
    assert res.multiplicity > 1


def test_foot_lies_on_boundary():
    cat = surfaces.catenoid()
    pts = tubular.collar_points(cat, 50, 0.02, 0.3)
    feet, delta, _ = tubular.project_batch(cat, pts)
    scale = 1.0 + np.linalg.norm(pts, axis=-1)
    assert np.max(np.abs(cat.phi(feet)) / scale) < 1e-8


def test_grad_delta_examples():
    ball = surfaces.sphere()
    g = tubular.grad_delta(ball, np.array([0.5, 0.0, 0.0]))
    assert np.allclose(g, [1.0, 0.0, 0.0], atol=1e-12)
    plane = surfaces.halfspace()
    g = tubular.grad_delta(plane, np.array([0.0, 0.0, -0.3]))
    assert np.allclose(g, [0.0, 0.0, 1.0], atol=1e-12)


def test_grad_delta_unit_norm_and_fd_agreement_catenoid():
    cat = surfaces.catenoid()
    pts = tubular.collar_points(cat, 12, 0.05, 0.3)
    for x in pts:
        g = tubular.grad_delta(cat, x)
        assert abs(np.linalg.norm(g) - 1.0) < 1e-6
        gfd = numkit.gradient_fd(
            lambda y: tubular.signed_distance(cat, y).distance, x, 1e-5
        )
        assert np.max(np.abs(g - gfd)) < 1e-5


def test_transport_examples():
    ball = surfaces.sphere()
    sp = surfaces.principal_curvatures(ball, np.array([1.0, 0.0, 0.0]))
    moved = tubular.transport_curvatures(sp, -0.5)
    assert np.allclose(moved, [2.0, 2.0], atol=1e-12)

    plane = surfaces.halfspace()
    spp = surfaces.principal_curvatures(plane, np.zeros(3))
    assert np.allclose(tubular.transport_curvatures(spp, -0.7), [0.0, 0.0])

    cat = surfaces.catenoid()
    neck = surfaces.principal_curvatures(cat, np.array([1.0, 0.0, 0.0]))
    moved = tubular.transport_curvatures(neck, -0.2)
    assert np.allclose(moved, [-1.0 / 1.2, 1.0 / 0.8], atol=1e-9)
    assert moved.sum() == pytest.approx(1.0 / 0.8 - 1.0 / 1.2)
    assert moved.sum() > 0.0


def test_transport_focal_rejected():
    ball = surfaces.sphere()
    sp = surfaces.principal_curvatures(ball, np.array([1.0, 0.0, 0.0]))
    with pytest.raises(tubular.FocalPointError):
        tubular.transport_curvatures(sp, -1.0)


def test_transport_monotone_and_sign_preserving():
    rng = np.random.default_rng(4)
    for _ in range(50):
        nu = np.sort(rng.uniform(-0.9, 2.0, size=3))
        sp = surfaces.SurfacePoint(np.zeros(3), np.zeros(3), nu, np.zeros((3, 3)))
        ts = -np.sort(rng.uniform(0.0, 0.45, size=4))  # valid: |t| nu < 1
        prev = nu
        for t in ts:
            cur = tubular.transport_curvatures(sp, t)
            assert np.all(cur >= prev - 1e-12)  # moving inward never decreases
            assert np.all(np.sign(cur) == np.sign(nu))
            assert np.all(np.diff(cur) >= -1e-12)  # ordering preserved
            prev = cur


def test_transport_semigroup():
    rng = np.random.default_rng(9)
    for _ in range(50):
        nu = np.sort(rng.uniform(-1.0, 3.0, size=4))
        sp = surfaces.SurfacePoint(np.zeros(3), np.zeros(3), nu, np.zeros((4, 3)))
        t, s = -rng.uniform(0.0, 0.2, size=2)
        if np.any(1.0 + (t + s) * nu <= 0.05):
            continue
        once = tubular.transport_curvatures(sp, t)
        sp2 = surfaces.SurfacePoint(np.zeros(3), np.zeros(3), once, np.zeros((4, 3)))
        twice = tubular.transport_curvatures(sp2, s)
        direct = tubular.transport_curvatures(sp, t + s)
        assert np.max(np.abs(twice - direct)) < 1e-10


def test_hessian_delta_plane_zero():
    plane = surfaces.halfspace()
    h = tubular.hessian_delta(plane, np.array([0.4, 1.0, -0.2]))
    assert np.max(np.abs(h)) == 0.0


def test_hessian_delta_ball():
    ball = surfaces.sphere()
    x = np.array([0.5, 0.0, 0.0])
    h = tubular.hessian_delta(ball, x)
    eig = numkit.sym_eigen(h)
    assert np.max(np.abs(eig.eigenvalues - [0.0, 2.0, 2.0])) < 1e-9
    kernel = eig.eigenvectors[:, 0]
    assert np.max(np.abs(np.abs(kernel) - [1.0, 0.0, 0.0])) < 1e-9


def test_hessian_delta_annihilates_gradient():
    for dom in (surfaces.sphere(), surfaces.catenoid()):
        pts = tubular.collar_points(dom, 10, 0.05, 0.25)
        for x in pts:
            h = tubular.hessian_delta(dom, x)
            g = tubular.grad_delta(dom, x)
            assert np.max(np.abs(h @ g)) < 1e-6


def test_hessian_delta_fd_agreement():
    for dom in (surfaces.sphere(), surfaces.cylinder(), surfaces.catenoid()):
        pts = tubular.collar_points(dom, 8, 0.05, 0.25)
        for x in pts:
            h = tubular.hessian_delta(dom, x)
            hfd = numkit.hessian_fd(
                lambda y: tubular.signed_distance(dom, y).distance, x, 1e-4
            )
            assert np.max(np.abs(h - hfd)) < 1e-4


def brute_force_catenoid_cut_from_neck():
    """Independent two-sheet search: largest s with the neck still nearest."""
    v = np.linspace(-3.0, 3.0, 6001)
    profile = np.stack([np.cosh(v), v], axis=-1)  # (r, z) curve

    def dist(r, z):
        return np.min(np.hypot(profile[:, 0] - r, profile[:, 1] - z))

    lo, hi = 0.0, 2.0
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        # inward from the neck point (1, 0); cylindrical radius is |1 - mid|
        d = dist(abs(1.0 - mid), 0.0)
        if abs(d - mid) < 1e-9:
            lo = mid
        else:
            hi = mid
    return lo


def test_reach_estimates():
    ball = surfaces.sphere()
    est = tubular.reach_estimate(ball, ball.boundary_samples(64), probe_count=6)
    assert est.value == pytest.approx(1.0, abs=1e-6)

    slab = surfaces.slab()
    est = tubular.reach_estimate(slab, slab.boundary_samples(64), probe_count=6)
    assert est.value == pytest.approx(1.0, abs=1e-6)
    assert est.focal_bound == np.inf

    cat = surfaces.catenoid()
    est = tubular.reach_estimate(cat, cat.boundary_samples(100), probe_count=8)
    brute = brute_force_catenoid_cut_from_neck()
    assert est.value <= 1.0 + 1e-6
    assert abs(est.value - brute) / brute < 0.05


def test_reach_empty_rejected():
    with pytest.raises(ValueError):
        tubular.reach_estimate(surfaces.sphere(), np.zeros((0, 3)))


def test_curvature_bounds_examples():
    ball = surfaces.sphere()
    rep = tubular.curvature_bounds_check(ball, 1.0, 2, ball.boundary_samples(32))
    assert rep.passed
    assert rep.worst_upper == pytest.approx(0.0, abs=1e-9)

    plane = surfaces.halfspace()
    for eps in (0.5, 1.0, 3.0):
        rep = tubular.curvature_bounds_check(plane, eps, 2, plane.boundary_samples(16))
        assert rep.passed

    cat = surfaces.catenoid()
    rep = tubular.curvature_bounds_check(cat, 0.5, 2, cat.boundary_samples(64))
    assert rep.passed
    assert rep.worst_lower >= 1.0 - 1e-6  # curvatures in [-1, 1] inside [-2, 2]
    assert rep.worst_upper >= 1.0 - 1e-6


def test_curvature_bounds_violation_detected():
    # inconsistent eps: the unit ball cannot have a tube of radius 2
    ball = surfaces.sphere()
    rep = tubular.curvature_bounds_check(ball, 2.0, 2, ball.boundary_samples(16))
    assert not rep.passed
    assert any(v.check == "upper" for v in rep.violations)


def test_collar_points_depths():
    cat = surfaces.catenoid()
    pts = tubular.collar_points(cat, 60, 0.05, 0.2)
    _, delta, _ = tubular.project_batch(cat, pts)
    assert np.all(delta < -0.049)
    assert np.all(delta > -0.201)


def test_warm_start_projection_agrees():
    cat = surfaces.catenoid()
    pts = tubular.collar_points(cat, 30, 0.05, 0.25)
    feet, delta, _ = tubular.project_batch(cat, pts)
    shifted = pts + 1e-4
    feet2, delta2, _ = tubular.project_batch(cat, shifted, warm_feet=feet)
    feet3, delta3, _ = tubular.project_batch(cat, shifted)
    assert np.max(np.abs(delta2 - delta3)) < 1e-10
    assert np.max(np.linalg.norm(feet2 - feet3, axis=-1)) < 1e-7


def test_collar_invariants_unit_gradient():
    # |grad delta| = 1 via finite differences of the distance field itself
    for dom in (surfaces.sphere(), surfaces.slab()):
        pts = tubular.collar_points(dom, 40, 0.05, 0.4)
        for x in pts[:10]:
            g = numkit.gradient_fd(
                lambda y: tubular.signed_distance(dom, y).distance, x, 1e-5
            )
            assert abs(np.linalg.norm(g) - 1.0) < 1e-6
