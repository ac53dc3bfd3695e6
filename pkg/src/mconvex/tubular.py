"""Signed distance fields, nearest-point projection, and curvature transport.

Within the reach of an embedded boundary, every point has a unique nearest
boundary point, the signed distance has unit gradient, and its Hessian at an
offset point is carried by the boundary frame with eigenvalues
``nu_j / (1 + delta * nu_j)``. This module computes those objects: a
multi-start projection solver for generic implicit boundaries, analytic
shortcuts for exact distance fields, a reach estimator combining focal and
bottleneck bounds, and the curvature bound checks the collar construction
relies on.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import surfaces
from .surfaces import ImplicitDomain, SurfacePoint


class ProjectionError(RuntimeError):
    """The projection solver failed to converge for some points."""

    def __init__(self, message: str, best_foot=None, residual=None):
        self.best_foot = best_foot
        self.residual = residual
        super().__init__(message)


class FocalPointError(ValueError):
    """A point lies at or beyond a focal distance of the boundary."""


@dataclass(frozen=True)
class TubularCollar:
    """Working radii for the collar construction, strictly nested.

    ``0 < eps1 < eps2 < eps0 < eps0p < reach/2`` where ``reach`` is the
    tubular radius in force (user supplied or estimated).
    """

    reach: float
    eps0p: float
    eps0: float
    eps2: float
    eps1: float
    starts: int = 16
    tol: float = 1e-10

    def __post_init__(self):
        if not (0.0 < self.eps1 < self.eps2 < self.eps0 < self.eps0p):
            raise ValueError(
                f"collar radii must satisfy 0 < eps1 < eps2 < eps0 < eps0p, got "
                f"{self.eps1}, {self.eps2}, {self.eps0}, {self.eps0p}"
            )
        if not self.eps0p < 0.5 * self.reach:
            raise ValueError(
                f"outer collar radius {self.eps0p} must stay below half the "
                f"tubular radius {self.reach}"
            )


@dataclass(frozen=True)
class ProjectionResult:
    """Foot point and signed distance of one query point.

    ``multiplicity`` counts the distinct nearest feet found; a value above 1
    signals the point is at or beyond the reach. ``residual`` is the defining
    field value at the foot.
    """

    foot: np.ndarray
    distance: float
    multiplicity: int
    residual: float

    @property
    def delta(self) -> float:
        return self.distance


@dataclass
class ProjectionSettings:
    starts: int = 16
    tol: float = 1e-10
    max_pull_iters: int = 60
    newton_iters: int = 4
    cluster_tol: float = 1e-6
    equal_distance_tol: float = 1e-7


def _newton_to_surface(domain: ImplicitDomain, p: np.ndarray, reps: int = 2) -> np.ndarray:
    for _ in range(reps):
        val = domain.phi(p)[..., None]
        g = domain.grad(p)
        gsq = np.maximum(np.sum(g * g, axis=-1, keepdims=True), 1e-300)
        p = p - val * g / gsq
    return p


def project_batch(
    domain: ImplicitDomain,
    points: np.ndarray,
    settings: Optional[ProjectionSettings] = None,
    warm_feet: Optional[np.ndarray] = None,
):
    """Vectorized nearest-point projection onto the boundary.

    Returns ``(feet, distances, multiplicities)`` with shapes (B, n), (B,),
    (B,). Distances are signed: negative inside the domain. Uses the exact
    projection when the domain provides one, otherwise multi-start
    tangential pulls followed by a Lagrange-Newton polish.

    ``warm_feet`` supplies one known-good starting foot per point (for
    example the foot of a nearby point when evaluating difference
    stencils); it replaces the multi-start seeding, so it must only be used
    well inside the reach where the nearest foot is unique.
    """
    settings = settings or ProjectionSettings()
    x = np.atleast_2d(np.asarray(points, dtype=float))
    if domain.exact_projection is not None:
        foot, delta, mult = domain.exact_projection(x)
        return foot, np.asarray(delta, dtype=float), np.asarray(mult, dtype=float)

    nb, dim = x.shape
    if warm_feet is not None:
        ns = 1
        p = np.asarray(warm_feet, dtype=float).reshape(nb, 1, dim).copy()
    else:
        seeds = domain.boundary_samples(settings.starts)
        ns = seeds.shape[0] + 1
        p = np.empty((nb, ns, dim))
        p[:, :-1, :] = seeds[None, :, :]
        # first-order seed: one Newton step from the query point itself
        p[:, -1, :] = _newton_to_surface(domain, x, reps=3)
    p = p.reshape(nb * ns, dim)
    xq = np.repeat(x, ns, axis=0)

    p = _newton_to_surface(domain, p, reps=3)
    # Damped tangential pulls: full steps oscillate near focal configurations.
    damp = 0.6
    active = np.arange(p.shape[0])
    for _ in range(settings.max_pull_iters):
        pa = p[active]
        xa = xq[active]
        g = domain.grad(pa)
        gn = np.linalg.norm(g, axis=-1, keepdims=True)
        unit = g / np.maximum(gn, 1e-300)
        d = xa - pa
        step = damp * (d - np.sum(d * unit, axis=-1, keepdims=True) * unit)
        slen = np.linalg.norm(step, axis=-1, keepdims=True)
        cap = 0.5 * (1.0 + np.linalg.norm(d, axis=-1, keepdims=True))
        step = step * np.minimum(1.0, cap / np.maximum(slen, 1e-300))
        p[active] = _newton_to_surface(domain, pa + step, reps=2)
        moved = np.linalg.norm(step, axis=-1) >= 0.01 * settings.tol
        active = active[moved]
        if active.size == 0:
            break

    # Lagrange-Newton polish on (p, mu): x - p - mu * grad(p) = 0, phi(p) = 0.
    # Non-destructive: the polished candidate only replaces the pull result
    # where it ends up strictly closer to the surface-optimality conditions.
    p2 = p.copy()
    g = domain.grad(p2)
    mu = np.sum((xq - p2) * g, axis=-1) / np.maximum(np.sum(g * g, axis=-1), 1e-280)
    for _ in range(settings.newton_iters):
        g = domain.grad(p2)
        h = domain.hess(p2)
        r1 = xq - p2 - mu[:, None] * g
        r2 = domain.phi(p2)
        jac = np.zeros((p2.shape[0], dim + 1, dim + 1))
        jac[:, :dim, :dim] = -np.eye(dim)[None, :, :] - mu[:, None, None] * h
        jac[:, :dim, dim] = -g
        jac[:, dim, :dim] = g
        jac[:, dim, dim] = 1e-14
        rhs = np.concatenate([r1, r2[:, None]], axis=-1)
        try:
            delta = np.linalg.solve(jac, -rhs[..., None])[..., 0]
        except np.linalg.LinAlgError:
            break
        delta = np.where(np.isfinite(delta), delta, 0.0)
        step = delta[:, :dim]
        slen = np.linalg.norm(step, axis=-1, keepdims=True)
        step = step * np.minimum(1.0, 0.25 / np.maximum(slen, 1e-300))
        p2 = p2 + step
        mu = mu + np.clip(delta[:, dim], -0.25, 0.25)
    p2 = _newton_to_surface(domain, p2, reps=2)

    def residuals(cand):
        phi_c = np.abs(domain.phi(cand))
        g_c = domain.grad(cand)
        gsq = np.maximum(np.sum(g_c * g_c, axis=-1), 1e-280)
        d_c = xq - cand
        tang_c = d_c - (np.sum(d_c * g_c, axis=-1) / gsq)[..., None] * g_c
        return phi_c, np.linalg.norm(tang_c, axis=-1)

    phi_a, tang_a = residuals(p)
    phi_b, tang_b = residuals(p2)
    take_b = (phi_b + tang_b) < (phi_a + tang_a)
    p = np.where(take_b[:, None], p2, p)
    phi_feet = np.where(take_b, phi_b, phi_a).reshape(nb, ns)
    tang_res = np.where(take_b, tang_b, tang_a).reshape(nb, ns)

    p = p.reshape(nb, ns, dim)
    scale = 1.0 + np.linalg.norm(x, axis=-1)
    ok = phi_feet <= 1e-9 * scale[:, None]
    ok &= tang_res <= 1e3 * settings.tol * scale[:, None]
    # only sharply converged critical points may witness extra nearest feet;
    # near-focal valleys leave loosely converged candidates at nearly the
    # best distance that would otherwise fake a multiplicity
    critical = ok & (tang_res <= 1e2 * settings.tol * scale[:, None])

    dist = np.linalg.norm(x[:, None, :] - p, axis=-1)
    dist_masked = np.where(ok, dist, np.inf)
    best_idx = np.argmin(dist_masked, axis=1)
    best = dist_masked[np.arange(nb), best_idx]
    if not np.all(np.isfinite(best)):
        bad = int(np.argmax(~np.isfinite(best)))
        raise ProjectionError(
            f"projection failed to converge at {x[bad].tolist()}",
            best_foot=p[bad, np.argmin(dist[bad])],
            residual=float(np.min(phi_feet[bad])),
        )

    feet = p[np.arange(nb), best_idx]
    mult = np.ones(nb)
    eq_tol = settings.equal_distance_tol * (1.0 + best)
    sep_tol = settings.cluster_tol * scale
    for i in range(nb):
        near = critical[i] & (dist[i] <= best[i] + eq_tol[i])
        cand = p[i][near]
        reps: list[np.ndarray] = []
        for row in cand:
            if all(np.linalg.norm(row - r) > sep_tol[i] for r in reps):
                reps.append(row)
        mult[i] = max(1, len(reps))

    sign = np.where(domain.phi(x) >= 0.0, 1.0, -1.0)
    delta = sign * best
    return feet, delta, mult


def signed_distance(
    domain: ImplicitDomain,
    x: np.ndarray,
    settings: Optional[ProjectionSettings] = None,
) -> ProjectionResult:
    """Signed distance and nearest foot of a single point (negative inside)."""
    x = np.asarray(x, dtype=float)
    feet, delta, mult = project_batch(domain, x[None, :], settings)
    residual = float(abs(domain.phi(feet[0])))
    return ProjectionResult(
        foot=feet[0],
        distance=float(delta[0]),
        multiplicity=int(mult[0]) if np.isfinite(mult[0]) else int(1e9),
        residual=residual,
    )


def grad_delta(
    domain: ImplicitDomain,
    x: np.ndarray,
    settings: Optional[ProjectionSettings] = None,
) -> np.ndarray:
    """Unit gradient of the signed distance, pointing toward increasing distance."""
    x = np.asarray(x, dtype=float)
    res = signed_distance(domain, x, settings)
    if res.multiplicity > 1:
        raise FocalPointError(
            f"point {x.tolist()} has {res.multiplicity} nearest feet; beyond reach"
        )
    if abs(res.distance) < 1e-12 * (1.0 + np.linalg.norm(x)):
        g = np.asarray(domain.grad(res.foot), dtype=float)
        return g / np.linalg.norm(g)
    return (x - res.foot) / res.distance


def transport_curvatures(sp: SurfacePoint, t: float) -> np.ndarray:
    """Principal curvatures of the parallel hypersurface at signed offset t.

    The offset point is ``p + t * grad_delta(p)`` with t <= 0 inside; each
    curvature maps to ``nu / (1 + t * nu)``, which preserves order and sign
    and is the identity at t = 0.
    """
    nu = np.asarray(sp.curvatures, dtype=float)
    denom = 1.0 + t * nu
    if np.any(denom <= 0.0):
        raise FocalPointError(
            f"offset {t} reaches a focal point: 1 + t*nu = {denom.min():.3e}"
        )
    return nu / denom


def surface_point_at(
    domain: ImplicitDomain,
    x: np.ndarray,
    settings: Optional[ProjectionSettings] = None,
):
    """Foot point data and signed distance for a collar point."""
    x = np.asarray(x, dtype=float)
    res = signed_distance(domain, x, settings)
    if res.multiplicity > 1:
        raise FocalPointError(
            f"point {x.tolist()} has {res.multiplicity} nearest feet; beyond reach"
        )
    sp = surfaces.principal_curvatures(domain, res.foot)
    return sp, res


def hessian_delta(
    domain: ImplicitDomain,
    x: np.ndarray,
    settings: Optional[ProjectionSettings] = None,
) -> np.ndarray:
    """Hessian of the signed distance assembled from transported curvatures.

    The boundary frame at the foot diagonalizes the Hessian all along the
    normal line; the normal direction carries eigenvalue zero.
    """
    sp, res = surface_point_at(domain, x, settings)
    nu_x = transport_curvatures(sp, res.distance)
    h = np.zeros((domain.dim, domain.dim))
    for j in range(nu_x.size):
        d = sp.directions[j]
        h += nu_x[j] * np.outer(d, d)
    return h


@dataclass(frozen=True)
class ReachEstimate:
    """Lower-bound reach estimate over a sampled boundary region.

    ``focal_bound`` is 1/max|nu| over the samples; ``bottleneck_bound`` is
    the smallest normal distance at which the nearest foot jumps to another
    sheet (half the cross-sheet separation). Local evidence only: values
    reflect the sampled region, not the full boundary.
    """

    value: float
    focal_bound: float
    bottleneck_bound: float
    capped: bool
    samples: int
    note: str = "estimate over sampled region only"


def reach_estimate(
    domain: ImplicitDomain,
    boundary_samples: np.ndarray,
    probe_count: int = 24,
    cap: Optional[float] = None,
    settings: Optional[ProjectionSettings] = None,
) -> ReachEstimate:
    """Estimate the tubular radius from focal and bottleneck phenomena."""
    pts = np.atleast_2d(np.asarray(boundary_samples, dtype=float))
    if pts.size == 0:
        raise ValueError("empty boundary sample set")
    sps = [surfaces.principal_curvatures(domain, row) for row in pts]
    peak = max(float(np.max(np.abs(sp.curvatures))) for sp in sps)
    focal = np.inf if peak == 0.0 else 1.0 / peak
    if focal < 1e-12:
        return ReachEstimate(0.0, focal, 0.0, False, len(sps))

    if cap is None:
        if np.isfinite(focal):
            cap = 2.0 * focal
        elif domain.box is not None:
            cap = float(np.max(domain.box[1] - domain.box[0]))
        else:
            cap = 8.0

    stride = max(1, len(sps) // probe_count)
    probes = sps[::stride]
    bottleneck = np.inf
    capped = True
    for sp in probes:
        for direction in (sp.inner_normal, -sp.inner_normal):
            s_ok = _largest_same_foot_offset(domain, sp.position, direction, cap, settings)
            if s_ok < cap:
                capped = False
            bottleneck = min(bottleneck, s_ok)
    value = min(focal, bottleneck)
    return ReachEstimate(
        value=float(value),
        focal_bound=float(focal),
        bottleneck_bound=float(bottleneck),
        capped=capped and not np.isfinite(focal),
        samples=len(sps),
    )


def _largest_same_foot_offset(domain, p, direction, cap, settings, iters: int = 40):
    def same_foot(s: float) -> bool:
        x = p + s * direction
        feet, _, mult = project_batch(domain, x[None, :], settings)
        if mult[0] > 1:
            return False
        return float(np.linalg.norm(feet[0] - p)) <= 1e-5 * (1.0 + s)

    if same_foot(cap):
        return cap
    lo, hi = 0.0, cap
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if same_foot(mid):
            lo = mid
        else:
            hi = mid
    return lo


@dataclass(frozen=True)
class BoundsViolation:
    point: np.ndarray
    curvatures: np.ndarray
    margin: float
    check: str


@dataclass(frozen=True)
class CurvatureBoundsReport:
    """Margins for the collar curvature bounds over boundary samples.

    Checks, per sample: every curvature lies in [-(m-1)/eps, 1/eps], and the
    sum of the nonpositive curvatures is at least -(m-1)/eps. Margins are
    slack amounts; negative margin means violation.
    """

    eps: float
    m: int
    samples: int
    worst_lower: float
    worst_upper: float
    worst_negative_sum: float
    violations: tuple

    @property
    def passed(self) -> bool:
        return len(self.violations) == 0


def curvature_bounds_check(
    domain: ImplicitDomain,
    eps: float,
    m: int,
    boundary_samples: np.ndarray,
    tol: float = 1e-9,
) -> CurvatureBoundsReport:
    pts = np.atleast_2d(np.asarray(boundary_samples, dtype=float))
    lower = -(m - 1) / eps
    upper = 1.0 / eps
    worst_lower = np.inf
    worst_upper = np.inf
    worst_negsum = np.inf
    violations = []
    for row in pts:
        sp = surfaces.principal_curvatures(domain, row)
        nu = sp.curvatures
        lo_margin = float(np.min(nu - lower))
        up_margin = float(np.min(upper - nu))
        negsum = float(np.sum(nu[nu <= 0.0]))
        ns_margin = negsum - lower
        worst_lower = min(worst_lower, lo_margin)
        worst_upper = min(worst_upper, up_margin)
        worst_negsum = min(worst_negsum, ns_margin)
        for margin, label in (
            (lo_margin, "lower"),
            (up_margin, "upper"),
            (ns_margin, "negative-sum"),
        ):
            if margin < -tol:
                violations.append(BoundsViolation(row, nu.copy(), margin, label))
    return CurvatureBoundsReport(
        eps=eps,
        m=m,
        samples=len(pts),
        worst_lower=worst_lower,
        worst_upper=worst_upper,
        worst_negative_sum=worst_negsum,
        violations=tuple(violations),
    )


def collar_points(
    domain: ImplicitDomain,
    count: int,
    depth_min: float,
    depth_max: float,
) -> np.ndarray:
    """Deterministic collar samples p + t * inner_normal, depths stratified.

    Depths run over (depth_min, depth_max), both positive distances into the
    domain; the signed distance at the returned points is minus the depth.
    """
    if not 0.0 <= depth_min < depth_max:
        raise ValueError("need 0 <= depth_min < depth_max")
    n_depth = max(4, int(round(count ** (1.0 / 3.0))))
    n_base = int(np.ceil(count / n_depth))
    base = domain.boundary_samples(n_base)
    depths = depth_min + (depth_max - depth_min) * (
        (np.arange(n_depth) + 0.5) / n_depth
    )
    rows = []
    for p in base:
        sp_grad = domain.grad(p)
        inner = -sp_grad / np.linalg.norm(sp_grad)
        rows.append(p[None, :] + depths[:, None] * inner[None, :])
    pts = np.concatenate(rows, axis=0)
    return pts[:count]
