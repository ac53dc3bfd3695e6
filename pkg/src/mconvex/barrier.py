"""Construction of m-plurisubharmonic defining functions from signed distance.

The defining function is built in three stages. A convex increasing profile
``h(t) = (exp(a*t) - 1)/a`` reshapes the signed distance so that the normal
Hessian eigenvalue ``h''`` dominates the worst negative tangential sum on a
collar band; composing with the plateau ``h(-eps0)`` outside the band gives
a continuous function, and a convex C^2 cap ``chi`` (constant below
``h(-eps2)``, identity above ``h(-eps1)``) smooths the seam. The final
rescale by ``c = -1/h(-eps1)`` puts the regular level range at (-1, 0]:
there the level sets of the result are exactly level sets of the signed
distance at ``h^{-1}(t/c)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import mpsh, numkit, surfaces, tubular
from .surfaces import ImplicitDomain
from .tubular import ProjectionSettings, TubularCollar


class MConvexityError(ValueError):
    """The boundary fails the m-convexity precondition at a sample."""

    def __init__(self, point: np.ndarray, sigma_m: float, m: int):
        self.point = np.asarray(point, dtype=float)
        self.sigma_m = sigma_m
        self.m = m
        super().__init__(
            f"boundary is not {m}-convex at {self.point.tolist()}: "
            f"curvature sum {sigma_m:.3e} < 0"
        )


@dataclass(frozen=True)
class ConvexProfile:
    """The convex increasing reshaping profile and its design context.

    ``h(0) = 0``, ``h'(0) = 1``, ``h''(0) = alpha``; for t < 0 the profile is
    negative with slope in [0, 1). ``curvature_floor`` records the value
    ``(m-1)/eps`` that ``h''`` must strictly exceed on the working band.
    """

    alpha: float
    m: int
    eps: float

    @property
    def curvature_floor(self) -> float:
        return (self.m - 1) / self.eps

    def value(self, t):
        return np.expm1(self.alpha * np.asarray(t, dtype=float)) / self.alpha

    def d1(self, t):
        return np.exp(self.alpha * np.asarray(t, dtype=float))

    def d2(self, t):
        return self.alpha * np.exp(self.alpha * np.asarray(t, dtype=float))

    def inverse(self, y):
        return np.log1p(self.alpha * np.asarray(y, dtype=float)) / self.alpha

    def band_width(self) -> float:
        """Largest radius with h'' above the curvature floor on [-radius, 0]."""
        floor = self.curvature_floor
        if floor <= 0.0:
            return math.inf
        return math.log(self.alpha / floor) / self.alpha


def make_profile(alpha: float, m: int, eps: float) -> ConvexProfile:
    """Validated exponential profile; requires ``alpha > (m-1)/eps`` strictly."""
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    if m < 1:
        raise ValueError("m must be at least 1")
    floor = (m - 1) / eps
    if not alpha > floor:
        raise ValueError(
            f"alpha must strictly exceed (m-1)/eps = {floor:.6g}, got {alpha:.6g}"
        )
    return ConvexProfile(alpha=float(alpha), m=int(m), eps=float(eps))


def default_alpha(m: int, eps: float) -> float:
    """Twice the threshold; for m = 1 the threshold is zero, use 1/eps."""
    return 2.0 * (m - 1) / eps if m >= 2 else 1.0 / eps


def choose_collar(
    profile: ConvexProfile,
    eps: float,
    safety: float = 0.99,
    ratios: tuple = (0.9, 0.6, 0.3),
    starts: int = 16,
    tol: float = 1e-10,
) -> TubularCollar:
    """Nested collar radii inside the band where the profile convexity wins.

    The outer radius is ``safety * min(eps/2, band_width)``; the inner radii
    follow the default ratios eps0/eps0p, eps2/eps0, eps1/eps0.
    """
    if not 0.0 < safety < 1.0:
        raise ValueError("safety must lie in (0, 1)")
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    width = profile.band_width()
    eps0p = safety * min(0.5 * eps, width)
    if not eps0p > 0.0:
        raise ValueError("outer collar radius must be positive")
    r0, r2, r1 = ratios
    eps0 = r0 * eps0p
    eps2 = r2 * eps0
    eps1 = r1 * eps0
    return TubularCollar(
        reach=eps, eps0p=eps0p, eps0=eps0, eps2=eps2, eps1=eps1, starts=starts, tol=tol
    )


_SMOOTHSTEP_COEFFS = {
    # chi' on the transition, as polynomial coefficients in u (ascending)
    3: np.array([0.0, 0.0, 3.0, -2.0]),
    5: np.array([0.0, 0.0, 0.0, 10.0, -15.0, 6.0]),
    7: np.array([0.0, 0.0, 0.0, 0.0, 35.0, -84.0, 70.0, -20.0]),
}


@dataclass(frozen=True)
class SmoothingCap:
    """Convex C^2 cap: constant below ``lo``, identity above ``hi``.

    On the transition the derivative is the smoothstep polynomial of the
    given degree in the rescaled variable, integrated in closed form; its
    nonnegative derivative makes the cap convex, and the zero endpoint
    slopes of the smoothstep give the C^2 matching.
    """

    lo: float
    hi: float
    degree: int = 3

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"degenerate cap interval [{self.lo}, {self.hi}]")
        if self.degree not in _SMOOTHSTEP_COEFFS:
            raise ValueError(
                f"unsupported cap degree {self.degree}; choices "
                f"{sorted(_SMOOTHSTEP_COEFFS)}"
            )

    @property
    def plateau(self) -> float:
        # the smoothstep family integrates to 1/2 over the transition
        return 0.5 * (self.lo + self.hi)

    def _u(self, t):
        return np.clip((np.asarray(t, dtype=float) - self.lo) / (self.hi - self.lo), 0.0, 1.0)

    def value(self, t):
        t = np.asarray(t, dtype=float)
        u = self._u(t)
        coeffs = _SMOOTHSTEP_COEFFS[self.degree]
        # antiderivative of chi' in u, then chi(t) = hi - (hi-lo)*(I(1) - I(u))
        anti = np.polynomial.polynomial.polyval(u, _antiderivative(coeffs))
        anti1 = np.polynomial.polynomial.polyval(1.0, _antiderivative(coeffs))
        mid = self.hi - (self.hi - self.lo) * (anti1 - anti)
        return np.where(t >= self.hi, t, np.where(t <= self.lo, self.plateau, mid))

    def d1(self, t):
        t = np.asarray(t, dtype=float)
        u = self._u(t)
        s = np.polynomial.polynomial.polyval(u, _SMOOTHSTEP_COEFFS[self.degree])
        return np.where(t >= self.hi, 1.0, np.where(t <= self.lo, 0.0, s))

    def d2(self, t):
        t = np.asarray(t, dtype=float)
        u = self._u(t)
        dcoeffs = np.polynomial.polynomial.polyder(_SMOOTHSTEP_COEFFS[self.degree])
        s = np.polynomial.polynomial.polyval(u, dcoeffs) / (self.hi - self.lo)
        inside = (t > self.lo) & (t < self.hi)
        return np.where(inside, s, 0.0)


def _antiderivative(coeffs: np.ndarray) -> np.ndarray:
    return np.polynomial.polynomial.polyint(coeffs)


def make_cap(collar: TubularCollar, profile: ConvexProfile, degree: int = 3) -> SmoothingCap:
    """Cap thresholds from the collar radii, with a convexity self-check."""
    lo = float(profile.value(-collar.eps2))
    hi = float(profile.value(-collar.eps1))
    cap = SmoothingCap(lo=lo, hi=hi, degree=degree)
    mid = np.linspace(lo, hi, 1000)
    curv = cap.d2(mid)
    if np.any(curv < -1e-12):
        raise RuntimeError(
            f"cap construction produced negative convexity {curv.min():.3e}"
        )
    return cap


def rho0(
    domain: ImplicitDomain,
    collar: TubularCollar,
    profile: ConvexProfile,
    x: np.ndarray,
    settings: Optional[ProjectionSettings] = None,
) -> float:
    """Profiled distance on the collar, constant plateau deeper inside.

    Equals the maximum of the profiled distance and the plateau value, so it
    stays continuous across the seam.
    """
    res = tubular.signed_distance(domain, np.asarray(x, dtype=float), settings)
    return float(profile.value(max(res.distance, -collar.eps0)))


class BarrierFunction:
    """The assembled defining function ``c * chi(h(delta))`` with its jets.

    Nonpositive on the closed domain, zero exactly on the boundary, constant
    on the deep plateau; gradient and Hessian are assembled analytically
    from the nearest-point frame via the chain rule. Levels in (-1, 0) are
    levels of the signed distance at ``h^{-1}(t/c)``.
    """

    def __init__(
        self,
        domain: ImplicitDomain,
        collar: TubularCollar,
        profile: ConvexProfile,
        cap: SmoothingCap,
        settings: Optional[ProjectionSettings] = None,
    ):
        self.domain = domain
        self.collar = collar
        self.profile = profile
        self.cap = cap
        self.settings = settings or ProjectionSettings(
            starts=collar.starts, tol=collar.tol
        )
        self.scale = -1.0 / float(profile.value(-collar.eps1))
        if not self.scale > 0.0:
            raise ValueError("profile must be negative at -eps1")

    @property
    def m(self) -> int:
        return self.profile.m

    @property
    def plateau_value(self) -> float:
        return self.scale * self.cap.plateau

    def delta(self, x: np.ndarray) -> float:
        return tubular.signed_distance(self.domain, x, self.settings).distance

    def delta_batch(self, points: np.ndarray) -> np.ndarray:
        _, dlt, _ = tubular.project_batch(self.domain, points, self.settings)
        return dlt

    def value(self, x: np.ndarray) -> float:
        return self.value_from_delta(self.delta(x))

    def value_from_delta(self, delta) -> float:
        d = np.maximum(np.asarray(delta, dtype=float), -self.collar.eps0)
        out = self.scale * self.cap.value(self.profile.value(d))
        return float(out) if out.ndim == 0 else out

    def value_batch(self, points: np.ndarray) -> np.ndarray:
        return self.value_from_delta(self.delta_batch(points))

    def gradient(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        res = tubular.signed_distance(self.domain, x, self.settings)
        if res.distance <= -self.collar.eps2:
            return np.zeros(self.domain.dim)
        grad_d = self._grad_delta(x, res)
        r0 = self.profile.value(res.distance)
        return (
            self.scale
            * float(self.cap.d1(r0))
            * float(self.profile.d1(res.distance))
            * grad_d
        )

    def hessian(self, x: np.ndarray) -> np.ndarray:
        """Chain-rule Hessian, exact in the nearest-point frame."""
        x = np.asarray(x, dtype=float)
        res = tubular.signed_distance(self.domain, x, self.settings)
        dim = self.domain.dim
        if res.distance <= -self.collar.eps2:
            return np.zeros((dim, dim))
        sp = surfaces.principal_curvatures(self.domain, res.foot)
        nu_x = tubular.transport_curvatures(sp, res.distance)
        grad_d = self._grad_delta(x, res)
        hess_d = np.zeros((dim, dim))
        for j in range(nu_x.size):
            d = sp.directions[j]
            hess_d += nu_x[j] * np.outer(d, d)
        t = res.distance
        r0 = float(self.profile.value(t))
        h1 = float(self.profile.d1(t))
        h2 = float(self.profile.d2(t))
        c1 = float(self.cap.d1(r0))
        c2 = float(self.cap.d2(r0))
        normal_coeff = c1 * h2 + c2 * h1 * h1
        return self.scale * (
            c1 * h1 * hess_d + normal_coeff * np.outer(grad_d, grad_d)
        )

    def eigen_list(self, x: np.ndarray) -> np.ndarray:
        """The analytic Hessian spectrum: scaled transported curvatures plus
        the normal eigenvalue, sorted ascending."""
        x = np.asarray(x, dtype=float)
        res = tubular.signed_distance(self.domain, x, self.settings)
        dim = self.domain.dim
        if res.distance <= -self.collar.eps2:
            return np.zeros(dim)
        sp = surfaces.principal_curvatures(self.domain, res.foot)
        nu_x = tubular.transport_curvatures(sp, res.distance)
        t = res.distance
        r0 = float(self.profile.value(t))
        h1 = float(self.profile.d1(t))
        h2 = float(self.profile.d2(t))
        c1 = float(self.cap.d1(r0))
        c2 = float(self.cap.d2(r0))
        tangent = self.scale * c1 * h1 * nu_x
        normal = self.scale * (c1 * h2 + c2 * h1 * h1)
        return np.sort(np.append(tangent, normal))

    def level_delta(self, t: float) -> float:
        """Signed distance of the level set {rho = t} for t in (-1, 0)."""
        if not -1.0 < t < 0.0:
            raise ValueError(f"level must lie in (-1, 0), got {t}")
        return float(self.profile.inverse(t / self.scale))

    def hessian_batch(self, points: np.ndarray):
        """Analytic Hessians and predicted spectra for many points at once.

        Returns ``(hessians, eigen_lists)`` of shapes (B, n, n) and (B, n).
        One batched projection solve feeds all the frames.
        """
        points = np.atleast_2d(np.asarray(points, dtype=float))
        nb, dim = points.shape
        feet, dlt, mult = tubular.project_batch(self.domain, points, self.settings)
        hessians = np.zeros((nb, dim, dim))
        spectra = np.zeros((nb, dim))
        for i in range(nb):
            t = dlt[i]
            if t <= -self.collar.eps2:
                continue
            if mult[i] > 1:
                raise tubular.FocalPointError(
                    f"point {points[i].tolist()} is beyond the reach"
                )
            sp = surfaces.principal_curvatures(self.domain, feet[i])
            nu_x = tubular.transport_curvatures(sp, t)
            if abs(t) < 1e-12 * (1.0 + np.linalg.norm(points[i])):
                grad_d = -sp.inner_normal
            else:
                grad_d = (points[i] - feet[i]) / t
            r0 = float(self.profile.value(t))
            h1 = float(self.profile.d1(t))
            h2 = float(self.profile.d2(t))
            c1 = float(self.cap.d1(r0))
            c2 = float(self.cap.d2(r0))
            tangent_coeff = self.scale * c1 * h1
            normal_coeff = self.scale * (c1 * h2 + c2 * h1 * h1)
            h = normal_coeff * np.outer(grad_d, grad_d)
            for j in range(nu_x.size):
                d = sp.directions[j]
                h += tangent_coeff * nu_x[j] * np.outer(d, d)
            hessians[i] = h
            spectra[i] = np.sort(np.append(tangent_coeff * nu_x, normal_coeff))
        return hessians, spectra

    def _grad_delta(self, x: np.ndarray, res) -> np.ndarray:
        if res.multiplicity > 1:
            raise tubular.FocalPointError(
                f"point {x.tolist()} is beyond the reach (multiplicity "
                f"{res.multiplicity})"
            )
        if abs(res.distance) < 1e-12 * (1.0 + np.linalg.norm(x)):
            g = np.asarray(self.domain.grad(res.foot), dtype=float)
            return g / np.linalg.norm(g)
        return (x - res.foot) / res.distance


def build_barrier(
    domain: ImplicitDomain,
    m: int,
    eps: float,
    alpha: Optional[float] = None,
    safety: float = 0.99,
    ratios: tuple = (0.9, 0.6, 0.3),
    cap_degree: int = 3,
    boundary_check_samples: int = 256,
    convexity_tol: float = 1e-9,
    settings: Optional[ProjectionSettings] = None,
) -> BarrierFunction:
    """Assemble and precondition-check the defining function.

    Verifies m-convexity at boundary samples before building; rejects with
    the offending point and curvature sum otherwise. ``eps`` must not exceed
    the tubular radius of the boundary (callers pass a reach estimate).
    """
    samples = domain.boundary_samples(boundary_check_samples)
    for row in samples:
        sp = surfaces.principal_curvatures(domain, row)
        sigma = surfaces.m_convexity_defect(sp, m)
        if sigma < -convexity_tol:
            raise MConvexityError(row, sigma, m)
    a = default_alpha(m, eps) if alpha is None else float(alpha)
    profile = make_profile(a, m, eps)
    collar = choose_collar(profile, eps, safety=safety, ratios=tuple(ratios))
    cap = make_cap(collar, profile, degree=cap_degree)
    return BarrierFunction(domain, collar, profile, cap, settings)


@dataclass(frozen=True)
class BarrierCheck:
    name: str
    worst_value: float
    threshold: float
    passed: bool
    worst_point: Optional[np.ndarray] = None
    count: int = 0


@dataclass(frozen=True)
class BarrierReport:
    checks: tuple

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def named(self, name: str) -> BarrierCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def verify_barrier(
    bf: BarrierFunction,
    interior_points: np.ndarray,
    boundary_points: np.ndarray,
    psh_tol: float = 1e-8,
    boundary_tol: float = 1e-8,
    eigen_tol: float = 1e-6,
    level_tol: float = 1e-6,
    level_count: int = 10,
    fd_check_count: int = 0,
) -> BarrierReport:
    """Check the built function against its construction contract.

    (a) the sum of the m smallest Hessian eigenvalues is >= -psh_tol at every
    interior sample; (b) the function vanishes on boundary samples; (c) the
    gradient does not vanish on the regular level range (-1, 0]; (d) the
    analytic Hessian spectrum matches the transported-curvature list, and
    optionally a finite-difference Hessian; (e) levels in (-1, 0) sit at the
    predicted signed distance, located by bisection along inner normals.
    """
    interior_points = np.atleast_2d(np.asarray(interior_points, dtype=float))
    boundary_points = np.atleast_2d(np.asarray(boundary_points, dtype=float))
    checks = []
    hessians, spectra = bf.hessian_batch(interior_points)

    # (a) m-plurisubharmonicity margins over the interior grid
    worst = np.inf
    worst_pt = interior_points[0]
    for i, row in enumerate(interior_points):
        margin = mpsh.min_m_trace(hessians[i], bf.m)
        if margin < worst:
            worst, worst_pt = margin, row
    checks.append(
        BarrierCheck(
            name="psh-margin",
            worst_value=float(worst),
            threshold=-psh_tol,
            passed=bool(worst >= -psh_tol),
            worst_point=worst_pt,
            count=len(interior_points),
        )
    )

    # (b) zero on the boundary
    bvals = np.abs(bf.value_batch(boundary_points))
    bidx = int(np.argmax(bvals))
    checks.append(
        BarrierCheck(
            name="boundary-zero",
            worst_value=float(bvals[bidx]),
            threshold=boundary_tol,
            passed=bool(bvals[bidx] <= boundary_tol),
            worst_point=boundary_points[bidx],
            count=len(boundary_points),
        )
    )

    # (c) nonvanishing gradient on the regular range; |grad delta| = 1 makes
    # the gradient norm a function of the signed distance alone
    floor = 1e-6 * bf.scale
    all_pts = np.concatenate([interior_points, boundary_points])
    deltas_all = bf.delta_batch(all_pts)
    vals_all = bf.value_from_delta(deltas_all)
    regular_mask = (vals_all > -1.0) & (vals_all <= 0.0)
    r0_all = bf.profile.value(deltas_all)
    gnorms = bf.scale * bf.cap.d1(r0_all) * bf.profile.d1(deltas_all)
    worst_g = np.inf
    worst_gpt = None
    regular = int(np.sum(regular_mask))
    if regular:
        masked = np.where(regular_mask, gnorms, np.inf)
        gidx = int(np.argmin(masked))
        worst_g = float(masked[gidx])
        worst_gpt = all_pts[gidx]
    checks.append(
        BarrierCheck(
            name="gradient-floor",
            worst_value=float(worst_g),
            threshold=floor,
            passed=bool(worst_g > floor),
            worst_point=worst_gpt,
            count=regular,
        )
    )

    # (d) analytic spectrum equals the transported-curvature list; optional
    # finite-difference cross-check on inner-collar points, where the cap is
    # the identity and differencing is well conditioned
    worst_eig = 0.0
    worst_ept = None
    for i, row in enumerate(interior_points):
        actual = numkit.sym_eigen(hessians[i]).eigenvalues
        err = float(np.max(np.abs(spectra[i] - actual)))
        if err > worst_eig:
            worst_eig, worst_ept = err, row
    if fd_check_count > 0:
        deltas = bf.delta_batch(interior_points)
        inner = interior_points[deltas > -0.95 * bf.collar.eps1][:fd_check_count]
        if len(inner):
            fd = numkit.hessian_fd_richardson_batch(bf.value_batch, inner, 1e-3)
            _, pred = bf.hessian_batch(inner)
            for i, row in enumerate(inner):
                err = float(
                    np.max(np.abs(np.sort(np.linalg.eigvalsh(fd[i])) - pred[i]))
                )
                if err > worst_eig:
                    worst_eig, worst_ept = err, row
    checks.append(
        BarrierCheck(
            name="eigen-list",
            worst_value=float(worst_eig),
            threshold=eigen_tol,
            passed=bool(worst_eig <= eigen_tol),
            worst_point=worst_ept,
            count=len(interior_points),
        )
    )

    # (e) level sets of rho are level sets of the signed distance
    levels = [-(k + 1.0) / (level_count + 1.0) for k in range(level_count)]
    base = boundary_points[:: max(1, len(boundary_points) // 32)][:32]
    located, level_targets = _bisect_levels(bf, base, levels)
    worst_lvl = 0.0
    worst_lpt = None
    if len(located):
        dlt = bf.delta_batch(located)
        errs = np.abs(dlt - level_targets)
        lidx = int(np.argmax(errs))
        worst_lvl = float(errs[lidx])
        worst_lpt = located[lidx]
    checks.append(
        BarrierCheck(
            name="level-set",
            worst_value=float(worst_lvl),
            threshold=level_tol,
            passed=bool(worst_lvl <= level_tol),
            worst_point=worst_lpt,
            count=len(located),
        )
    )

    return BarrierReport(checks=tuple(checks))


def _bisect_levels(bf: BarrierFunction, base: np.ndarray, levels, iters: int = 48):
    """Locate every level on every inner-normal ray by batched bisection."""
    rays = []
    targets = []
    for t in levels:
        for p in base:
            g = np.asarray(bf.domain.grad(p), dtype=float)
            rays.append((p, -g / np.linalg.norm(g), t))
            targets.append(bf.level_delta(t))
    if not rays:
        return np.zeros((0, bf.domain.dim)), np.zeros(0)
    origins = np.array([r[0] for r in rays])
    inners = np.array([r[1] for r in rays])
    tvals = np.array([r[2] for r in rays])
    lo = np.zeros(len(rays))
    hi = np.full(len(rays), bf.collar.eps1)
    f_hi = bf.value_batch(origins + hi[:, None] * inners) - tvals
    valid = f_hi < 0.0  # rho decreases into the domain, level is bracketed
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        vals = bf.value_batch(origins + mid[:, None] * inners) - tvals
        above = vals > 0.0
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
    s = 0.5 * (lo + hi)
    located = origins + s[:, None] * inners
    return located[valid], np.array(targets)[valid]
