"""Conformal harmonic test maps and subharmonicity of composed fields.

A conformal harmonic map from a plane domain into R^n parametrizes a
branched minimal surface; composing a C^2 ambient function with it and
taking the parameter Laplacian measures the trace of the ambient Hessian
over the tangent plane, scaled by the conformal factor. The catalog holds
affine discs, closed-form minimal charts, and maps generated from
holomorphic Gauss-map data by numerical integration.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np


class NonHarmonicMapError(ValueError):
    """A composition was requested for a map that is not harmonic."""


JET_STEP = 1e-5


class ConformalMap:
    """A plane-to-R^n map with first and second parameter jets.

    ``f(z)`` maps complex parameters to points, vectorized over arrays.
    Missing jets fall back to centered differences (first jets from values,
    second jets from first jets). ``branch_points`` are parameter values
    where the rank drops; residual checks skip a small neighborhood of them.
    """

    def __init__(
        self,
        name: str,
        f: Callable,
        jet1: Optional[Callable] = None,
        jet2: Optional[Callable] = None,
        center: complex = 0.0,
        radius: float = 1.0,
        branch_points: Sequence[complex] = (),
        branch_clearance: float = 1e-3,
    ):
        self.name = name
        self.f = f
        self._jet1 = jet1
        self._jet2 = jet2
        self.center = complex(center)
        self.radius = float(radius)
        self.branch_points = tuple(complex(b) for b in branch_points)
        self.branch_clearance = float(branch_clearance)

    def __call__(self, z):
        return self.f(z)

    def jet1(self, z: complex):
        """(f_x, f_y) at z."""
        if self._jet1 is not None:
            return self._jet1(z)
        h = JET_STEP * (1.0 + abs(z))
        fx = (self.f(z + h) - self.f(z - h)) / (2.0 * h)
        fy = (self.f(z + 1j * h) - self.f(z - 1j * h)) / (2.0 * h)
        return np.asarray(fx, dtype=float), np.asarray(fy, dtype=float)

    def jet2(self, z: complex):
        """(f_xx, f_xy, f_yy) at z, differencing the first jets if needed."""
        if self._jet2 is not None:
            return self._jet2(z)
        h = JET_STEP * (1.0 + abs(z))
        fx_p, fy_p = self.jet1(z + h)
        fx_m, fy_m = self.jet1(z - h)
        fx_u, fy_u = self.jet1(z + 1j * h)
        fx_d, fy_d = self.jet1(z - 1j * h)
        fxx = (np.asarray(fx_p) - np.asarray(fx_m)) / (2.0 * h)
        fxy = (np.asarray(fx_u) - np.asarray(fx_d)) / (2.0 * h)
        fyy = (np.asarray(fy_u) - np.asarray(fy_d)) / (2.0 * h)
        return fxx, fxy, fyy

    def near_branch(self, z: complex) -> bool:
        return any(abs(z - b) < self.branch_clearance for b in self.branch_points)

    def grid(self, rings: int = 8, spokes: int = 16, fill: float = 0.95) -> np.ndarray:
        """Deterministic polar lattice of parameter samples inside the disc."""
        rr = self.radius * fill * (np.arange(1, rings + 1) / rings)
        th = 2.0 * np.pi * np.arange(spokes) / spokes
        zz = (rr[:, None] * np.exp(1j * th)[None, :]).ravel() + self.center
        pts = np.concatenate([[self.center], zz])
        return np.array([z for z in pts if not self.near_branch(z)])


def affine_disc(p, u, w, radius: float = 1.0, name: str = "affine") -> ConformalMap:
    """The map z -> p + Re(z) u + Im(z) w; conformal when u, w are an
    orthogonal pair of equal length."""
    p = np.asarray(p, dtype=float)
    u = np.asarray(u, dtype=float)
    w = np.asarray(w, dtype=float)

    def f(z):
        z = np.asarray(z, dtype=complex)
        return p + np.multiply.outer(z.real, u) + np.multiply.outer(z.imag, w)

    def jet1(z):
        return u.copy(), w.copy()

    def jet2(z):
        zero = np.zeros_like(u)
        return zero, zero.copy(), zero.copy()

    return ConformalMap(name, f, jet1, jet2, radius=radius)


def catenoid_map(scale: float = 1.0, shift=(0.0, 0.0, 0.0), radius: float = 1.0) -> ConformalMap:
    """Closed-form conformal catenoid chart around the neck."""
    s = float(scale)
    shift = np.asarray(shift, dtype=float)

    def f(z):
        z = np.asarray(z, dtype=complex)
        u, v = z.real, z.imag
        return shift + s * np.stack(
            [np.cosh(u) * np.cos(v), np.cosh(u) * np.sin(v), u], axis=-1
        )

    def jet1(z):
        u, v = z.real, z.imag
        fx = s * np.array([np.sinh(u) * np.cos(v), np.sinh(u) * np.sin(v), 1.0])
        fy = s * np.array([-np.cosh(u) * np.sin(v), np.cosh(u) * np.cos(v), 0.0])
        return fx, fy

    def jet2(z):
        u, v = z.real, z.imag
        fxx = s * np.array([np.cosh(u) * np.cos(v), np.cosh(u) * np.sin(v), 0.0])
        fxy = s * np.array([-np.sinh(u) * np.sin(v), np.sinh(u) * np.cos(v), 0.0])
        fyy = -fxx
        return fxx, fxy, fyy

    return ConformalMap("catenoid-chart", f, jet1, jet2, radius=radius)


def helicoid_map(scale: float = 1.0, shift=(0.0, 0.0, 0.0), radius: float = 1.0) -> ConformalMap:
    """Closed-form conformal helicoid chart (sinh x sin y, -sinh x cos y, -y)."""
    s = float(scale)
    shift = np.asarray(shift, dtype=float)

    def f(z):
        z = np.asarray(z, dtype=complex)
        u, v = z.real, z.imag
        return shift + s * np.stack(
            [np.sinh(u) * np.sin(v), -np.sinh(u) * np.cos(v), -v], axis=-1
        )

    def jet1(z):
        u, v = z.real, z.imag
        fx = s * np.array([np.cosh(u) * np.sin(v), -np.cosh(u) * np.cos(v), 0.0])
        fy = s * np.array([np.sinh(u) * np.cos(v), np.sinh(u) * np.sin(v), -1.0])
        return fx, fy

    def jet2(z):
        u, v = z.real, z.imag
        fxx = s * np.array([np.sinh(u) * np.sin(v), -np.sinh(u) * np.cos(v), 0.0])
        fxy = s * np.array([np.cosh(u) * np.cos(v), np.cosh(u) * np.sin(v), 0.0])
        fyy = -fxx
        return fxx, fxy, fyy

    return ConformalMap("helicoid-chart", f, jet1, jet2, radius=radius)


def enneper_map(scale: float = 1.0, shift=(0.0, 0.0, 0.0), radius: float = 0.8) -> ConformalMap:
    """Closed-form Enneper chart (u - u^3/3 + u v^2, -v + v^3/3 - v u^2, u^2 - v^2)."""
    s = float(scale)
    shift = np.asarray(shift, dtype=float)

    def f(z):
        z = np.asarray(z, dtype=complex)
        u, v = z.real, z.imag
        return shift + s * np.stack(
            [
                u - u**3 / 3.0 + u * v**2,
                -v + v**3 / 3.0 - v * u**2,
                u**2 - v**2,
            ],
            axis=-1,
        )

    def jet1(z):
        u, v = z.real, z.imag
        fx = s * np.array([1.0 - u * u + v * v, -2.0 * u * v, 2.0 * u])
        fy = s * np.array([2.0 * u * v, -1.0 + v * v - u * u, -2.0 * v])
        return fx, fy

    def jet2(z):
        u, v = z.real, z.imag
        fxx = s * np.array([-2.0 * u, -2.0 * v, 2.0])
        fxy = s * np.array([2.0 * v, -2.0 * u, 0.0])
        fyy = s * np.array([2.0 * u, 2.0 * v, -2.0])
        return fxx, fxy, fyy

    return ConformalMap("enneper-chart", f, jet1, jet2, radius=radius)


@dataclass
class WeierstrassEntry:
    """Holomorphic generating data: Gauss map g and height differential dh.

    ``dh`` is the density against dz. The induced map integrates
    ``Re (1/2 (1/g - g), i/2 (1/g + g), 1) dh`` from the base point along
    straight segments; first jets come from the integrand, second jets from
    differencing it.
    """

    name: str
    g: Callable
    dh: Callable
    base_point: complex
    base_value: np.ndarray = field(default_factory=lambda: np.zeros(3))
    nodes_per_unit: int = 64
    branch_points: Sequence[complex] = ()

    def phi(self, z):
        z = np.asarray(z, dtype=complex)
        gz = self.g(z)
        dhz = self.dh(z)
        return np.stack(
            [
                0.5 * (1.0 / gz - gz) * dhz,
                0.5j * (1.0 / gz + gz) * dhz,
                dhz,
            ],
            axis=-1,
        )


def weierstrass_map(
    entry: WeierstrassEntry,
    scale: float = 1.0,
    shift=(0.0, 0.0, 0.0),
    center: complex = 0.0,
    radius: float = 0.5,
) -> ConformalMap:
    """Numerically integrated conformal harmonic map from generating data.

    Gauss-Legendre panels along the segment from the base point, at least
    ``nodes_per_unit`` nodes per unit of path length.
    """
    shift = np.asarray(shift, dtype=float)
    s = float(scale)

    def integrate(z: complex) -> np.ndarray:
        z0 = entry.base_point
        length = abs(z - z0)
        if length == 0.0:
            return entry.base_value.copy()
        n = max(16, int(np.ceil(entry.nodes_per_unit * length)))
        nodes, weights = np.polynomial.legendre.leggauss(min(n, 200))
        t = 0.5 * (nodes + 1.0)
        zt = z0 + t * (z - z0)
        vals = entry.phi(zt)  # (N, 3) complex
        integral = 0.5 * (z - z0) * np.einsum("k,kj->j", weights, vals)
        return entry.base_value + integral.real

    def f(z):
        z = np.asarray(z, dtype=complex)
        if z.ndim == 0:
            return shift + s * integrate(complex(z))
        flat = z.ravel()
        out = np.stack([integrate(complex(w)) for w in flat])
        return shift + s * out.reshape(z.shape + (3,))

    def jet1(z):
        phi = entry.phi(np.asarray(z, dtype=complex))
        return s * phi.real, -s * phi.imag

    def jet2(z):
        h = JET_STEP * (1.0 + abs(z))
        phi_xp = entry.phi(np.asarray(z + h, dtype=complex))
        phi_xm = entry.phi(np.asarray(z - h, dtype=complex))
        phi_yp = entry.phi(np.asarray(z + 1j * h, dtype=complex))
        phi_ym = entry.phi(np.asarray(z - 1j * h, dtype=complex))
        fxx = s * (phi_xp - phi_xm).real / (2.0 * h)
        fxy = s * (phi_yp - phi_ym).real / (2.0 * h)
        fyy = s * -(phi_yp - phi_ym).imag / (2.0 * h)
        return fxx, fxy, fyy

    return ConformalMap(
        f"weierstrass-{entry.name}",
        f,
        jet1,
        jet2,
        center=center,
        radius=radius,
        branch_points=entry.branch_points,
    )


def weierstrass_catenoid() -> WeierstrassEntry:
    """g(z) = z, dh = dz/z on an annulus around |z| = 1."""
    return WeierstrassEntry(
        name="catenoid",
        g=lambda z: z,
        dh=lambda z: 1.0 / z,
        base_point=1.0 + 0.0j,
        base_value=np.array([-1.0, 0.0, 0.0]),
    )


def weierstrass_helicoid() -> WeierstrassEntry:
    """g(z) = exp(z), dh = i dz."""
    return WeierstrassEntry(
        name="helicoid",
        g=np.exp,
        dh=lambda z: 1j * np.ones_like(np.asarray(z, dtype=complex)),
        base_point=0.0 + 0.0j,
        base_value=np.zeros(3),
    )


def weierstrass_enneper() -> WeierstrassEntry:
    """g(z) = z, dh = z dz; branch point at the origin has rank zero."""
    return WeierstrassEntry(
        name="enneper",
        g=lambda z: z,
        dh=lambda z: z,
        base_point=0.0 + 0.0j,
        base_value=np.zeros(3),
        branch_points=(0.0 + 0.0j,),
    )


def conformality_residual(cm: ConformalMap, z: complex):
    """The pair (f_x . f_y, |f_x|^2 - |f_y|^2); both vanish for conformal maps."""
    fx, fy = cm.jet1(z)
    fx = np.asarray(fx, dtype=float)
    fy = np.asarray(fy, dtype=float)
    return float(fx @ fy), float(fx @ fx - fy @ fy)


def harmonicity_residual(cm: ConformalMap, z: complex) -> np.ndarray:
    """The parameter Laplacian f_xx + f_yy, componentwise."""
    fxx, _, fyy = cm.jet2(z)
    return np.asarray(fxx, dtype=float) + np.asarray(fyy, dtype=float)


def composition_laplacian(
    field,
    cm: ConformalMap,
    z: complex,
    harmonic_tol: float = 1e-6,
) -> float:
    """Laplacian of (field o map) at z for a harmonic map.

    Equals ``Hess[f_x, f_x] + Hess[f_y, f_y]``: the gradient term drops by
    harmonicity, which is checked against ``harmonic_tol``. At immersion
    points this is ``|f_x|^2`` times the Hessian trace over the tangent
    plane of the parametrized surface.
    """
    fx, fy = cm.jet1(z)
    fx = np.asarray(fx, dtype=float)
    fy = np.asarray(fy, dtype=float)
    resid = harmonicity_residual(cm, z)
    scale = max(1.0, float(fx @ fx + fy @ fy))
    if float(np.linalg.norm(resid)) > harmonic_tol * scale:
        raise NonHarmonicMapError(
            f"map {cm.name!r} has Laplacian {resid.tolist()} at {z}"
        )
    x = np.asarray(cm.f(z), dtype=float)
    h = np.asarray(field.hessian(x), dtype=float)
    return float(fx @ h @ fx + fy @ h @ fy)


@dataclass(frozen=True)
class SweepReport:
    """Subharmonicity census of a composed field over a parameter grid."""

    map_name: str
    total: int
    min_laplacian: float
    argmin: complex
    violations: int
    rho_min: float
    rho_max: float

    @property
    def passed(self) -> bool:
        return self.violations == 0


def subharmonicity_sweep(
    field,
    cm: ConformalMap,
    grid: Optional[np.ndarray] = None,
    tol: float = 1e-8,
    inside=None,
) -> SweepReport:
    """Minimum composed Laplacian over the grid, with the range of the
    composed field values (constancy evidence for the range collapse).

    ``inside`` optionally validates that the image stays in the field's
    region; a sample outside aborts the sweep.
    """
    zz = cm.grid() if grid is None else np.asarray(grid)
    best = np.inf
    argmin = complex(zz[0]) if len(zz) else 0.0
    violations = 0
    rho_min, rho_max = np.inf, -np.inf
    for z in zz:
        z = complex(z)
        if inside is not None and not inside(np.asarray(cm.f(z), dtype=float)):
            raise ValueError(
                f"map {cm.name!r} leaves the field's region at parameter {z}"
            )
        lap = composition_laplacian(field, cm, z)
        val = float(field.value(np.asarray(cm.f(z), dtype=float)))
        rho_min = min(rho_min, val)
        rho_max = max(rho_max, val)
        if lap < best:
            best, argmin = lap, z
        if lap < -tol:
            violations += 1
    return SweepReport(
        map_name=cm.name,
        total=len(zz),
        min_laplacian=float(best),
        argmin=argmin,
        violations=violations,
        rho_min=float(rho_min),
        rho_max=float(rho_max),
    )
