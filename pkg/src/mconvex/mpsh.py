"""Traces of Hessians over m-planes and m-plurisubharmonicity verdicts.

A C^2 function is m-plurisubharmonic when the trace of its Hessian over
every m-plane is nonnegative; the infimum of those traces equals the sum of
the m smallest Hessian eigenvalues, which is what the verdicts below
measure. Gridwise application gives counts, the worst margin, and the worst
point over a sample set.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import numkit

ORTHONORMAL_TOL = 1e-10


@dataclass(frozen=True)
class MPlane:
    """An m-plane through the origin given by an orthonormal basis (rows)."""

    basis: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=float)
        gram = b @ b.T
        err = float(np.max(np.abs(gram - np.eye(b.shape[0]))))
        if err > ORTHONORMAL_TOL:
            raise ValueError(f"basis is not orthonormal: deviation {err:.3e}")

    @property
    def m(self) -> int:
        return self.basis.shape[0]


def random_mplane(rng: np.random.Generator, n: int, m: int) -> MPlane:
    """Uniform random m-plane: orthonormalized Gaussian frame."""
    g = rng.standard_normal((n, m))
    q, r = np.linalg.qr(g)
    q = q * np.sign(np.where(np.diag(r) == 0.0, 1.0, np.diag(r)))
    return MPlane(q.T[:m])


def trace_on_plane(h: np.ndarray, plane: MPlane) -> float:
    """Trace of the restriction of the quadratic form ``h`` to the plane."""
    b = plane.basis
    return float(np.einsum("ik,kl,il->", b, np.asarray(h, dtype=float), b))


def min_m_trace(h: np.ndarray, m: int) -> float:
    """Sum of the m smallest eigenvalues: the infimum of traces over m-planes."""
    eig = numkit.sym_eigen(np.asarray(h, dtype=float))
    n = eig.eigenvalues.size
    if not 1 <= m <= n:
        raise ValueError(f"m must be in [1, {n}], got {m}")
    total = 0.0
    for j in range(m):
        total += float(eig.eigenvalues[j])
    return total


class ScalarField:
    """A C^2 field bundled with its derivatives, differencing when absent."""

    def __init__(self, fn: Callable, grad: Optional[Callable] = None,
                 hess: Optional[Callable] = None, name: str = "field"):
        self.fn = fn
        self._grad = grad
        self._hess = hess
        self.name = name

    def value(self, x) -> float:
        return float(self.fn(np.asarray(x, dtype=float)))

    def gradient(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self._grad is not None:
            return np.asarray(self._grad(x), dtype=float)
        return numkit.gradient_fd(self.fn, x)

    def hessian(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self._hess is not None:
            return np.asarray(self._hess(x), dtype=float)
        return numkit.hessian_fd(self.fn, x)


@dataclass(frozen=True)
class PshVerdict:
    """Pointwise verdict with its margin (sum of m smallest eigenvalues)."""

    point: np.ndarray
    margin: float
    verdict: str  # "strictly-psh" | "psh" | "violated"
    worst_plane: Optional[MPlane] = None


def default_margin_tol(h: np.ndarray) -> float:
    return 1e-8 * (1.0 + float(np.linalg.norm(h)))


def is_m_psh_at(
    field,
    x: np.ndarray,
    m: int,
    tol: Optional[float] = None,
) -> PshVerdict:
    """Classify a point by the sum of the m smallest Hessian eigenvalues.

    ``field`` must expose ``hessian(x)``; callables are treated as scalar
    fields and differenced. The margin decides the verdict against the
    scale-aware tolerance band.
    """
    x = np.asarray(x, dtype=float)
    h = _hessian_of(field, x)
    use_tol = default_margin_tol(h) if tol is None else float(tol)
    eig = numkit.sym_eigen(h)
    margin = 0.0
    for j in range(m):
        margin += float(eig.eigenvalues[j])
    if margin < -use_tol:
        verdict = "violated"
    elif margin > use_tol:
        verdict = "strictly-psh"
    else:
        verdict = "psh"
    worst = MPlane(eig.eigenvectors[:, :m].T.copy())
    return PshVerdict(point=x, margin=margin, verdict=verdict, worst_plane=worst)


def _hessian_of(field, x: np.ndarray) -> np.ndarray:
    if hasattr(field, "hessian"):
        return np.asarray(field.hessian(x), dtype=float)
    return numkit.hessian_fd(field, x)


@dataclass(frozen=True)
class GridVerdict:
    """Census of pointwise verdicts over a sample grid."""

    m: int
    tol: float
    total: int
    strict_count: int
    psh_count: int
    violated_count: int
    worst_margin: float
    worst_point: np.ndarray

    @property
    def passed(self) -> bool:
        return self.violated_count == 0


def grid_verdict(
    field,
    points: np.ndarray,
    m: int,
    tol: float = 1e-8,
    hessians: Optional[np.ndarray] = None,
) -> GridVerdict:
    """Run the pointwise verdict over a grid of sample points.

    ``hessians`` may be precomputed (same leading shape as ``points``);
    otherwise the field is queried per point. Any evaluation failure aborts
    with the offending sample in the exception message.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    strict = psh = violated = 0
    worst_margin = np.inf
    worst_point = points[0]
    for i, row in enumerate(points):
        try:
            h = hessians[i] if hessians is not None else _hessian_of(field, row)
            eig = numkit.sym_eigen(np.asarray(h, dtype=float))
        except Exception as exc:
            raise RuntimeError(f"verdict failed at sample {row.tolist()}: {exc}") from exc
        margin = 0.0
        for j in range(m):
            margin += float(eig.eigenvalues[j])
        if margin < -tol:
            violated += 1
        elif margin > tol:
            strict += 1
        else:
            psh += 1
        if margin < worst_margin:
            worst_margin = margin
            worst_point = row
    return GridVerdict(
        m=m,
        tol=tol,
        total=len(points),
        strict_count=strict,
        psh_count=psh,
        violated_count=violated,
        worst_margin=float(worst_margin),
        worst_point=worst_point,
    )
