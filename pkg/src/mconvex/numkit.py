"""Dense linear algebra and finite differences for small ambient dimensions.

All geometry in this package lives in R^n with 2 <= n <= 8, so the kernels
here are written for small dense symmetric matrices: a cyclic Jacobi
eigensolver with deterministic output, and centered finite differences used
to cross-check analytic gradients and Hessians.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

MAX_DIM = 8

# Relative asymmetry tolerated before a matrix is rejected as non-symmetric.
SYMMETRY_RTOL = 1e-12

# Base scale for the default centered-difference step 1e-4 * (1 + |x|).
DEFAULT_FD_SCALE = 1e-4


class AsymmetricMatrixError(ValueError):
    """Input matrix is not symmetric within tolerance."""

    def __init__(self, asymmetry: float, tolerance: float):
        self.asymmetry = asymmetry
        self.tolerance = tolerance
        super().__init__(
            f"matrix asymmetry {asymmetry:.3e} exceeds tolerance {tolerance:.3e}"
        )


class FieldEvaluationError(RuntimeError):
    """A scalar field could not be evaluated at a stencil point."""

    def __init__(self, point: np.ndarray, cause: BaseException):
        self.point = np.asarray(point, dtype=float)
        self.cause = cause
        super().__init__(f"field evaluation failed at {self.point.tolist()}: {cause}")


@dataclass(frozen=True)
class EigenDecomposition:
    """Sorted spectrum of a small symmetric matrix.

    ``eigenvalues`` is ascending; column j of ``eigenvectors`` is the unit
    eigenvector for ``eigenvalues[j]``, signed so that its first component
    larger than 1e-12 in magnitude is positive.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.T


def _canonical_sign(vectors: np.ndarray) -> np.ndarray:
    out = vectors.copy()
    n = out.shape[0]
    for j in range(out.shape[1]):
        col = out[:, j]
        for i in range(n):
            if abs(col[i]) > 1e-12:
                if col[i] < 0.0:
                    out[:, j] = -col
                break
    return out


def sym_eigen(a: np.ndarray, sweeps: int = 50) -> EigenDecomposition:
    """Eigen-decompose a symmetric matrix by cyclic Jacobi rotations.

    Deterministic for a fixed input: the rotation order is the fixed cyclic
    upper-triangle sweep, eigenvalues are sorted ascending with a stable
    sort, and eigenvector signs are canonicalized.

    Raises :class:`AsymmetricMatrixError` when the asymmetry exceeds
    ``SYMMETRY_RTOL * (1 + |a|)``, reporting the measured magnitude.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    if n > MAX_DIM:
        raise ValueError(f"dimension {n} exceeds supported maximum {MAX_DIM}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")

    norm = float(np.linalg.norm(a))
    asym = float(np.linalg.norm(a - a.T))
    tol = SYMMETRY_RTOL * (1.0 + norm)
    if asym > tol:
        raise AsymmetricMatrixError(asym, tol)

    w = 0.5 * (a + a.T)
    v = np.eye(n)
    stop = 1e-15 * (1.0 + norm)
    off_entries = ~np.eye(n, dtype=bool)
    for _ in range(sweeps):
        off = math.sqrt(float(np.sum(w[off_entries] ** 2)))
        if off <= stop:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = w[p, q]
                if abs(apq) <= 1e-18 * (1.0 + norm):
                    continue
                tau = (w[q, q] - w[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, tau) / (abs(tau) + math.hypot(1.0, tau))
                c = 1.0 / math.hypot(1.0, t)
                s = t * c
                rot_p = c * w[:, p] - s * w[:, q]
                rot_q = s * w[:, p] + c * w[:, q]
                w[:, p], w[:, q] = rot_p, rot_q
                rot_p = c * w[p, :] - s * w[q, :]
                rot_q = s * w[p, :] + c * w[q, :]
                w[p, :], w[q, :] = rot_p, rot_q
                w[p, q] = 0.0
                w[q, p] = 0.0
                rot_p = c * v[:, p] - s * v[:, q]
                rot_q = s * v[:, p] + c * v[:, q]
                v[:, p], v[:, q] = rot_p, rot_q

    lam = np.diag(w).copy()
    order = np.argsort(lam, kind="stable")
    lam = lam[order]
    v = _canonical_sign(v[:, order])
    return EigenDecomposition(eigenvalues=lam, eigenvectors=v)


def default_step(x: np.ndarray) -> float:
    """Centered-difference step balancing truncation against cancellation."""
    return DEFAULT_FD_SCALE * (1.0 + float(np.linalg.norm(x)))


def _eval(f, point: np.ndarray) -> float:
    try:
        return float(f(point))
    except Exception as exc:  # propagate with the offending stencil point
        raise FieldEvaluationError(point, exc) from exc


def gradient_fd(f, x: np.ndarray, step: float | None = None) -> np.ndarray:
    """Centered-difference gradient of a scalar field, O(step^2) accurate."""
    x = np.asarray(x, dtype=float)
    h = default_step(x) if step is None else float(step)
    if h <= 0.0:
        raise ValueError("step must be positive")
    grad = np.zeros_like(x)
    for i in range(x.size):
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        grad[i] = (_eval(f, xp) - _eval(f, xm)) / (2.0 * h)
    return grad


def hessian_fd(f, x: np.ndarray, step: float | None = None) -> np.ndarray:
    """Centered second-difference Hessian, symmetrized exactly.

    Uses the standard 4-point cross stencil for mixed entries; the returned
    matrix satisfies ``H == H.T`` bit for bit.
    """
    x = np.asarray(x, dtype=float)
    h = default_step(x) if step is None else float(step)
    if h <= 0.0:
        raise ValueError("step must be positive")
    n = x.size
    hess = np.zeros((n, n))
    f0 = _eval(f, x)
    for i in range(n):
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        hess[i, i] = (_eval(f, xp) - 2.0 * f0 + _eval(f, xm)) / (h * h)
    for i in range(n):
        for j in range(i + 1, n):
            xpp = x.copy()
            xpm = x.copy()
            xmp = x.copy()
            xmm = x.copy()
            xpp[i] += h
            xpp[j] += h
            xpm[i] += h
            xpm[j] -= h
            xmp[i] -= h
            xmp[j] += h
            xmm[i] -= h
            xmm[j] -= h
            val = (_eval(f, xpp) - _eval(f, xpm) - _eval(f, xmp) + _eval(f, xmm)) / (
                4.0 * h * h
            )
            hess[i, j] = val
            hess[j, i] = val
    return 0.5 * (hess + hess.T)


def hessian_stencil(n: int, step: float):
    """Offsets of the centered second-difference stencil, plus index helpers.

    Returns ``(offsets, diag_index, cross_index)`` where offsets has shape
    (1 + 2n + 2n(n-1), n): the center, the 2n axis points, then the four
    corners for every i < j pair in order (+-, +-).
    """
    rows = [np.zeros(n)]
    for i in range(n):
        e = np.zeros(n)
        e[i] = step
        rows.append(e)
        rows.append(-e)
    pairs = []
    for i in range(n):
        for j in range(i + 1, n):
            base = np.zeros(n)
            for si in (1.0, -1.0):
                for sj in (1.0, -1.0):
                    off = base.copy()
                    off[i] = si * step
                    off[j] = sj * step
                    rows.append(off)
            pairs.append((i, j))
    return np.array(rows), pairs


def hessian_fd_batch(values_fn, points: np.ndarray, step: float) -> np.ndarray:
    """Centered-difference Hessians for a batch of points at once.

    ``values_fn`` evaluates the scalar field on an (N, n) array; all stencil
    evaluations are gathered into a single call, which is what makes
    finite-difference validation affordable when each field value costs a
    projection solve.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    nb, n = points.shape
    offsets, pairs = hessian_stencil(n, step)
    ns = offsets.shape[0]
    grid = (points[:, None, :] + offsets[None, :, :]).reshape(nb * ns, n)
    vals = np.asarray(values_fn(grid), dtype=float).reshape(nb, ns)
    hess = np.zeros((nb, n, n))
    f0 = vals[:, 0]
    for i in range(n):
        fp = vals[:, 1 + 2 * i]
        fm = vals[:, 2 + 2 * i]
        hess[:, i, i] = (fp - 2.0 * f0 + fm) / (step * step)
    base = 1 + 2 * n
    for k, (i, j) in enumerate(pairs):
        fpp = vals[:, base + 4 * k]
        fpm = vals[:, base + 4 * k + 1]
        fmp = vals[:, base + 4 * k + 2]
        fmm = vals[:, base + 4 * k + 3]
        val = (fpp - fpm - fmp + fmm) / (4.0 * step * step)
        hess[:, i, j] = val
        hess[:, j, i] = val
    return hess


def hessian_fd_richardson_batch(values_fn, points: np.ndarray, step: float) -> np.ndarray:
    coarse = hessian_fd_batch(values_fn, points, step)
    fine = hessian_fd_batch(values_fn, points, 0.5 * step)
    return (4.0 * fine - coarse) / 3.0


def hessian_fd_richardson(f, x: np.ndarray, step: float | None = None) -> np.ndarray:
    """Richardson-extrapolated centered Hessian, O(step^4) accurate.

    Combines the centered stencil at ``step`` and ``step/2``; use a step a
    decade or two larger than for :func:`hessian_fd` so the h^2 terms cancel
    without amplifying evaluation noise.
    """
    x = np.asarray(x, dtype=float)
    h = 10.0 * default_step(x) if step is None else float(step)
    coarse = hessian_fd(f, x, h)
    fine = hessian_fd(f, x, 0.5 * h)
    return (4.0 * fine - coarse) / 3.0


def orthonormal_complement(unit: np.ndarray) -> np.ndarray:
    """Rows form an orthonormal basis of the hyperplane orthogonal to ``unit``.

    Deterministic: Gram-Schmidt over the standard basis, skipping the axis
    most parallel to ``unit``.
    """
    unit = np.asarray(unit, dtype=float)
    n = unit.size
    basis = [unit / np.linalg.norm(unit)]
    axes = np.argsort(np.abs(unit), kind="stable")  # least-aligned axes first
    for idx in axes:
        e = np.zeros(n)
        e[idx] = 1.0
        for b in basis:
            e = e - np.dot(e, b) * b
        norm = np.linalg.norm(e)
        if norm > 1e-10:
            basis.append(e / norm)
        if len(basis) == n:
            break
    return np.array(basis[1:])
