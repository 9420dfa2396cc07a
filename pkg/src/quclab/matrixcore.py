"""Pointwise matrix kernel for curl reabsorption.

For X = P S with P symmetric positive definite and S symmetric, the skew
part of X is controlled by

    |X - X^t|_F^2  <=  2 * phi(lmin/lmax) * |X|_F^2,
    phi(t) = (1 - t)^2 / (1 + t^2),

where lmin, lmax are the extreme eigenvalues of P.  This module provides
the scalar ingredients (phi, skew defect, eigenvalue summaries via a Jacobi
solver), a per-pair verifier, the K-dependent reabsorption factors, and a
vectorized mass-trial driver used by the randomized certification run.

All matrix norms are Frobenius norms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError, PreconditionError

# Relative floor under which the smallest eigenvalue is treated as zero and
# the eigenvalue ratio is reported as unbounded instead of raising.
SPD_RTOL = 1e-12

# Absolute symmetry tolerance for inputs declared symmetric.
SYMMETRY_ATOL = 1e-14


def frobenius(a: np.ndarray) -> float:
    """Frobenius norm of a matrix (or batch, reduced over the last two axes)."""
    a = np.asarray(a, dtype=float)
    return np.sqrt(np.sum(a * a, axis=(-2, -1)))


def check_square(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InputError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InputError("matrix has non-finite entries")
    return a


def check_symmetric(a: np.ndarray, atol: float = SYMMETRY_ATOL) -> np.ndarray:
    a = check_square(a)
    defect = np.max(np.abs(a - a.T)) if a.size else 0.0
    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
    if defect > atol * scale:
        raise InputError(f"matrix is not symmetric (defect {defect:.3e})")
    return 0.5 * (a + a.T)


def jacobi_eigenvalues(a: np.ndarray, tol: float = 1e-14, max_sweeps: int = 64) -> np.ndarray:
    """All eigenvalues of a symmetric matrix by cyclic Jacobi rotations.

    Unconditionally convergent for symmetric input; intended for the small
    dimensions (N <= 16) this package works with.  Returns eigenvalues in
    ascending order.
    """
    a = check_symmetric(a).copy()
    n = a.shape[0]
    if n == 1:
        return a[0].copy()
    scale = frobenius(a)
    if scale == 0.0:
        return np.zeros(n)
    for _ in range(max_sweeps):
        off = np.sqrt(max(np.sum(a * a) - np.sum(np.diag(a) ** 2), 0.0))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.hypot(theta, 1.0))
                if theta == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                rot_p = c * a[:, p] - s * a[:, q]
                rot_q = s * a[:, p] + c * a[:, q]
                a[:, p], a[:, q] = rot_p, rot_q
                rot_p = c * a[p, :] - s * a[q, :]
                rot_q = s * a[p, :] + c * a[q, :]
                a[p, :], a[q, :] = rot_p, rot_q
                a[p, q] = a[q, p] = 0.0
    return np.sort(np.diag(a))


@dataclass(frozen=True)
class EigenSummary:
    """Extreme eigenvalues of a symmetric matrix and their ratio.

    ``ratio`` is lambda_max/lambda_min when the matrix is positive definite
    (lambda_min > SPD_RTOL * lambda_max) and ``inf`` otherwise; degeneracy is
    flagged through ``definite`` rather than raised.
    """

    lambda_min: float
    lambda_max: float
    ratio: float
    definite: bool


def eigen_summary(p: np.ndarray) -> EigenSummary:
    """Extreme eigenvalues of a symmetric matrix via the Jacobi solver."""
    eig = jacobi_eigenvalues(p)
    lmin, lmax = float(eig[0]), float(eig[-1])
    definite = lmin > SPD_RTOL * max(lmax, 0.0) and lmin > 0.0
    ratio = lmax / lmin if definite else float("inf")
    return EigenSummary(lambda_min=lmin, lambda_max=lmax, ratio=ratio, definite=definite)


def phi(t):
    """phi(t) = (1-t)^2/(1+t^2) on [0, 1]; nonincreasing, phi(0)=1, phi(1)=0."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0.0) or np.any(t > 1.0):
        raise InputError("phi is only defined on [0, 1]")
    out = (1.0 - t) ** 2 / (1.0 + t * t)
    return float(out) if out.ndim == 0 else out


def skew_defect(x: np.ndarray) -> float:
    """Frobenius norm of X - X^t; zero exactly when X is symmetric."""
    x = check_square(x)
    return float(frobenius(x - x.T))


@dataclass(frozen=True)
class SkewBoundReport:
    lhs: float
    rhs: float
    holds: bool
    eigen: EigenSummary


def verify_skew_bound(p: np.ndarray, s: np.ndarray, rel_slack: float = 1e-10) -> SkewBoundReport:
    """Check the skew-defect bound for X = P S with P SPD, S symmetric.

    lhs = |X - X^t|_F^2, rhs = 2 phi(lmin/lmax) |X|_F^2.
    """
    p = check_symmetric(p)
    s = check_symmetric(s)
    summary = eigen_summary(p)
    if not summary.definite:
        raise PreconditionError(
            f"P is not positive definite (lambda_min = {summary.lambda_min:.3e})"
        )
    x = p @ s
    lhs = skew_defect(x) ** 2
    rhs = 2.0 * phi(summary.lambda_min / summary.lambda_max) * frobenius(x) ** 2
    return SkewBoundReport(lhs=lhs, rhs=rhs, holds=bool(lhs <= rhs * (1.0 + rel_slack)), eigen=summary)


@dataclass(frozen=True)
class CurlBoundFactors:
    """Reabsorption factors for an eigenvalue-ratio bound K.

    ``tight``   = 2 (K-1)^2 / (K^2+1)   (sharp form),
    ``relaxed`` = 2 (1-1/K)^2           (the form used for L^m reabsorption).
    Both vanish at K = 1 and increase to 2 as K grows.
    """

    tight: float
    relaxed: float


def curl_bound_factor(k: float) -> CurlBoundFactors:
    k = float(k)
    if not np.isfinite(k) or k < 1.0:
        raise InputError(f"K must be a finite number >= 1, got {k}")
    tight = 2.0 * (k - 1.0) ** 2 / (k * k + 1.0)
    relaxed = 2.0 * (1.0 - 1.0 / k) ** 2
    return CurlBoundFactors(tight=tight, relaxed=relaxed)


def random_spd_batch(rng: np.random.Generator, count: int, dim: int,
                     log_spread: float = 2.0) -> np.ndarray:
    """Batch of random SPD matrices Q diag(lam) Q^t with log-uniform spectra."""
    gauss = rng.standard_normal((count, dim, dim))
    q, _ = np.linalg.qr(gauss)
    lam = np.exp(rng.uniform(-log_spread, log_spread, size=(count, dim)))
    return np.einsum("bij,bj,bkj->bik", q, lam, q)


def random_symmetric_batch(rng: np.random.Generator, count: int, dim: int) -> np.ndarray:
    gauss = rng.standard_normal((count, dim, dim))
    return 0.5 * (gauss + np.transpose(gauss, (0, 2, 1)))


@dataclass(frozen=True)
class MassTrialReport:
    dim: int
    trials: int
    worst_slack: float      # max over trials of lhs/rhs - 1 (negative when strict)
    violations: int         # trials with lhs > rhs * (1 + rel_slack)
    rel_slack: float

    @property
    def holds(self) -> bool:
        return self.violations == 0


def batch_skew_check(rng: np.random.Generator, trials: int, dim: int,
                     rel_slack: float = 1e-10, chunk: int = 20000) -> MassTrialReport:
    """Vectorized mass trial of the skew-defect bound.

    Uses the batched LAPACK symmetric eigensolver for throughput; the Jacobi
    path in :func:`eigen_summary` is cross-checked against it in the tests.
    """
    if trials < 1:
        raise InputError("trials must be >= 1")
    worst = -np.inf
    violations = 0
    remaining = trials
    while remaining > 0:
        m = min(chunk, remaining)
        remaining -= m
        p = random_spd_batch(rng, m, dim)
        s = random_symmetric_batch(rng, m, dim)
        x = p @ s
        lhs = np.sum((x - np.transpose(x, (0, 2, 1))) ** 2, axis=(1, 2))
        eig = np.linalg.eigvalsh(p)
        t = eig[:, 0] / eig[:, -1]
        rhs = 2.0 * (1.0 - t) ** 2 / (1.0 + t * t) * np.sum(x * x, axis=(1, 2))
        slack = lhs / rhs - 1.0
        worst = max(worst, float(np.max(slack)))
        violations += int(np.count_nonzero(lhs > rhs * (1.0 + rel_slack)))
    return MassTrialReport(dim=dim, trials=trials, worst_slack=worst,
                           violations=violations, rel_slack=rel_slack)


def extremal_pair(dim: int = 2, lam_min: float = 1.0, lam_max: float = 4.0):
    """The pair attaining equality: P = diag(lmin,..,lmax), S = e1 en^t + en e1^t."""
    if dim < 2:
        raise InputError("dim must be >= 2")
    lam = np.linspace(lam_min, lam_max, dim)
    p = np.diag(lam)
    s = np.zeros((dim, dim))
    s[0, -1] = s[-1, 0] = 1.0
    return p, s
