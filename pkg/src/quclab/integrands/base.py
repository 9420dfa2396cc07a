"""Integrand container and pointwise convexity diagnostics.

An :class:`Integrand` bundles batched evaluators for F, DF and D2F together
with declared metadata: the eigenvalue-ratio bound K (when known), the
growth exponents p = 1 + 1/K and q = 1 + K derived from it, the minimizer
location, and the points where the Hessian is singular and should be
skipped by almost-everywhere samplers.

All evaluators are vectorized over a leading batch shape: ``value`` maps
(..., N) -> (...), ``gradient`` maps (..., N) -> (..., N) and ``hessian``
maps (..., N) -> (..., N, N).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .. import matrixcore
from ..errors import InputError, NumericError

_FD_STEP = float(np.finfo(float).eps) ** (1.0 / 3.0)


def _as_points(z, dim: int) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    if z.shape[-1] != dim:
        raise InputError(f"points have dimension {z.shape[-1]}, integrand expects {dim}")
    return z


@dataclass(frozen=True)
class Integrand:
    """Convex integrand with batched evaluators and declared metadata."""

    name: str
    dim: int
    value_fn: Callable[[np.ndarray], np.ndarray]
    gradient_fn: Callable[[np.ndarray], np.ndarray]
    hessian_fn: Callable[[np.ndarray], np.ndarray] | None = None
    declared_K: float | None = None
    minimizer: np.ndarray = None
    singular_points: tuple = ()
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.dim < 1:
            raise InputError("dim must be >= 1")
        if self.declared_K is not None and self.declared_K < 1.0:
            raise InputError("declared_K must be >= 1")
        z0 = np.zeros(self.dim) if self.minimizer is None else np.asarray(self.minimizer, float)
        object.__setattr__(self, "minimizer", z0)

    # -- evaluators --------------------------------------------------------

    def value(self, z):
        return self.value_fn(_as_points(z, self.dim))

    def gradient(self, z):
        return self.gradient_fn(_as_points(z, self.dim))

    def hessian(self, z):
        z = _as_points(z, self.dim)
        if self.hessian_fn is not None:
            return self.hessian_fn(z)
        return self._fd_hessian(z)

    def _fd_hessian(self, z: np.ndarray) -> np.ndarray:
        """Central differences of the gradient, step ~ eps^(1/3) (1 + |z|)."""
        h = _FD_STEP * (1.0 + np.linalg.norm(z, axis=-1))
        rows = []
        for j in range(self.dim):
            e = np.zeros(self.dim)
            e[j] = 1.0
            dz = h[..., None] * e
            rows.append((self.gradient_fn(z + dz) - self.gradient_fn(z - dz))
                        / (2.0 * h[..., None]))
        hess = np.stack(rows, axis=-2)
        return 0.5 * (hess + np.swapaxes(hess, -1, -2))

    # -- declared growth ----------------------------------------------------

    @property
    def hess_kind(self) -> str:
        return "analytic" if self.hessian_fn is not None else "finite-difference"

    @property
    def growth_p(self) -> float | None:
        return None if self.declared_K is None else 1.0 + 1.0 / self.declared_K

    @property
    def growth_q(self) -> float | None:
        return None if self.declared_K is None else 1.0 + self.declared_K

    # -- combinators --------------------------------------------------------

    def __add__(self, other: "Integrand") -> "Integrand":
        """Sum integrand; the eigenvalue-ratio bound of a sum is max(K1, K2)."""
        if not isinstance(other, Integrand):
            return NotImplemented
        if other.dim != self.dim:
            raise InputError("cannot add integrands of different dimension")
        k = None
        if self.declared_K is not None and other.declared_K is not None:
            k = max(self.declared_K, other.declared_K)
        hess = None
        if self.hessian_fn is not None and other.hessian_fn is not None:
            hess = lambda z: self.hessian_fn(z) + other.hessian_fn(z)
        return Integrand(
            name=f"({self.name}+{other.name})",
            dim=self.dim,
            value_fn=lambda z: self.value_fn(z) + other.value_fn(z),
            gradient_fn=lambda z: self.gradient_fn(z) + other.gradient_fn(z),
            hessian_fn=hess,
            declared_K=k,
            minimizer=None,
            singular_points=self.singular_points + other.singular_points,
            params={"terms": [self.name, other.name]},
        )

    def tilted(self, mu: float) -> "Integrand":
        """F + (mu/2)|z|^2.  Shifts both extreme Hessian eigenvalues by mu,
        so a declared ratio bound K is preserved."""
        if mu < 0:
            raise InputError("mu must be >= 0")
        if mu == 0.0:
            return self
        dim = self.dim
        eye = np.eye(dim)
        hess = None
        if self.hessian_fn is not None:
            hess = lambda z: self.hessian_fn(z) + mu * eye
        return replace(
            self,
            name=f"{self.name}+{mu:g}/2|z|^2",
            value_fn=lambda z: self.value_fn(z) + 0.5 * mu * np.sum(z * z, axis=-1),
            gradient_fn=lambda z: self.gradient_fn(z) + mu * z,
            hessian_fn=hess,
            params={**self.params, "tilt_mu": mu},
        )


def eigen_ratio_at(f: Integrand, z) -> float:
    """lambda_max/lambda_min of D2F(z); inf when the Hessian is degenerate."""
    z = np.asarray(z, dtype=float)
    if z.ndim != 1:
        raise InputError("eigen_ratio_at takes a single point; use eigen_ratio_batch")
    hess = np.asarray(f.hessian(z), dtype=float)
    if not np.all(np.isfinite(hess)):
        return float("inf")
    return matrixcore.eigen_summary(hess).ratio


def eigen_ratio_batch(f: Integrand, z: np.ndarray) -> np.ndarray:
    """Vectorized eigenvalue ratios at a batch of points (LAPACK path).

    Degenerate or non-finite Hessians yield ``inf``.
    """
    z = _as_points(z, f.dim)
    hess = np.asarray(f.hessian(z), dtype=float)
    flat = hess.reshape(-1, f.dim, f.dim)
    ratios = np.full(flat.shape[0], np.inf)
    finite = np.all(np.isfinite(flat), axis=(1, 2))
    if np.any(finite):
        eig = np.linalg.eigvalsh(flat[finite])
        lmin, lmax = eig[:, 0], eig[:, -1]
        ok = lmin > matrixcore.SPD_RTOL * np.maximum(lmax, 0.0)
        vals = np.full(lmin.shape, np.inf)
        vals[ok] = lmax[ok] / lmin[ok]
        ratios[finite] = vals
    return ratios.reshape(z.shape[:-1])


def validate_integrand(f: Integrand, rng: np.random.Generator, samples: int = 64,
                       radius: float = 2.0, check_minimizer: bool = True) -> None:
    """Consistency checks: midpoint convexity, DF(z0) ~ 0, DF matches FD of F.

    Raises :class:`NumericError` on violation; used by the test-suite and the
    CLI integrand verifier, not at construction time.
    """
    z1 = f.minimizer + radius * rng.standard_normal((samples, f.dim))
    z2 = f.minimizer + radius * rng.standard_normal((samples, f.dim))
    mid = 0.5 * (z1 + z2)
    gap = 0.5 * (f.value(z1) + f.value(z2)) - f.value(mid)
    scale = 1.0 + np.abs(f.value(z1)) + np.abs(f.value(z2))
    if np.any(gap < -1e-9 * scale):
        raise NumericError(f"midpoint convexity violated for {f.name}")
    if check_minimizer:
        g0 = np.linalg.norm(f.gradient(f.minimizer))
        if g0 > 1e-8 * (1.0 + abs(float(f.value(f.minimizer)))):
            raise NumericError(f"gradient at declared minimizer is {g0:.2e} for {f.name}")
    h = 1e-6 * (1.0 + np.linalg.norm(z1, axis=-1, keepdims=True))
    for j in range(f.dim):
        e = np.zeros(f.dim)
        e[j] = 1.0
        fd = (f.value(z1 + h * e) - f.value(z1 - h * e)) / (2.0 * h[..., 0])
        an = f.gradient(z1)[..., j]
        err = np.abs(fd - an) / (1.0 + np.abs(an))
        if np.any(err > 1e-5):
            raise NumericError(f"gradient of {f.name} inconsistent with F "
                               f"(max rel err {err.max():.2e})")
