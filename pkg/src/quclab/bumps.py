"""Smooth compactly supported test functions with analytic derivatives.

``SmoothBump`` is the classical exponential bump exp(1 - 1/(1 - s)) of the
squared scaled radius s = |x - c|^2 / rho^2, infinitely smooth, identically
zero for |x - c| >= rho.  Used as a cutoff in localized integral identities,
as weak-formulation test functions, and as mollified-data kernels.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError

# s values this close to 1 are treated as outside; exp(1 - 1/(1-s)) is below
# the double-precision minimum long before that.
_S_CUT = 1.0 - 1e-9


@dataclass(frozen=True)
class SmoothBump:
    """exp(1 - 1/(1 - |x-c|^2/rho^2)) on the ball B(center, radius)."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.center, float))
        if self.radius <= 0.0:
            raise InputError("radius must be > 0")
        object.__setattr__(self, "center", c)

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    def _s(self, x):
        d = np.asarray(x, float) - self.center
        return np.sum(d * d, axis=-1) / self.radius ** 2, d

    def value(self, x):
        s, _ = self._s(x)
        inside = s < _S_CUT
        with np.errstate(divide="ignore", over="ignore"):
            val = np.where(inside, np.exp(1.0 - 1.0 / np.where(inside, 1.0 - s, 1.0)), 0.0)
        return val

    def gradient(self, x):
        s, d = self._s(x)
        inside = s < _S_CUT
        one_m = np.where(inside, 1.0 - s, 1.0)
        g = np.where(inside, np.exp(1.0 - 1.0 / one_m), 0.0)
        dg_ds = -g / one_m ** 2
        return (2.0 / self.radius ** 2) * dg_ds[..., None] * d

    def hessian(self, x):
        s, d = self._s(x)
        inside = s < _S_CUT
        one_m = np.where(inside, 1.0 - s, 1.0)
        g = np.where(inside, np.exp(1.0 - 1.0 / one_m), 0.0)
        dg = -g / one_m ** 2
        d2g = g / one_m ** 4 - 2.0 * g / one_m ** 3
        eye = np.eye(self.dim)
        outer = d[..., :, None] * d[..., None, :]
        return (4.0 / self.radius ** 4) * d2g[..., None, None] * outer \
            + (2.0 / self.radius ** 2) * dg[..., None, None] * eye

    def grad_sq(self, x):
        """Gradient of value^2."""
        return 2.0 * self.value(x)[..., None] * self.gradient(x)

    def hess_sq(self, x):
        """Hessian of value^2."""
        g = self.gradient(x)
        return 2.0 * (g[..., :, None] * g[..., None, :]
                      + self.value(x)[..., None, None] * self.hessian(x))


@dataclass(frozen=True)
class PlateauBump:
    """Radial cutoff: 1 on B(center, r_in), quintic decay to 0 at r_out.

    C^2 everywhere; useful when an identity needs a cutoff that is exactly
    one on the support of the field being localized.
    """

    center: np.ndarray
    r_in: float
    r_out: float

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.center, float))
        if not 0.0 < self.r_in < self.r_out:
            raise InputError("need 0 < r_in < r_out")
        object.__setattr__(self, "center", c)

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    def _radial(self, x):
        d = np.asarray(x, float) - self.center
        return np.linalg.norm(d, axis=-1), d

    def _profile(self, r):
        t = np.clip((r - self.r_in) / (self.r_out - self.r_in), 0.0, 1.0)
        s = t ** 3 * (10.0 - 15.0 * t + 6.0 * t * t)
        ds = 30.0 * t * t * (1.0 - t) ** 2 / (self.r_out - self.r_in)
        d2s = 60.0 * t * (1.0 - 3.0 * t + 2.0 * t * t) / (self.r_out - self.r_in) ** 2
        return 1.0 - s, -ds, -d2s

    def value(self, x):
        r, _ = self._radial(x)
        return self._profile(r)[0]

    def gradient(self, x):
        r, d = self._radial(x)
        _, dv, _ = self._profile(r)
        rs = np.maximum(r, 1e-300)
        return (dv / rs)[..., None] * d

    def hessian(self, x):
        r, d = self._radial(x)
        _, dv, d2v = self._profile(r)
        rs = np.maximum(r, 1e-300)
        unit = d / rs[..., None]
        proj = unit[..., :, None] * unit[..., None, :]
        eye = np.eye(self.dim)
        return d2v[..., None, None] * proj + (dv / rs)[..., None, None] * (eye - proj)

    def grad_sq(self, x):
        return 2.0 * self.value(x)[..., None] * self.gradient(x)

    def hess_sq(self, x):
        g = self.gradient(x)
        return 2.0 * (g[..., :, None] * g[..., None, :]
                      + self.value(x)[..., None, None] * self.hessian(x))


@dataclass(frozen=True)
class QuinticBump:
    """C^2 polynomial bump s(1 - r^2/rho^2) with the quintic smoothstep s.

    Cheaper than :class:`SmoothBump` and exactly piecewise polynomial; enough
    regularity for weak formulations requiring C^2 test functions.
    """

    center: np.ndarray
    radius: float

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.center, float))
        if self.radius <= 0.0:
            raise InputError("radius must be > 0")
        object.__setattr__(self, "center", c)

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    def _t(self, x):
        d = np.asarray(x, float) - self.center
        t = 1.0 - np.sum(d * d, axis=-1) / self.radius ** 2
        return np.clip(t, 0.0, 1.0), d

    def value(self, x):
        t, _ = self._t(x)
        return t ** 3 * (10.0 - 15.0 * t + 6.0 * t * t)

    def gradient(self, x):
        t, d = self._t(x)
        ds = 30.0 * t * t * (1.0 - t) ** 2
        return ds[..., None] * (-2.0 / self.radius ** 2) * d

    def hessian(self, x):
        t, d = self._t(x)
        ds = 30.0 * t * t * (1.0 - t) ** 2
        d2s = 60.0 * t * (1.0 - 3.0 * t + 2.0 * t * t)
        eye = np.eye(self.dim)
        outer = d[..., :, None] * d[..., None, :]
        return (4.0 / self.radius ** 4) * d2s[..., None, None] * outer \
            + (-2.0 / self.radius ** 2) * ds[..., None, None] * eye
