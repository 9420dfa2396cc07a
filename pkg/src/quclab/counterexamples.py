"""Executable counterexamples: the arctan family and the Cantor stress.

On any ball B inside the right half-plane, u(x, y) = arctan(y/x) solves
Div(DF(Du)) = 0 weakly for every radial C^2 integrand F: the product
D2F(Du) D2u has zero trace pointwise.  Instantiated with the Cantor
integrand F(t) = t^2/2 + H_L(t) this produces the stress field

    V_L(z) = z_perp/|z|^2 + h_L(1/|z|) z_perp/|z|,

whose level-L eigenvalue-ratio bound degrades like (3/2)^L while the limit
field's distributional derivative develops a purely singular (Cantor) part:
the almost-everywhere ratio bound alone does not yield a Sobolev stress.

Numerical caveat recorded here for honesty: fields of the form psi(|z|)
z_perp are tangential to circles and hence weakly divergence-free for any
bounded radial profile, so the measured weak residual is quadrature noise
at every level rather than an O(2^-L) quantity; and since h_L(1/r) is
monotone along rays, the L^1 difference quotients of V_L telescope to a
level-independent total-variation value instead of blowing up.  The m > 1
quotient columns are the honest finite-level witnesses of the forming
singular part.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .cantorfn import CantorProfile
from .errors import InputError
from .bumps import QuinticBump
from .quadrature import adaptive_quad_2d


# -- the arctan solution -------------------------------------------------------

def arctan_value(z):
    z = np.asarray(z, float)
    return np.arctan2(z[..., 1], z[..., 0])


def arctan_gradient(z):
    """Du = z_perp / |z|^2 for u = arctan(y/x)."""
    z = np.asarray(z, float)
    r2 = np.sum(z * z, axis=-1)
    perp = np.stack([-z[..., 1], z[..., 0]], axis=-1)
    return perp / r2[..., None]


def arctan_hessian(z):
    z = np.asarray(z, float)
    x, y = z[..., 0], z[..., 1]
    r4 = (x * x + y * y) ** 2
    h = np.empty(z.shape[:-1] + (2, 2))
    h[..., 0, 0] = 2.0 * x * y
    h[..., 0, 1] = y * y - x * x
    h[..., 1, 0] = y * y - x * x
    h[..., 1, 1] = -2.0 * x * y
    return h / r4[..., None, None]


@dataclass(frozen=True)
class ArctanSolution:
    """u(x, y) = arctan(y/x) on a ball inside {x > 0}."""

    ball_center: np.ndarray
    ball_radius: float

    def __post_init__(self):
        c = np.asarray(self.ball_center, float)
        if c.shape != (2,):
            raise InputError("ball center must be a point in the plane")
        if self.ball_radius <= 0.0 or c[0] - self.ball_radius <= 0.0:
            raise InputError("ball must sit at positive distance from {x = 0}")
        object.__setattr__(self, "ball_center", c)

    value = staticmethod(arctan_value)
    gradient = staticmethod(arctan_gradient)
    hessian = staticmethod(arctan_hessian)


def _check_half_plane(z):
    z = np.asarray(z, float)
    if np.any(z[..., 0] <= 0.0):
        raise InputError("points must lie in the right half-plane {x > 0}")
    return z


def radial_hessian_2d(fprime, fsecond, w):
    """D2F(w) for radial F: F'' on the radial line, F'(|w|)/|w| transversally."""
    w = np.asarray(w, float)
    mag = np.linalg.norm(w, axis=-1)
    unit = w / np.maximum(mag, 1e-300)[..., None]
    proj = unit[..., :, None] * unit[..., None, :]
    eye = np.eye(2)
    return (fsecond(mag)[..., None, None] * proj
            + (fprime(mag) / mag)[..., None, None] * (eye - proj))


def trace_check_radial(fprime: Callable, fsecond: Callable, z) -> float:
    """|trace(D2F(Du(z)) D2u(z))| for the arctan solution (should be ~ 0).

    ``fprime``/``fsecond`` are scalar derivative callables of the radial
    profile; finite-difference second derivatives are fine since the zero
    trace is structural, not a cancellation of accurate numbers.
    """
    z = _check_half_plane(z)
    du = arctan_gradient(z)
    d2u = arctan_hessian(z)
    d2f = radial_hessian_2d(fprime, fsecond, du)
    prod = d2f @ d2u
    tr = np.trace(prod, axis1=-2, axis2=-1)
    return float(np.max(np.abs(tr)))


def fd_second_derivative(fprime: Callable, h: float = 1e-6) -> Callable:
    return lambda t: (fprime(np.asarray(t) + h) - fprime(np.asarray(t) - h)) / (2.0 * h)


# -- the Cantor stress ---------------------------------------------------------

def cantor_stress_field(level: int) -> Callable[[np.ndarray], np.ndarray]:
    """Batched evaluator of V_L(z) = z_perp/|z|^2 + h_L(1/|z|) z_perp/|z|."""
    profile = CantorProfile(level)

    def field(z):
        z = _check_half_plane(z)
        r = np.linalg.norm(z, axis=-1)
        perp = np.stack([-z[..., 1], z[..., 0]], axis=-1)
        scalar = 1.0 / (r * r) + profile.h(1.0 / r) / r
        return scalar[..., None] * perp

    return field


def cantor_stress(z, level: int) -> np.ndarray:
    return cantor_stress_field(level)(z)


def smooth_control_field(z) -> np.ndarray:
    """The harmonic-stream part z_perp/|z|^2 alone (level-independent)."""
    z = np.asarray(z, float)
    r2 = np.sum(z * z, axis=-1)
    perp = np.stack([-z[..., 1], z[..., 0]], axis=-1)
    return perp / r2[..., None]


DEFAULT_BALL = ((1.5, 0.0), 0.4)


def _bump_bank(ball_center, ball_radius, count: int, seed: int):
    rng = np.random.default_rng(seed)
    c = np.asarray(ball_center, float)
    bumps = []
    while len(bumps) < count:
        offset = rng.uniform(-0.6, 0.6, size=2) * ball_radius
        rho = rng.uniform(0.2, 0.38) * ball_radius
        if np.linalg.norm(offset) + rho < 0.97 * ball_radius:
            bumps.append(QuinticBump(center=c + offset, radius=rho))
    return bumps


def weak_divergence_residual(field: Callable, ball_center=DEFAULT_BALL[0],
                             ball_radius: float = DEFAULT_BALL[1],
                             n_bumps: int = 50, seed: int = 0,
                             tol_cell: float = 1e-12, max_depth: int = 8,
                             max_cells: int = 60_000) -> float:
    """max over C^2 bumps phi of |int (V, Dphi)| / ||Dphi||_1.

    Both integrals use the adaptive quadtree rule over each bump's bounding
    box; the returned value decreases toward zero under quadrature
    refinement (deeper max_depth / smaller tol_cell).
    """
    bumps = _bump_bank(ball_center, ball_radius, n_bumps, seed)
    worst = 0.0
    for bump in bumps:
        cx, cy = bump.center
        rho = bump.radius
        box = (cx - rho, cx + rho, cy - rho, cy + rho)

        def pairing(pts):
            return np.sum(field(pts) * bump.gradient(pts), axis=-1)

        num = adaptive_quad_2d(pairing, box, tol_cell=tol_cell,
                               max_depth=max_depth, max_cells=max_cells)
        den = adaptive_quad_2d(
            lambda pts: np.linalg.norm(bump.gradient(pts), axis=-1), box,
            tol_cell=tol_cell, max_depth=6, max_cells=20_000)
        worst = max(worst, abs(num.value) / den.value)
    return float(worst)


# -- finite-level Sobolev diagnostics -------------------------------------------

@dataclass(frozen=True)
class BlowupRow:
    level: int
    w11_quotient: float      # sup_e int_B |V(x+de) - V(x)|/d dx  (bounded: see module doc)
    sup_quotient: float      # max_x |V(x+de) - V(x)|/d   (resolves (3/2)^L while d ~ 3^-L)
    l15_quotient: float      # m = 1.5 difference-quotient seminorm (grows with L)
    control_w11: float       # same W^{1,1} diagnostic for the smooth part


def sobolev_blowup_diagnostic(levels, ball_center=DEFAULT_BALL[0],
                              ball_radius: float = DEFAULT_BALL[1],
                              n_grid: int = 1024) -> list[BlowupRow]:
    """Difference-quotient table at matched resolution across levels.

    The grid step delta = (2 ball_radius)/n_grid is the quotient scale; the
    four lattice directions (axes and diagonals) are scanned and the worst
    taken.  See the module docstring for why the W^{1,1} column saturates at
    the total-variation value while the m > 1 columns grow.
    """
    levels = [int(l) for l in levels]
    if any(b <= a for a, b in zip(levels, levels[1:])):
        raise InputError("levels must be strictly increasing")
    c = np.asarray(ball_center, float)
    delta = 2.0 * ball_radius / n_grid
    axis = np.linspace(-ball_radius, ball_radius, n_grid, endpoint=False) + delta / 2.0
    xx, yy = np.meshgrid(c[0] + axis, c[1] + axis, indexing="ij")
    pts = np.stack([xx.ravel(), yy.ravel()], axis=1)
    inside = np.linalg.norm(pts - c, axis=1) <= ball_radius - 2.0 * delta
    dirs = np.array([[1.0, 0.0], [0.0, 1.0],
                     [1.0, 1.0], [1.0, -1.0]])
    dirs = delta * dirs / np.linalg.norm(dirs, axis=1, keepdims=True)
    area = delta * delta

    def quotients(field):
        base = field(pts[inside])
        w11 = sup_q = l15 = 0.0
        for e in dirs:
            diff = np.linalg.norm(field(pts[inside] + e) - base, axis=1) / delta
            w11 = max(w11, float(np.sum(diff) * area))
            sup_q = max(sup_q, float(diff.max()))
            l15 = max(l15, float((np.sum(diff ** 1.5) * area) ** (1.0 / 1.5)))
        return w11, sup_q, l15

    control_w11 = quotients(smooth_control_field)[0]
    rows = []
    for level in levels:
        w11, sup_q, l15 = quotients(cantor_stress_field(level))
        rows.append(BlowupRow(level=level, w11_quotient=w11, sup_quotient=sup_q,
                              l15_quotient=l15, control_w11=control_w11))
    return rows
