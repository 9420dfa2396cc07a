"""Closed-form-accurate radial solver for Div(a(|Du|) Du) = f and the
C^{p'} diagnostics.

For radial u(x) = v(|x|) the equation reduces to the flux identity

    r^(N-1) T(r) = int_{r0}^r s^(N-1) f(s) ds + c,      T = a(|v'|) v',

with c the homogeneous flux mode (first-class for annular domains that do
not contain the origin).  The scalar monotone map t -> a(|t|) t is inverted
per radius, so the solver is exact up to 1-D quadrature and root-finding
tolerances and serves as an oracle for the 2-D grid solver.

The stress field is V(x) = (T(|x|)/|x|) x with the analytic gradient
DV = h I + r h' (x/r)(x/r)^t, h = T/r, which is symmetric: radial stress
fields are curl-free.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate, optimize, stats

from .errors import InputError, ModelError, NumericError, PreconditionError
from .integrands.profiles import UhlenbeckProfile, power_profile

_SPHERE_AREA = {1: 2.0, 2: 2.0 * np.pi, 3: 4.0 * np.pi}


def sphere_area(dim: int) -> float:
    if dim not in _SPHERE_AREA:
        from scipy.special import gamma
        return float(2.0 * np.pi ** (dim / 2.0) / gamma(dim / 2.0))
    return _SPHERE_AREA[dim]


@dataclass(frozen=True)
class RadialProblem:
    """Div(a(|Du|) Du) = f with radial data on [r0, R]."""

    dim: int
    profile: UhlenbeckProfile
    source: Callable[[np.ndarray], np.ndarray]
    r_max: float
    r_min: float = 0.0
    flux_c: float = 0.0
    boundary_value: float = 0.0

    def __post_init__(self):
        if self.dim < 1:
            raise InputError("dim must be >= 1")
        if not 0.0 <= self.r_min < self.r_max:
            raise InputError("need 0 <= r_min < r_max")
        if self.r_min == 0.0 and self.flux_c != 0.0:
            raise InputError("the homogeneous flux mode needs r_min > 0")
        i_a, s_a = self.profile.indices()
        if i_a <= -1.0 or not np.isfinite(s_a):
            raise InputError(f"profile {self.profile.name} inadmissible")


@dataclass(frozen=True)
class RadialSolution:
    problem: RadialProblem
    r: np.ndarray
    flux: np.ndarray        # T(r) = a(|v'|) v'
    v_prime: np.ndarray
    v: np.ndarray
    flux_prime: np.ndarray = field(repr=False, default=None)

    def flux_at(self, r):
        return np.interp(np.asarray(r, float), self.r, self.flux)

    def v_prime_at(self, r):
        return np.interp(np.asarray(r, float), self.r, self.v_prime)

    def v_at(self, r):
        return np.interp(np.asarray(r, float), self.r, self.v)


def _cumulative_source_integral(prob: RadialProblem, r: np.ndarray) -> np.ndarray:
    """int_{r0}^{r_i} s^(N-1) f(s) ds by adaptive Gauss-Kronrod per segment."""
    vals = np.zeros_like(r)
    acc = 0.0
    lo = prob.r_min
    integrand = lambda s: s ** (prob.dim - 1) * float(prob.source(np.asarray(s)))
    for i, hi in enumerate(r):
        if hi > lo:
            seg, err = integrate.quad(integrand, lo, hi, epsabs=1e-13, epsrel=1e-12)
            if not np.isfinite(seg):
                raise InputError("source is not integrable against r^(N-1)")
            acc += seg
        vals[i] = acc
        lo = hi
    return vals


def _invert_flux(profile: UhlenbeckProfile, t_flux: np.ndarray) -> np.ndarray:
    """Solve a(|t|) t = T per entry (monotone under admissibility).

    Power profiles are inverted in closed form; the generic path brackets
    geometrically, bisects with brentq, then polishes with Newton.
    """
    params = profile.params or {}
    if profile.name.startswith("power[") and "p" in params:
        p = params["p"]
        return np.sign(t_flux) * np.abs(t_flux) ** (1.0 / (p - 1.0))

    def solve_one(target: float) -> float:
        if target == 0.0:
            return 0.0
        sign = np.sign(target)
        mag = abs(target)
        g = lambda t: profile.a(np.asarray(t)) * t - mag
        hi = 1.0
        for _ in range(200):
            if g(hi) >= 0.0:
                break
            hi *= 2.0
        else:
            raise ModelError(f"flux {target:.3e} outside the range of a(t) t")
        lo = 0.0 if g(1e-300) <= 0.0 else None
        if lo is None:
            lo = hi
            for _ in range(200):
                lo *= 0.5
                if g(lo) <= 0.0:
                    break
            else:
                raise ModelError(f"flux {target:.3e} outside the range of a(t) t")
        root = optimize.brentq(g, lo, hi, xtol=1e-300, rtol=8.9e-16, maxiter=300)
        for _ in range(3):  # Newton polish
            a_val = float(profile.a(np.asarray(root)))
            da_val = float(profile.da(np.asarray(root)))
            deriv = a_val + root * da_val
            if deriv > 0.0:
                step = (a_val * root - mag) / deriv
                root -= step
        resid = abs(float(profile.a(np.asarray(root))) * root - mag)
        if resid > 1e-12 * (1.0 + mag):
            raise NumericError(f"flux inversion residual {resid:.2e}")
        return sign * root

    return np.array([solve_one(float(t)) for t in t_flux])


def solve_radial(prob: RadialProblem, num: int = 4097) -> RadialSolution:
    """Flux quadrature + monotone inversion + cumulative integration of v'."""
    r = np.linspace(prob.r_min, prob.r_max, num)
    src_int = _cumulative_source_integral(prob, r)
    with np.errstate(divide="ignore", invalid="ignore"):
        flux = (src_int + prob.flux_c) / np.where(r > 0.0, r ** (prob.dim - 1), np.inf)
    if r[0] == 0.0:
        flux[0] = 0.0
    v_prime = _invert_flux(prob.profile, flux)
    v_rel = integrate.cumulative_simpson(v_prime, x=r, initial=0.0)
    v = v_rel - v_rel[-1] + prob.boundary_value
    f_vals = np.asarray(prob.source(r), dtype=float)
    if f_vals.ndim == 0:
        f_vals = np.full_like(r, float(f_vals))
    with np.errstate(invalid="ignore"):
        flux_prime = f_vals - (prob.dim - 1) * flux / np.where(r > 0.0, r, np.inf)
    if r[0] == 0.0:
        flux_prime[0] = f_vals[0] / prob.dim
    return RadialSolution(problem=prob, r=r, flux=flux, v_prime=v_prime,
                          v=v, flux_prime=flux_prime)


def flux_identity_defect(sol: RadialSolution) -> float:
    """max_r |r^(N-1) T(r) - int s^(N-1) f ds - c| (independent re-quadrature)."""
    prob = sol.problem
    idx = np.linspace(0, len(sol.r) - 1, 33).astype(int)
    r_checked = sol.r[idx]
    worst = 0.0
    integrand = lambda s: s ** (prob.dim - 1) * float(prob.source(np.asarray(s)))
    for r_i, t_i in zip(r_checked, sol.flux[idx]):
        ref, _ = integrate.quad(integrand, prob.r_min, r_i, epsabs=1e-13, epsrel=1e-12)
        worst = max(worst, abs(r_i ** (prob.dim - 1) * t_i - ref - prob.flux_c))
    return worst


# -- gridded stress field ----------------------------------------------------

@dataclass(frozen=True)
class StressGrid:
    points: np.ndarray      # (M, dim)
    values: np.ndarray      # (M, dim), V(x) = h(|x|) x
    gradients: np.ndarray   # (M, dim, dim), analytic DV


def stress_of(sol: RadialSolution, points: np.ndarray) -> StressGrid:
    """V and its analytic gradient DV = h I + r h' unit unit^t on points.

    h = T(r)/r and h' = (T' r - T)/r^2 with T' = f - (N-1) T / r from the
    flux differential identity.
    """
    pts = np.asarray(points, dtype=float)
    dim = sol.problem.dim
    if pts.shape[-1] != dim:
        raise InputError("points dimension mismatch")
    r = np.linalg.norm(pts, axis=-1)
    if np.any(r < max(sol.problem.r_min, 1e-14)) or np.any(r > sol.problem.r_max + 1e-12):
        raise InputError("points outside the solved radial range")
    t_flux = sol.flux_at(r)
    t_prime = np.interp(r, sol.r, sol.flux_prime)
    h = t_flux / r
    h_prime = (t_prime * r - t_flux) / r ** 2
    unit = pts / r[..., None]
    values = h[..., None] * pts
    eye = np.eye(dim)
    proj = unit[..., :, None] * unit[..., None, :]
    gradients = h[..., None, None] * eye + (r * h_prime)[..., None, None] * proj
    return StressGrid(points=pts, values=values, gradients=gradients)


def psi_map(y, p: float):
    """Psi(y) = |y|^((2-p)/(p-1)) y with Psi(0) = 0; inverts z -> |z|^(p-2) z."""
    if p <= 1.0:
        raise InputError("p must be > 1")
    y = np.asarray(y, dtype=float)
    mag = np.linalg.norm(y, axis=-1, keepdims=True)
    expo = (2.0 - p) / (p - 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        factor = np.where(mag > 0.0, mag ** expo, 0.0)
    return factor * y


# -- Holder exponent fits ------------------------------------------------------

@dataclass(frozen=True)
class HolderFit:
    exponent: float
    ci95: float
    scales: np.ndarray
    moduli: np.ndarray
    degenerate: bool = False


def holder_exponent(r: np.ndarray, values: np.ndarray,
                    window: tuple[float, float] | None = None,
                    n_scales: int = 32) -> HolderFit:
    """Least-squares slope of log sup-modulus of continuity vs log scale.

    Scales are log2-uniform in the window (default [grid step, span/8]); the
    modulus at scale d is max_i |g(r_i + d) - g(r_i)| over the grid, with
    g(r + d) linearly interpolated.  Requires at least ``n_scales``
    resolvable scales.  A constant input short-circuits to exponent 1 with
    the degenerate flag set.
    """
    r = np.asarray(r, float)
    values = np.asarray(values, float)
    if r.ndim != 1 or r.shape != values.shape:
        raise InputError("need matching 1-D abscissae and values")
    span = r[-1] - r[0]
    step = np.min(np.diff(r))
    lo, hi = window if window is not None else (step, span / 8.0)
    if hi <= lo:
        raise InputError("empty scale window")
    if hi / lo < 2.0 ** ((n_scales - 1) / 8.0):
        raise PreconditionError(
            f"window [{lo:g}, {hi:g}] cannot host {n_scales} log2-uniform scales")
    scales = np.exp2(np.linspace(np.log2(lo), np.log2(hi), n_scales))
    moduli = np.empty(n_scales)
    for i, d in enumerate(scales):
        mask = r + d <= r[-1] + 1e-15
        shifted = np.interp(r[mask] + d, r, values)
        moduli[i] = np.max(np.abs(shifted - values[mask]))
    if np.max(moduli) <= 1e-300:
        return HolderFit(exponent=1.0, ci95=0.0, scales=scales, moduli=moduli,
                         degenerate=True)
    res = stats.linregress(np.log(scales), np.log(np.maximum(moduli, 1e-300)))
    tval = stats.t.ppf(0.975, n_scales - 2)
    return HolderFit(exponent=float(res.slope), ci95=float(tval * res.stderr),
                     scales=scales, moduli=moduli)


# -- localized Sobolev norms of the radial stress ------------------------------

def stress_wm_norm(sol: RadialSolution, m: float, r_lo: float, r_hi: float) -> dict:
    """||V||_{W^{1,m}} on the annulus/ball {r_lo <= |x| <= r_hi} by radial
    quadrature: |V| = |T| and |DV|_F^2 = (N-1) h^2 + (T')^2."""
    if m <= 0.0:
        raise InputError("m must be > 0")
    prob = sol.problem
    area = sphere_area(prob.dim)
    mask = (sol.r >= r_lo) & (sol.r <= r_hi)
    r = sol.r[mask]
    if len(r) < 8:
        raise InputError("radial window too thin for quadrature")
    t_flux = sol.flux[mask]
    t_prime = sol.flux_prime[mask]
    with np.errstate(divide="ignore", invalid="ignore"):
        h = np.where(r > 0, t_flux / r, t_prime)
    dv_frob = np.sqrt((prob.dim - 1) * h * h + t_prime * t_prime)
    w = r ** (prob.dim - 1)
    lm = (area * integrate.simpson(np.abs(t_flux) ** m * w, x=r)) ** (1.0 / m)
    sem = (area * integrate.simpson(dv_frob ** m * w, x=r)) ** (1.0 / m)
    return {"lm": float(lm), "seminorm": float(sem),
            "w1m": float((lm ** m + sem ** m) ** (1.0 / m))}


def source_lm_norm(prob: RadialProblem, m: float, r_lo: float, r_hi: float,
                   num: int = 2049) -> float:
    r = np.linspace(max(r_lo, prob.r_min), min(r_hi, prob.r_max), num)
    f_vals = np.asarray(prob.source(r), dtype=float)
    if f_vals.ndim == 0:
        f_vals = np.full_like(r, float(f_vals))
    area = sphere_area(prob.dim)
    return float((area * integrate.simpson(np.abs(f_vals) ** m * r ** (prob.dim - 1), x=r))
                 ** (1.0 / m))


@dataclass(frozen=True)
class CpPrimeReport:
    p: float
    p_prime: float
    m: float
    stress_w1m: float
    rhs_norms: dict
    ratio: float
    gradient_exponent: float
    solution_exponent: float
    target: float
    meets_target: bool


def cp_prime_verify(p: float, f_source, m: float, dim: int = 2,
                    r_max: float = 1.0, num: int = 8193) -> CpPrimeReport:
    """Solve the radial p-Poisson problem and measure the C^{p'} diagnostics.

    Computes ||V||_{W^{1,m}(B_{R/2})} from the analytic DV formula, the
    right-hand-side norms ||f||_{L^m(B_R)} + ||V||_{L^1(B_R)}, and the fitted
    Holder exponent of v'; asserts 1 + exponent(Du) >= min{p', 2} - 0.1 for
    bounded sources.
    """
    prob = RadialProblem(dim=dim, profile=power_profile(p), source=f_source,
                         r_max=r_max)
    sol = solve_radial(prob, num=num)
    norms = stress_wm_norm(sol, m, 0.0, r_max / 2.0)
    f_norm = source_lm_norm(prob, m, 0.0, r_max)
    v_l1 = stress_wm_norm(sol, 1.0, 0.0, r_max)["lm"]
    ratio = norms["w1m"] / max(f_norm + v_l1, 1e-300)
    fit = holder_exponent(sol.r, sol.v_prime)
    p_prime = p / (p - 1.0)
    grad_expo = min(fit.exponent, 1.0)
    sol_expo = 1.0 + grad_expo
    target = min(p_prime, 2.0) - 0.1
    return CpPrimeReport(p=p, p_prime=p_prime, m=m, stress_w1m=norms["w1m"],
                         rhs_norms={"f_lm": f_norm, "v_l1": v_l1},
                         ratio=float(ratio), gradient_exponent=float(grad_expo),
                         solution_exponent=float(sol_expo), target=float(target),
                         meets_target=bool(sol_expo >= target))


# -- admissibility arithmetic ---------------------------------------------------

@dataclass(frozen=True)
class AlphaPReport:
    dim: int
    p: float
    m_p: float          # inf at p = 2
    alpha_p: float
    admissible: bool
    m_p_above_dim: bool
    cordes_margin: float  # sqrt(2) N^2 (m_p - 1)(1 - 1/K_p), < 1 when admissible


def alpha_p(dim: int, p: float) -> AlphaPReport:
    """Exponent table for the p-Laplacian near p = 2.

    m_p = 1/(2 N^2 |p-2|); admissible iff |p-2| < 1/(2 N^3); Holder exponent
    alpha_p = (1 - 2 N^3 (p-2))/(p-1) for p >= 2 and 1 - 2 N^3 (2-p) below.
    """
    if dim < 2:
        raise InputError("dim must be >= 2")
    if p <= 1.0:
        raise InputError("p must be > 1")
    gap = abs(p - 2.0)
    admissible = gap < 1.0 / (2.0 * dim ** 3)
    m_p = np.inf if gap == 0.0 else 1.0 / (2.0 * dim ** 2 * gap)
    if p >= 2.0:
        alpha = (1.0 - 2.0 * dim ** 3 * (p - 2.0)) / (p - 1.0)
    else:
        alpha = 1.0 - 2.0 * dim ** 3 * (2.0 - p)
    k_p = max(p - 1.0, 1.0 / (p - 1.0))
    if np.isinf(m_p):
        margin = 0.0
    else:
        margin = np.sqrt(2.0) * dim ** 2 * (m_p - 1.0) * (1.0 - 1.0 / k_p)
    return AlphaPReport(dim=dim, p=p, m_p=float(m_p), alpha_p=float(alpha),
                        admissible=bool(admissible),
                        m_p_above_dim=bool(m_p > dim),
                        cordes_margin=float(margin))
