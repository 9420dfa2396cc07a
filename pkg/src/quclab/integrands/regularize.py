"""Regularization toolkit: mollification, proximal map, Moreau-Yosida,
local-to-global extension.

The mollifier kernel is the polynomial bump phi(y) = c_N (1 - |y|^2)^4 on
the unit ball (unit mass), scaled to radius eps.  Convolutions are realized
as a fixed positive quadrature rule (nodes y_k, weights w_k > 0 summing to
one), built in polar/spherical form so that polynomial integrands up to
degree 15 are integrated exactly against the kernel.  Because the discrete
rule is a convex combination of translates, every pointwise eigenvalue-ratio
bound of D2F transfers verbatim to the mollified Hessian: lambda_min is
concave and lambda_max convex under positive-weight averaging.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.special import beta as beta_fn

from ..errors import InputError, NumericError, PreconditionError
from .base import Integrand

_KERNEL_POWER = 4  # exponent in (1 - |y|^2)^4


def kernel_second_moment(dim: int, eps: float) -> float:
    """Exact int |y|^2 phi_eps(y) dy = eps^2 B(dim/2 + 1, 5) / B(dim/2, 5)."""
    return eps * eps * beta_fn(dim / 2.0 + 1.0, _KERNEL_POWER + 1.0) \
        / beta_fn(dim / 2.0, _KERNEL_POWER + 1.0)


def _gauss01(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


@dataclass(frozen=True)
class MollifierRule:
    """Positive quadrature rule for the unit-ball bump kernel.

    ``nodes``: (M, dim) points in the unit ball, ``weights``: (M,) positive
    weights with sum exactly normalized to 1.
    """

    dim: int
    nodes: np.ndarray
    weights: np.ndarray

    @classmethod
    def build(cls, dim: int, radial: int = 13, angular: int = 16) -> "MollifierRule":
        """Polar (dim=2) / spherical (dim=3) product rule.

        Radial Gauss-Legendre with ``radial`` nodes against the weight
        r^(dim-1) (1-r^2)^4 is exact for radial polynomial factors up to
        degree 2*radial - 1 - 9; with the default 13 nodes and 16 angular
        points the full rule integrates polynomial integrands of degree
        <= 15 against the kernel exactly.  dim >= 4 falls back to a tensor
        rule on the cube with the same guarantee dropped.
        """
        if dim == 1:
            r, wr = _gauss01(radial)
            nodes = np.concatenate([-r, r])[:, None]
            w = np.concatenate([wr, wr]) * (1.0 - nodes[:, 0] ** 2) ** _KERNEL_POWER
        elif dim == 2:
            r, wr = _gauss01(radial)
            theta = 2.0 * np.pi * np.arange(angular) / angular
            dirs = np.stack([np.cos(theta), np.sin(theta)], axis=1)
            nodes = (r[:, None, None] * dirs[None, :, :]).reshape(-1, 2)
            w = (wr * r * (1.0 - r * r) ** _KERNEL_POWER)[:, None]
            w = np.broadcast_to(w, (radial, angular)).reshape(-1).copy()
        elif dim == 3:
            r, wr = _gauss01(radial)
            mu, wmu = np.polynomial.legendre.leggauss(8)
            phi_ang = 2.0 * np.pi * np.arange(angular) / angular
            sin_t = np.sqrt(1.0 - mu * mu)
            dirs = np.stack([
                np.outer(sin_t, np.cos(phi_ang)),
                np.outer(sin_t, np.sin(phi_ang)),
                np.broadcast_to(mu[:, None], (8, angular)),
            ], axis=-1).reshape(-1, 3)
            wdir = np.broadcast_to(wmu[:, None], (8, angular)).reshape(-1)
            nodes = (r[:, None, None] * dirs[None, :, :]).reshape(-1, 3)
            w = ((wr * r * r * (1.0 - r * r) ** _KERNEL_POWER)[:, None]
                 * wdir[None, :]).reshape(-1)
        else:
            x, wx = _gauss01(radial)
            x = 2.0 * x - 1.0
            wx = 2.0 * wx
            grids = np.meshgrid(*([x] * dim), indexing="ij")
            nodes = np.stack([g.ravel() for g in grids], axis=1)
            w = np.ones(len(nodes))
            for g in np.meshgrid(*([wx] * dim), indexing="ij"):
                w *= g.ravel()
            r2 = np.sum(nodes * nodes, axis=1)
            w *= np.clip(1.0 - r2, 0.0, None) ** _KERNEL_POWER
            keep = w > 0
            nodes, w = nodes[keep], w[keep]
        w = w / w.sum()
        return cls(dim=dim, nodes=nodes, weights=w)


_RULES: dict[int, MollifierRule] = {}


def _rule(dim: int) -> MollifierRule:
    if dim not in _RULES:
        _RULES[dim] = MollifierRule.build(dim)
    return _RULES[dim]


def mollify(f: Integrand, eps: float, rule: MollifierRule | None = None) -> Integrand:
    """Convolution F * phi_eps realized by the positive kernel rule.

    Preserves any declared eigenvalue-ratio bound exactly (convex combination
    of translated Hessians), converges to F in C^1 on compacts as eps -> 0,
    and shifts a quadratic integrand by the constant
    ``kernel_second_moment(dim, eps) / 2``.
    """
    if eps <= 0.0:
        raise InputError("eps must be > 0")
    rule = rule or _rule(f.dim)
    offsets = eps * rule.nodes
    weights = rule.weights

    def _avg(evaluator, z):
        out = None
        for y, w in zip(offsets, weights):
            term = w * np.asarray(evaluator(z - y), dtype=float)
            out = term if out is None else out + term
        if not np.all(np.isfinite(out)):
            raise NumericError("mollification produced non-finite values")
        return out

    hess = None
    if f.hessian_fn is not None:
        hess = lambda z: _avg(f.hessian_fn, z)
    return Integrand(
        name=f"mollified[{f.name},eps={eps:g}]",
        dim=f.dim,
        value_fn=lambda z: _avg(f.value_fn, z),
        gradient_fn=lambda z: _avg(f.gradient_fn, z),
        hessian_fn=hess,
        declared_K=f.declared_K,
        minimizer=f.minimizer,
        singular_points=(),
        params={**f.params, "mollify_eps": eps},
    )


def prox_point(f: Integrand, delta: float, z, max_iter: int = 200,
               rtol: float = 1e-12) -> np.ndarray:
    """Solve P + delta DF(P) = z by damped Newton (batched over points).

    The residual target is rtol * (1 + |z|) per point.  The map
    G(P) = P + delta DF(P) is strongly monotone with constant 1, so the
    returned point is within the residual of the exact proximal point and
    the map is 1-Lipschitz in z.
    """
    if delta <= 0.0:
        raise InputError("delta must be > 0")
    z = np.asarray(z, dtype=float)
    single = z.ndim == 1
    pts = z[None, :] if single else z.reshape(-1, f.dim)
    p = pts.copy()
    target = rtol * (1.0 + np.linalg.norm(pts, axis=1))
    eye = np.eye(f.dim)

    def residual(pcur):
        return pcur + delta * np.asarray(f.gradient(pcur), float) - pts

    res = residual(p)
    res_norm = np.linalg.norm(res, axis=1)
    for _ in range(max_iter):
        active = res_norm > target
        if not np.any(active):
            break
        pa = p[active]
        ra = res[active]
        jac = eye + delta * np.asarray(f.hessian(pa), float)
        try:
            step = np.linalg.solve(jac, ra[..., None])[..., 0]
        except np.linalg.LinAlgError:
            step = ra  # fall back to a fixed-point step
        t = np.ones(len(pa))
        cur_norm = res_norm[active]
        for _bt in range(40):
            trial = pa - t[:, None] * step
            rtrial = trial + delta * np.asarray(f.gradient(trial), float) - pts[active]
            ntrial = np.linalg.norm(rtrial, axis=1)
            good = ntrial <= (1.0 - 1e-4 * t) * cur_norm
            if np.all(good):
                break
            t = np.where(good, t, 0.5 * t)
        p[active] = pa - t[:, None] * step
        res = residual(p)
        res_norm = np.linalg.norm(res, axis=1)
    if np.any(res_norm > target):
        raise NumericError(f"prox Newton did not converge ({max_iter} iterations, "
                           f"worst residual {float(res_norm.max()):.3e})")
    out = p.reshape(z.shape)
    return out[0] if single and out.ndim == 2 else out


def moreau_yosida(f: Integrand, delta: float) -> Integrand:
    """F_delta(z) = inf_y F(y) + |y-z|^2/(2 delta), wired through the prox.

    Gradient DF_delta(z) = DF(P_delta(z)) = (z - P_delta(z))/delta; Hessian
    D2F(P)(I + delta D2F(P))^-1, whose eigenvalues l/(1 + delta l) preserve
    any declared ratio bound.
    """
    if delta <= 0.0:
        raise InputError("delta must be > 0")

    def value(z):
        z = np.asarray(z, float)
        p = prox_point(f, delta, z)
        gap = z - p
        return np.asarray(f.value(p), float) + np.sum(gap * gap, axis=-1) / (2.0 * delta)

    def gradient(z):
        z = np.asarray(z, float)
        p = prox_point(f, delta, z)
        return (z - p) / delta

    def hessian(z):
        z = np.asarray(z, float)
        p = prox_point(f, delta, z)
        b = np.asarray(f.hessian(p), float)
        eye = np.eye(f.dim)
        out = np.linalg.solve(eye + delta * b, b)
        return 0.5 * (out + np.swapaxes(out, -1, -2))

    return Integrand(
        name=f"moreau_yosida[{f.name},delta={delta:g}]",
        dim=f.dim,
        value_fn=value,
        gradient_fn=gradient,
        hessian_fn=hessian,
        declared_K=f.declared_K,
        minimizer=f.minimizer,
        singular_points=(),
        params={**f.params, "my_delta": delta},
    )


def _smoothstep(t):
    """Quintic C^2 transition: 0 -> 1 on [0, 1] with vanishing s', s'' at ends."""
    t = np.clip(t, 0.0, 1.0)
    s = t ** 3 * (10.0 - 15.0 * t + 6.0 * t * t)
    ds = 30.0 * t ** 2 * (1.0 - 2.0 * t + t * t)
    d2s = 60.0 * t * (1.0 - 3.0 * t + 2.0 * t * t)
    return s, ds, d2s


def _radial_cut(r, lo, hi):
    """eta = 1 below lo, 0 above hi, quintic in between; returns eta, eta', eta''."""
    t = (r - lo) / (hi - lo)
    s, ds, d2s = _smoothstep(t)
    inside = r <= lo
    outside = r >= hi
    eta = np.where(inside, 1.0, np.where(outside, 0.0, 1.0 - s))
    deta = np.where(inside | outside, 0.0, -ds / (hi - lo))
    d2eta = np.where(inside | outside, 0.0, -d2s / (hi - lo) ** 2)
    return eta, deta, d2eta


def extend_local(f: Integrand, R: float, sigma: float, eps_floor: float,
                 sample_shells: int = 48, sample_dirs: int = 48,
                 seed: int = 11) -> Integrand:
    """Extend F from the ball B_R to a globally quadratic-growth integrand.

    Construction: with tau = (1+sigma)/2 and a radial C^2 cutoff eta that is
    1 on B_{tau R} and 0 outside B_R,

        F~(z) = eta F + (1 - eta) |z|^2/2 + C (|z| - sigma R)_+^2,

    where C is calibrated from the sampled maximum of the Frobenius norm of
    the cross-term matrix

        M = (1-eta) I + Deta (x) DF + DF (x) Deta - 2 Deta (x) z
            + (F - |z|^2/2) D2eta

    via (1 - sigma/tau) C = max |M|_F.  F~ equals F on B_{sigma R} exactly
    and has quadratic growth outside.  Requires lambda_min(D2F) >= eps_floor
    on the sampled annulus B_R minus B_{sigma R}.
    """
    if not (0.0 < sigma < 1.0):
        raise InputError("sigma must lie in (0, 1)")
    if R <= 0.0:
        raise InputError("R must be > 0")
    tau = 0.5 * (1.0 + sigma)
    dim = f.dim
    eye = np.eye(dim)

    rng = np.random.default_rng(seed)
    radii = np.linspace(sigma * R * (1.0 + 1e-9), R, sample_shells)
    dirs = rng.standard_normal((sample_dirs, dim))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    # degeneracies concentrate on coordinate axes; always sample them
    axes = np.concatenate([np.eye(dim), -np.eye(dim)])
    dirs = np.concatenate([dirs, axes])
    pts = (radii[:, None, None] * dirs[None, :, :]).reshape(-1, dim)

    hess_samples = np.asarray(f.hessian(pts), float)
    lam_min = np.linalg.eigvalsh(hess_samples)[:, 0]
    if np.any(~np.isfinite(lam_min)) or np.any(lam_min < eps_floor):
        raise PreconditionError(
            f"strict convexity floor {eps_floor:g} fails on the annulus "
            f"(min sampled eigenvalue {np.nanmin(lam_min):.3e})")

    def _cut_parts(z):
        r = np.linalg.norm(z, axis=-1)
        eta, deta_r, d2eta_r = _radial_cut(r, tau * R, R)
        rs = np.maximum(r, 1e-300)
        unit = z / rs[..., None]
        deta = deta_r[..., None] * unit
        proj = unit[..., :, None] * unit[..., None, :]
        d2eta = (d2eta_r[..., None, None] * proj
                 + (deta_r / rs)[..., None, None] * (eye - proj))
        return r, eta, deta, d2eta

    def _m_matrix(z):
        r, eta, deta, d2eta = _cut_parts(z)
        df = np.asarray(f.gradient(z), float)
        fv = np.asarray(f.value(z), float)
        quad = 0.5 * r * r
        m = ((1.0 - eta)[..., None, None] * eye
             + deta[..., :, None] * df[..., None, :]
             + df[..., :, None] * deta[..., None, :]
             - 2.0 * deta[..., :, None] * z[..., None, :]
             + (fv - quad)[..., None, None] * d2eta)
        return m

    m_norms = np.sqrt(np.sum(_m_matrix(pts) ** 2, axis=(-2, -1)))
    c_const = float(m_norms.max()) / (1.0 - sigma / tau)

    def _hinge(z):
        r = np.linalg.norm(z, axis=-1)
        plus = np.maximum(r - sigma * R, 0.0)
        rs = np.maximum(r, 1e-300)
        unit = z / rs[..., None]
        proj = unit[..., :, None] * unit[..., None, :]
        val = plus ** 2
        grad = (2.0 * plus)[..., None] * unit
        active = (r > sigma * R).astype(float)
        hess = (2.0 * active)[..., None, None] * proj \
            + (2.0 * plus / rs)[..., None, None] * (eye - proj)
        return val, grad, hess

    def _finite(term):
        # eta vanishes outside B_R where a genuinely local F may be undefined;
        # sanitize so that 0 * undefined contributes 0
        return np.where(np.isfinite(term), term, 0.0)

    def value(z):
        z = np.asarray(z, float)
        r, eta, _, _ = _cut_parts(z)
        hinge, _, _ = _hinge(z)
        fv = _finite(np.asarray(f.value(z), float))
        return eta * fv + (1.0 - eta) * 0.5 * r * r + c_const * hinge

    def gradient(z):
        z = np.asarray(z, float)
        r, eta, deta, _ = _cut_parts(z)
        fv = _finite(np.asarray(f.value(z), float))
        df = _finite(np.asarray(f.gradient(z), float))
        _, hinge_grad, _ = _hinge(z)
        return (eta[..., None] * df + (1.0 - eta)[..., None] * z
                + (fv - 0.5 * r * r)[..., None] * deta
                + c_const * hinge_grad)

    def hessian(z):
        z = np.asarray(z, float)
        eta = _cut_parts(z)[1]
        d2f = _finite(np.asarray(f.hessian(z), float))
        m = _m_matrix(z)
        _, _, hinge_hess = _hinge(z)
        return eta[..., None, None] * d2f + m + c_const * hinge_hess

    return Integrand(
        name=f"extended[{f.name},R={R:g},sigma={sigma:g}]",
        dim=dim,
        value_fn=value,
        gradient_fn=gradient,
        hessian_fn=hessian,
        declared_K=None,
        minimizer=f.minimizer,
        singular_points=f.singular_points,
        params={**f.params, "extend_R": R, "extend_sigma": sigma,
                "extend_C": c_const},
    )
