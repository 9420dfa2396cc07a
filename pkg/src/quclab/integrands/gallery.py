"""Gallery of concrete integrands.

Available names:

``power``        |z - c|^p / p, ratio bound K = max{p-1, 1/(p-1)}
``two_center``   |z - z0|^p + |z + z0|^p, same K (sum rule)
``mixed``        |z|^p / p + |z_1|^q / q  (no global ratio bound)
``uhlenbeck``    int_0^{|z|} t a(t) dt for an admissible profile a
``gh``           |B z|^p / p, gauge composed with a power; K <= cond(B)^2 K_p
``cantor``       |z|^2/2 + H_L(|z|) with the level-L Cantor antiderivative;
                 ratio bound 1 + (3/2)^L
``orthotropic``  sum_i |z_i|^p (control case; ratio unbounded for p != 2)
"""

from __future__ import annotations

import numpy as np

from ..cantorfn import CantorProfile
from ..errors import InputError
from .base import Integrand
from .profiles import (
    UhlenbeckProfile,
    bounded_power_profile,
    constant_profile,
    indices_to_K,
    power_profile,
)

_SAFE_MIN = 1e-300


def _norm(z):
    return np.linalg.norm(z, axis=-1)


def _power_K(p: float) -> float:
    return max(p - 1.0, 1.0 / (p - 1.0))


def _check_p(p: float):
    if not np.isfinite(p) or p <= 1.0:
        raise InputError(f"growth exponent must satisfy p > 1, got {p}")


def _radial_hessian(r, radial_second, radial_slope, unit):
    """Hessian of a radial F: F''(r) on the radial line, F'(r)/r transversally.

    ``unit`` is the batch of unit vectors z/|z|; callers handle r = 0.
    """
    eye = np.eye(unit.shape[-1])
    proj = unit[..., :, None] * unit[..., None, :]
    return (radial_second[..., None, None] * proj
            + radial_slope[..., None, None] * (eye - proj))


def _shifted_power_terms(z, center, p):
    """Value, gradient and Hessian of |z - center|^p (no 1/p factor)."""
    w = z - center
    r = _norm(w)
    rs = np.maximum(r, _SAFE_MIN)
    unit = w / rs[..., None]
    val = r ** p
    grad = p * rs[..., None] ** (p - 2.0) * w
    with np.errstate(divide="ignore", over="ignore"):
        second = p * (p - 1.0) * rs ** (p - 2.0)
        slope = p * rs ** (p - 2.0)
    hess = _radial_hessian(r, second, slope, unit)
    return val, grad, hess


def power(p: float, dim: int = 2, center=None) -> Integrand:
    _check_p(p)
    c = np.zeros(dim) if center is None else np.asarray(center, float)

    def value(z):
        return _norm(z - c) ** p / p

    def gradient(z):
        w = z - c
        r = np.maximum(_norm(w), _SAFE_MIN)
        return r[..., None] ** (p - 2.0) * w

    def hessian(z):
        w = z - c
        r = _norm(w)
        rs = np.maximum(r, _SAFE_MIN)
        unit = w / rs[..., None]
        with np.errstate(divide="ignore", over="ignore"):
            second = (p - 1.0) * rs ** (p - 2.0)
            slope = rs ** (p - 2.0)
        return _radial_hessian(r, second, slope, unit)

    return Integrand(
        name=f"power[p={p:g}]", dim=dim,
        value_fn=value, gradient_fn=gradient, hessian_fn=hessian,
        declared_K=_power_K(p), minimizer=c,
        singular_points=(tuple(c),) if p != 2.0 else (),
        params={"p": p, "center": list(np.asarray(c, float))},
    )


def two_center(p: float, z0, dim: int = 2) -> Integrand:
    _check_p(p)
    z0 = np.asarray(z0, float)
    if z0.shape != (dim,):
        raise InputError(f"z0 must have shape ({dim},)")

    def value(z):
        return _norm(z - z0) ** p + _norm(z + z0) ** p

    def gradient(z):
        out = 0.0
        for c in (z0, -z0):
            w = z - c
            r = np.maximum(_norm(w), _SAFE_MIN)
            out = out + p * r[..., None] ** (p - 2.0) * w
        return out

    def hessian(z):
        _, _, h1 = _shifted_power_terms(z, z0, p)
        _, _, h2 = _shifted_power_terms(z, -z0, p)
        return h1 + h2

    singular = (tuple(z0), tuple(-z0)) if p != 2.0 else ()
    return Integrand(
        name=f"two_center[p={p:g}]", dim=dim,
        value_fn=value, gradient_fn=gradient, hessian_fn=hessian,
        declared_K=_power_K(p), minimizer=np.zeros(dim),
        singular_points=singular,
        params={"p": p, "z0": list(z0)},
    )


def mixed(p: float, q: float, dim: int = 2) -> Integrand:
    """|z|^p/p + |z_1|^q/q.  Globally of (p, q)-growth but not ratio-bounded."""
    _check_p(p)
    _check_p(q)

    def value(z):
        return _norm(z) ** p / p + np.abs(z[..., 0]) ** q / q

    def gradient(z):
        r = np.maximum(_norm(z), _SAFE_MIN)
        out = r[..., None] ** (p - 2.0) * z
        extra = np.zeros_like(out)
        extra[..., 0] = np.abs(z[..., 0]) ** (q - 2.0) * z[..., 0]
        return out + extra

    def hessian(z):
        r = _norm(z)
        rs = np.maximum(r, _SAFE_MIN)
        unit = z / rs[..., None]
        with np.errstate(divide="ignore", over="ignore"):
            second = (p - 1.0) * rs ** (p - 2.0)
            slope = rs ** (p - 2.0)
        h = _radial_hessian(r, second, slope, unit)
        h = h.copy()
        h[..., 0, 0] += (q - 1.0) * np.abs(z[..., 0]) ** (q - 2.0)
        return h

    return Integrand(
        name=f"mixed[p={p:g},q={q:g}]", dim=dim,
        value_fn=value, gradient_fn=gradient, hessian_fn=hessian,
        declared_K=None, minimizer=np.zeros(dim),
        singular_points=((0.0,) * dim,),
        params={"p": p, "q": q},
    )


def uhlenbeck(profile: UhlenbeckProfile, dim: int = 2) -> Integrand:
    """F(z) = int_0^{|z|} t a(t) dt; requires an admissible profile."""
    i_a, s_a = profile.indices()
    if i_a <= -1.0:
        raise InputError(f"profile {profile.name} inadmissible (i_a = {i_a:.4f})")
    if profile.primitive is None:
        raise InputError("profile must carry a primitive of t a(t) for F evaluation")

    def value(z):
        return profile.primitive(_norm(z))

    def gradient(z):
        r = np.maximum(_norm(z), _SAFE_MIN)
        return profile.a(r)[..., None] * z

    def hessian(z):
        r = _norm(z)
        rs = np.maximum(r, _SAFE_MIN)
        unit = z / rs[..., None]
        with np.errstate(divide="ignore", over="ignore"):
            a = profile.a(rs)
            second = a + rs * profile.da(rs)
        return _radial_hessian(r, second, a, unit)

    singular = ((0.0,) * dim,) if (i_a, s_a) != (0.0, 0.0) else ()
    return Integrand(
        name=f"uhlenbeck[{profile.name}]", dim=dim,
        value_fn=value, gradient_fn=gradient, hessian_fn=hessian,
        declared_K=indices_to_K(i_a, s_a), minimizer=np.zeros(dim),
        singular_points=singular,
        params={"profile": profile.name.split("[", 1)[0], **(profile.params or {})},
    )


def gh(p: float, matrix, dim: int = 2) -> Integrand:
    """G(H(z)) with G(t) = t^p/p and H the gauge |B z|.

    The ratio bound cond(B)^2 * max{p-1, 1/(p-1)} is declared (an upper
    bound, not necessarily attained).
    """
    _check_p(p)
    b = np.asarray(matrix, float)
    if b.shape != (dim, dim):
        raise InputError(f"matrix must have shape ({dim},{dim})")
    sv = np.linalg.svd(b, compute_uv=False)
    if sv[-1] <= 0:
        raise InputError("matrix must be invertible")
    cond2 = (sv[0] / sv[-1]) ** 2

    def value(z):
        return _norm(z @ b.T) ** p / p

    def gradient(z):
        w = z @ b.T
        r = np.maximum(_norm(w), _SAFE_MIN)
        return (r[..., None] ** (p - 2.0) * w) @ b

    def hessian(z):
        w = z @ b.T
        r = _norm(w)
        rs = np.maximum(r, _SAFE_MIN)
        unit = w / rs[..., None]
        with np.errstate(divide="ignore", over="ignore"):
            second = (p - 1.0) * rs ** (p - 2.0)
            slope = rs ** (p - 2.0)
        hw = _radial_hessian(r, second, slope, unit)
        return np.einsum("ji,...jk,kl->...il", b, hw, b)

    return Integrand(
        name=f"gh[p={p:g}]", dim=dim,
        value_fn=value, gradient_fn=gradient, hessian_fn=hessian,
        declared_K=cond2 * _power_K(p), minimizer=np.zeros(dim),
        singular_points=((0.0,) * dim,) if p != 2.0 else (),
        params={"p": p, "matrix": [list(row) for row in b]},
    )


def cantor(level: int = 12, dim: int = 2) -> Integrand:
    """|z|^2/2 + H_L(|z|), strictly convex with kinked second derivative.

    At level L the radial second derivative is 1 + h_L'(t) in {1, 1+(3/2)^L}
    and the transversal eigenvalue is 1 + h_L(t)/t, so the eigenvalue ratio
    is bounded by 1 + (3/2)^L on all of R^N; the bound degrades to infinity
    as L grows, which is the point of the example.
    """
    profile = CantorProfile(level)

    def value(z):
        r = _norm(z)
        return 0.5 * r * r + profile.H(r)

    def gradient(z):
        r = np.maximum(_norm(z), _SAFE_MIN)
        scalar = r + profile.h(r)
        return (scalar / r)[..., None] * z

    def hessian(z):
        r = _norm(z)
        rs = np.maximum(r, _SAFE_MIN)
        unit = z / rs[..., None]
        second = 1.0 + profile.h_prime(rs)
        slope = (rs + profile.h(rs)) / rs
        return _radial_hessian(r, second, slope, unit)

    return Integrand(
        name=f"cantor[L={level}]", dim=dim,
        value_fn=value, gradient_fn=gradient, hessian_fn=hessian,
        declared_K=1.0 + 1.5 ** level, minimizer=np.zeros(dim),
        singular_points=((0.0,) * dim,),
        params={"level": level},
    )


def orthotropic(p: float, dim: int = 2) -> Integrand:
    """sum_i |z_i|^p: the control case whose eigenvalue ratio diverges."""
    _check_p(p)

    def value(z):
        return np.sum(np.abs(z) ** p, axis=-1)

    def gradient(z):
        return p * np.abs(z) ** (p - 2.0) * z

    def hessian(z):
        with np.errstate(divide="ignore", over="ignore"):
            diag = p * (p - 1.0) * np.abs(z) ** (p - 2.0)
        out = np.zeros(z.shape + (z.shape[-1],))
        idx = np.arange(z.shape[-1])
        out[..., idx, idx] = diag
        return out

    return Integrand(
        name=f"orthotropic[p={p:g}]", dim=dim,
        value_fn=value, gradient_fn=gradient, hessian_fn=hessian,
        declared_K=None if p != 2.0 else 1.0, minimizer=np.zeros(dim),
        singular_points=(),
        params={"p": p},
    )


_PROFILES = {
    "power": lambda params: power_profile(params["p"]),
    "constant": lambda params: constant_profile(),
    "bounded_power": lambda params: bounded_power_profile(params["p"]),
}


def gallery(name: str, **params) -> Integrand:
    """Factory for the named integrands; see the module docstring.

    Unknown names and leftover parameters are rejected (fail-closed).
    """
    dim = int(params.pop("dim", 2))
    try:
        if name == "power":
            out = power(params.pop("p"), dim=dim, center=params.pop("center", None))
        elif name == "two_center":
            out = two_center(params.pop("p"), params.pop("z0"), dim=dim)
        elif name == "mixed":
            out = mixed(params.pop("p"), params.pop("q"), dim=dim)
        elif name == "uhlenbeck":
            prof_name = params.pop("profile", "power")
            maker = _PROFILES.get(prof_name)
            if maker is None:
                raise InputError(f"unknown profile {prof_name!r}")
            out = uhlenbeck(maker(params), dim=dim)
            params = {}
        elif name == "gh":
            out = gh(params.pop("p"), params.pop("matrix"), dim=dim)
        elif name == "cantor":
            out = cantor(int(params.pop("level", 12)), dim=dim)
        elif name == "orthotropic":
            out = orthotropic(params.pop("p"), dim=dim)
        else:
            raise InputError(f"unknown gallery integrand {name!r}")
    except KeyError as exc:
        raise InputError(f"gallery({name!r}) is missing parameter {exc}") from None
    if params:
        raise InputError(f"gallery({name!r}) got unknown parameters {sorted(params)}")
    return out


def integrand_to_config(f: Integrand) -> dict:
    """JSON-serializable descriptor {name, dim, params} of a gallery integrand."""
    base = f.name.split("[", 1)[0]
    return {"name": base, "dim": f.dim, "params": dict(f.params)}


def integrand_from_config(cfg: dict) -> Integrand:
    extra = set(cfg) - {"name", "dim", "params"}
    if extra:
        raise InputError(f"unknown integrand config keys {sorted(extra)}")
    if "name" not in cfg:
        raise InputError("integrand config requires a 'name'")
    kwargs = dict(cfg.get("params", {}))
    kwargs["dim"] = int(cfg.get("dim", 2))
    return gallery(cfg["name"], **kwargs)
