"""Periodic FFT engine: Riesz transforms, div-curl machinery, L^m norms.

Fields live on the 2 pi torus in dimension 2 or 3, where integration by
parts is exact and differentiation is a Fourier multiplier.  The torus
stands in for compactly supported fields on R^N; the cutoff identity check
covers the localization terms.  The zero Fourier mode is annihilated by the
Riesz convention and all div-curl data is required to be mean-free.

Conventions: (DV)_{k h} = d_h V_k and (curl V)_{k j} = d_j V_k - d_k V_j,
so curl V = DV - DV^t.  Matrix norms are Frobenius norms; skew fields store
the N(N-1)/2 independent upper-triangle components.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError

PERIOD = 2.0 * np.pi


def skew_pairs(dim: int) -> list[tuple[int, int]]:
    return [(k, j) for k in range(dim) for j in range(k + 1, dim)]


@dataclass(frozen=True)
class PeriodicGrid:
    """Uniform tensor grid on [0, 2pi)^dim with a power-of-two resolution."""

    dim: int
    n: int

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise InputError("field dimension must be 2 or 3")
        if self.n < 8 or (self.n & (self.n - 1)) != 0:
            raise InputError("points per axis must be a power of two, >= 8")

    @property
    def h(self) -> float:
        return PERIOD / self.n

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.dim

    @property
    def cell_volume(self) -> float:
        return self.h ** self.dim

    def axes(self) -> list[np.ndarray]:
        return [np.arange(self.n) * self.h] * self.dim

    def mesh(self) -> list[np.ndarray]:
        return np.meshgrid(*self.axes(), indexing="ij")

    def wavenumbers(self) -> np.ndarray:
        """Integer frequencies, shape (dim, n, ..., n)."""
        k1 = np.fft.fftfreq(self.n, d=1.0 / self.n)
        grids = np.meshgrid(*([k1] * self.dim), indexing="ij")
        return np.stack(grids)


_NCOMP = {"scalar": lambda d: 1, "vector": lambda d: d,
          "skew": lambda d: d * (d - 1) // 2, "matrix": lambda d: d * d}


@dataclass
class SpectralField:
    """Field stored as Fourier coefficients, one block per component.

    ``coeffs`` has shape (ncomp, n, ..., n) even for scalars (ncomp = 1).
    Real-valuedness is maintained by construction from real grid data.
    """

    grid: PeriodicGrid
    kind: str
    coeffs: np.ndarray

    def __post_init__(self):
        if self.kind not in _NCOMP:
            raise InputError(f"unknown field kind {self.kind!r}")
        want = _NCOMP[self.kind](self.grid.dim)
        if self.coeffs.shape != (want,) + self.grid.shape:
            raise InputError(
                f"coefficient block for {self.kind} must have shape "
                f"{(want,) + self.grid.shape}, got {self.coeffs.shape}")

    @property
    def ncomp(self) -> int:
        return self.coeffs.shape[0]

    @classmethod
    def from_physical(cls, grid: PeriodicGrid, values: np.ndarray, kind: str) -> "SpectralField":
        values = np.asarray(values, dtype=float)
        if kind == "scalar" and values.shape == grid.shape:
            values = values[None]
        coeffs = np.fft.fftn(values, axes=tuple(range(1, grid.dim + 1)))
        return cls(grid=grid, kind=kind, coeffs=coeffs)

    def physical(self) -> np.ndarray:
        out = np.fft.ifftn(self.coeffs, axes=tuple(range(1, self.grid.dim + 1)))
        return np.real(out)

    def hermitian_error(self) -> float:
        """Departure from real-valuedness after inverse transform."""
        out = np.fft.ifftn(self.coeffs, axes=tuple(range(1, self.grid.dim + 1)))
        scale = np.max(np.abs(out)) or 1.0
        return float(np.max(np.abs(np.imag(out))) / scale)

    def mean_values(self) -> np.ndarray:
        return np.real(self.coeffs[(slice(None),) + (0,) * self.grid.dim]) / self.n_total

    @property
    def n_total(self) -> int:
        return self.grid.n ** self.grid.dim

    def mean_zero(self) -> "SpectralField":
        coeffs = self.coeffs.copy()
        coeffs[(slice(None),) + (0,) * self.grid.dim] = 0.0
        return SpectralField(self.grid, self.kind, coeffs)

    def scaled(self, factor: float) -> "SpectralField":
        return SpectralField(self.grid, self.kind, factor * self.coeffs)

    @classmethod
    def random_band_limited(cls, grid: PeriodicGrid, kind: str, kmax: int,
                            rng: np.random.Generator, mean_zero: bool = True,
                            amplitude: float = 1.0) -> "SpectralField":
        """White noise filtered to max_j |xi_j| <= kmax (well below Nyquist)."""
        if kmax < 1 or kmax > grid.n // 4:
            raise InputError("kmax must lie in [1, n/4] to keep products alias-free")
        ncomp = _NCOMP[kind](grid.dim)
        values = rng.standard_normal((ncomp,) + grid.shape)
        field = cls.from_physical(grid, values, kind)
        k = grid.wavenumbers()
        keep = np.all(np.abs(k) <= kmax, axis=0)
        coeffs = field.coeffs * keep[None]
        out = cls(grid, kind, coeffs)
        if mean_zero:
            out = out.mean_zero()
        phys = out.physical()
        scale = np.max(np.abs(phys)) or 1.0
        return cls(grid, kind, out.coeffs * (amplitude / scale))


def _riesz_symbol(grid: PeriodicGrid) -> np.ndarray:
    k = grid.wavenumbers()
    mag = np.sqrt(np.sum(k * k, axis=0))
    mag[(0,) * grid.dim] = 1.0  # zero mode handled by annihilation
    return k / mag


def riesz_apply(j: int, u: SpectralField) -> SpectralField:
    """Riesz transform R_j: Fourier multiplier -i xi_j / |xi| (zero mode -> 0)."""
    if u.kind != "scalar":
        raise InputError("riesz_apply acts on scalar fields")
    if not 0 <= j < u.grid.dim:
        raise InputError(f"axis {j} out of range")
    sym = _riesz_symbol(u.grid)[j]
    coeffs = -1j * sym[None] * u.coeffs
    coeffs[(slice(None),) + (0,) * u.grid.dim] = 0.0
    return SpectralField(u.grid, "scalar", coeffs)


def derivative(j: int, u: SpectralField) -> np.ndarray:
    """Coefficients of d_j applied componentwise (i xi_j multiplier)."""
    k = u.grid.wavenumbers()[j]
    return 1j * k[None] * u.coeffs


def gradient_tensor(v: SpectralField) -> SpectralField:
    """(DV)_{k h} = d_h V_k as a matrix field."""
    if v.kind != "vector":
        raise InputError("gradient_tensor acts on vector fields")
    d = v.grid.dim
    blocks = [derivative(h, v) for h in range(d)]  # each (d, *shape)
    coeffs = np.concatenate([np.stack([blocks[h][k] for h in range(d)])
                             for k in range(d)])
    return SpectralField(v.grid, "matrix", coeffs)


def divergence(v: SpectralField) -> SpectralField:
    if v.kind != "vector":
        raise InputError("divergence acts on vector fields")
    k = v.grid.wavenumbers()
    coeffs = np.sum(1j * k * v.coeffs, axis=0, keepdims=True)
    return SpectralField(v.grid, "scalar", coeffs)


def curl(v: SpectralField) -> SpectralField:
    """Skew field (curl V)_{k j} = d_j V_k - d_k V_j, upper-triangle storage."""
    if v.kind != "vector":
        raise InputError("curl acts on vector fields")
    k = v.grid.wavenumbers()
    comps = []
    for (a, b) in skew_pairs(v.grid.dim):
        comps.append(1j * (k[b] * v.coeffs[a] - k[a] * v.coeffs[b]))
    return SpectralField(v.grid, "skew", np.stack(comps))


def skew_to_matrix(g: SpectralField) -> np.ndarray:
    """Full antisymmetric coefficient array (d, d, *shape) from skew storage."""
    d = g.grid.dim
    out = np.zeros((d, d) + g.grid.shape, dtype=complex)
    for idx, (a, b) in enumerate(skew_pairs(d)):
        out[a, b] = g.coeffs[idx]
        out[b, a] = -g.coeffs[idx]
    return out


def matrix_physical(m: SpectralField) -> np.ndarray:
    """Physical (d, d, *shape) array of a matrix field."""
    if m.kind != "matrix":
        raise InputError("expected a matrix field")
    d = m.grid.dim
    return m.physical().reshape((d, d) + m.grid.shape)


def divcurl_reconstruct(f: SpectralField, g: SpectralField) -> SpectralField:
    """Gradient matrix of the mean-free solution of Div V = f, curl V = G.

    Component formula (Fourier side):
        (DV)_{k h} = xi_h xi_k / |xi|^2 f^ + sum_j xi_h xi_j / |xi|^2 G^_{k j},
    which realizes D_h V_k = -R_h R_k Div V - sum_j R_h R_j curl_{k j} V.
    """
    if f.kind != "scalar" or g.kind != "skew":
        raise InputError("divcurl_reconstruct takes (scalar, skew) data")
    if f.grid != g.grid:
        raise InputError("incompatible grids")
    grid = f.grid
    d = grid.dim
    k = grid.wavenumbers()
    mag2 = np.sum(k * k, axis=0)
    mag2[(0,) * d] = 1.0
    fz = f.coeffs[0]
    gfull = skew_to_matrix(g)
    blocks = []
    for kk in range(d):
        gdotk = np.sum(k * gfull[kk], axis=0)
        for hh in range(d):
            num = k[hh] * (k[kk] * fz + gdotk)
            blocks.append(num / mag2)
    coeffs = np.stack(blocks)
    coeffs[(slice(None),) + (0,) * d] = 0.0
    return SpectralField(grid, "matrix", coeffs)


# -- integral norms on the grid (midpoint rule; spectrally accurate) ----------

def lm_scalar_norm(values: np.ndarray, m: float, cell_volume: float) -> float:
    if m <= 0.0:
        raise InputError("m must be > 0")
    return float((np.sum(np.abs(values) ** m) * cell_volume) ** (1.0 / m))


def lm_vector_norm(values: np.ndarray, m: float, cell_volume: float) -> float:
    mag = np.sqrt(np.sum(values ** 2, axis=0))
    return lm_scalar_norm(mag, m, cell_volume)


def lm_matrix_norm(values: np.ndarray, m: float, cell_volume: float) -> float:
    """(int |M(x)|_F^m dx)^(1/m); for m in (0,1) this is only positively
    1-homogeneous, which is all the small-exponent diagnostics use."""
    if values.ndim < 3:
        raise InputError("expected a (d, d, grid...) matrix field")
    mag = np.sqrt(np.sum(values ** 2, axis=(0, 1)))
    return lm_scalar_norm(mag, m, cell_volume)


def mhat(m: float) -> float:
    if m <= 1.0:
        raise InputError("m must be > 1")
    return max(m, m / (m - 1.0))


@dataclass(frozen=True)
class IdentityReport:
    lhs: float
    rhs: float
    residual: float
    terms: dict


def divcurl_identity_residual(v: SpectralField) -> float:
    """Relative defect of  int |DV|^2 = 1/2 int |curl V|^2 + int (Div V)^2."""
    if v.kind != "vector":
        raise InputError("expected a vector field")
    vol = v.grid.cell_volume
    dv = matrix_physical(gradient_tensor(v))
    lhs = np.sum(dv * dv) * vol
    div = divergence(v).physical()[0]
    cg = curl(v).physical()
    curl_sq = 2.0 * np.sum(cg * cg) * vol  # both triangles of the skew matrix
    rhs = 0.5 * curl_sq + np.sum(div * div) * vol
    scale = max(lhs, 1e-300)
    return float(abs(lhs - rhs) / scale)


def cutoff_identity_check(v: SpectralField, cutoff) -> IdentityReport:
    """Localized identity with a C^2 cutoff phi supported inside the cell:

        int phi^2 |DV|^2 = 1/2 int phi^2 |curl V|^2 + int phi^2 (Div V)^2
                        + int [ 2 (D phi^2, V) Div V + (D^2 phi^2, V (x) V) ].

    The cutoff object must provide value/grad_sq/hess_sq with analytic
    derivatives; quadrature is the grid midpoint rule.
    """
    if v.kind != "vector":
        raise InputError("expected a vector field")
    grid = v.grid
    d = grid.dim
    pts = np.stack(grid.mesh(), axis=-1)
    phi = cutoff.value(pts)
    border = np.concatenate([
        phi[0].ravel(), phi[-1].ravel(),
        phi[:, 0].ravel(), phi[:, -1].ravel(),
    ]) if d == 2 else np.concatenate([
        phi[0].ravel(), phi[-1].ravel(), phi[:, 0].ravel(), phi[:, -1].ravel(),
        phi[:, :, 0].ravel(), phi[:, :, -1].ravel(),
    ])
    if np.max(np.abs(border)) > 1e-12:
        raise InputError("cutoff support touches the fundamental cell boundary")

    vol = grid.cell_volume
    vphys = v.physical()
    dv = matrix_physical(gradient_tensor(v))
    div = divergence(v).physical()[0]
    cg = curl(v).physical()

    phi2 = phi * phi
    t_grad = np.sum(phi2 * np.sum(dv * dv, axis=(0, 1))) * vol
    t_curl = 0.5 * np.sum(phi2 * 2.0 * np.sum(cg * cg, axis=0)) * vol
    t_div = np.sum(phi2 * div * div) * vol

    dphi2 = np.moveaxis(cutoff.grad_sq(pts), -1, 0)
    d2phi2 = np.moveaxis(cutoff.hess_sq(pts), (-2, -1), (0, 1))
    cross = 2.0 * np.sum(np.sum(dphi2 * vphys, axis=0) * div) * vol
    outer = vphys[None] * vphys[:, None]
    quadratic = np.sum(d2phi2 * outer) * vol
    t_comm = cross + quadratic

    lhs = t_grad
    rhs = t_curl + t_div + t_comm
    residual = abs(lhs - rhs) / max(abs(lhs), 1e-300)
    return IdentityReport(lhs=lhs, rhs=rhs, residual=float(residual),
                          terms={"grad": t_grad, "curl": t_curl, "div": t_div,
                                 "commutator": t_comm})


@dataclass(frozen=True)
class LmBoundReport:
    m: float
    lhs: float
    rhs: float
    holds: bool
    div_norm: float
    curl_norm: float


def verify_lm_bound(v: SpectralField, m: float) -> LmBoundReport:
    """Check  ||DV||_m <= N^2 (mhat - 1) (||Div V||_m + ||curl V||_m)."""
    if v.kind != "vector":
        raise InputError("expected a vector field")
    grid = v.grid
    vol = grid.cell_volume
    dv = matrix_physical(gradient_tensor(v))
    lhs = lm_matrix_norm(dv, m, vol)
    div_norm = lm_scalar_norm(divergence(v).physical()[0], m, vol)
    cg = curl(v).physical()
    curl_mag = np.sqrt(2.0 * np.sum(cg * cg, axis=0))
    curl_norm = lm_scalar_norm(curl_mag, m, vol)
    rhs = grid.dim ** 2 * (mhat(m) - 1.0) * (div_norm + curl_norm)
    return LmBoundReport(m=m, lhs=lhs, rhs=rhs, holds=bool(lhs <= rhs * (1.0 + 1e-12)),
                         div_norm=div_norm, curl_norm=curl_norm)


def write_grid_txt(path, field_values: np.ndarray, grid: PeriodicGrid) -> None:
    """Plain-text snapshot: one line per grid point, coordinates then values."""
    mesh = grid.mesh()
    cols = [m.ravel() for m in mesh]
    vals = field_values.reshape(-1, cols[0].size) if field_values.ndim > grid.dim \
        else field_values.reshape(1, -1)
    data = np.column_stack(cols + [v for v in vals])
    np.savetxt(path, data, fmt="%.17g")
