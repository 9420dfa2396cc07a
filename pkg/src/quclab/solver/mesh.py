"""Simplicial discretization of the box [-L, L]^N on a uniform node grid.

Each grid cell is split into N! Kuhn simplices (2 triangles per square,
6 tetrahedra per cube), on which the potential is affine and its gradient
constant.  The discrete energy sum_s vol F(Dw|_s) + sum_i w_i f_i w_i is
then convex whenever F is, with a unique minimizer under Dirichlet data,
and for F = |z|^2/2 its Euler-Lagrange system is exactly the classical
(2N+1)-point Laplacian, e.g. the 5-point scheme in 2-D.

Gradients are evaluated per simplex for assembly; cell-centered gradients
(the per-cell average, which in 2-D equals the bilinear mid-cell gradient)
feed the stress-field reports.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations
from math import factorial

import numpy as np
from scipy import sparse

from ..errors import InputError


@dataclass(frozen=True)
class BoxMesh:
    dim: int
    cells: int          # cells per axis
    half_width: float

    _vertex_ids: list = field(repr=False, default=None, compare=False)
    _gmats: list = field(repr=False, default=None, compare=False)
    _boundary: np.ndarray = field(repr=False, default=None, compare=False)
    _node_weights: np.ndarray = field(repr=False, default=None, compare=False)

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise InputError("mesh dimension must be 2 or 3")
        if self.cells < 4:
            raise InputError("need at least 4 cells per axis")
        n, d, h = self.cells, self.dim, self.h
        shape = (n + 1,) * d
        strides = np.array([(n + 1) ** (d - 1 - ax) for ax in range(d)])
        cell_idx = np.indices((n,) * d).reshape(d, -1)
        base = (strides[:, None] * cell_idx).sum(axis=0)

        vertex_ids = []
        gmats = []
        for perm in permutations(range(d)):
            ids = np.empty((d + 1, base.size), dtype=np.int64)
            ids[0] = base
            acc = base.copy()
            for k, axis in enumerate(perm):
                acc = acc + strides[axis]
                ids[k + 1] = acc
            vertex_ids.append(ids)
            g = np.zeros((d, d + 1))
            for k, axis in enumerate(perm):
                g[axis, k + 1] = 1.0 / h
                g[axis, k] = -1.0 / h
            gmats.append(g)

        node_idx = np.indices(shape).reshape(d, -1)
        boundary = np.any((node_idx == 0) | (node_idx == n), axis=0)

        w = np.ones(node_idx.shape[1])
        for ax in range(d):
            w *= np.where((node_idx[ax] == 0) | (node_idx[ax] == n), 0.5, 1.0)
        w *= h ** d

        object.__setattr__(self, "_vertex_ids", vertex_ids)
        object.__setattr__(self, "_gmats", gmats)
        object.__setattr__(self, "_boundary", boundary)
        object.__setattr__(self, "_node_weights", w)

    # -- geometry ------------------------------------------------------------

    @property
    def h(self) -> float:
        return 2.0 * self.half_width / self.cells

    @property
    def n_nodes(self) -> int:
        return (self.cells + 1) ** self.dim

    @property
    def n_cells(self) -> int:
        return self.cells ** self.dim

    @property
    def n_simplices(self) -> int:
        return self.n_cells * factorial(self.dim)

    @property
    def simplex_volume(self) -> float:
        return self.h ** self.dim / factorial(self.dim)

    @property
    def boundary_mask(self) -> np.ndarray:
        return self._boundary

    @property
    def interior_mask(self) -> np.ndarray:
        return ~self._boundary

    @property
    def node_weights(self) -> np.ndarray:
        """Trapezoidal quadrature weights for nodal integrals."""
        return self._node_weights

    def node_coords(self) -> np.ndarray:
        n, d = self.cells, self.dim
        axis = -self.half_width + np.arange(n + 1) * self.h
        grids = np.meshgrid(*([axis] * d), indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)

    def cell_centers(self) -> np.ndarray:
        n, d = self.cells, self.dim
        axis = -self.half_width + (np.arange(n) + 0.5) * self.h
        grids = np.meshgrid(*([axis] * d), indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)

    def simplex_centroids(self) -> np.ndarray:
        coords = self.node_coords()
        out = []
        for ids in self._vertex_ids:
            out.append(coords[ids].mean(axis=0))
        return np.concatenate(out, axis=0)

    # -- differential operators ----------------------------------------------

    def simplex_gradients(self, u: np.ndarray) -> np.ndarray:
        """Constant gradient per simplex, shape (n_simplices, dim)."""
        out = []
        for ids, g in zip(self._vertex_ids, self._gmats):
            out.append((g @ u[ids]).T)
        return np.concatenate(out, axis=0)

    def cell_mean_gradients(self, u: np.ndarray) -> np.ndarray:
        """Average simplex gradient per cell (= mid-cell bilinear gradient in 2-D)."""
        g = self.simplex_gradients(u)
        nperm = factorial(self.dim)
        return g.reshape(nperm, self.n_cells, self.dim).mean(axis=0)

    # -- assembly --------------------------------------------------------------

    def scatter_gradient(self, df: np.ndarray) -> np.ndarray:
        """Nodal gradient of sum_s vol F(Dw|_s) given DF at simplex gradients."""
        vol = self.simplex_volume
        out = np.zeros(self.n_nodes)
        nperm = factorial(self.dim)
        per_perm = df.reshape(nperm, self.n_cells, self.dim)
        for ids, g, dfp in zip(self._vertex_ids, self._gmats, per_perm):
            contrib = vol * dfp @ g  # (cells, dim+1)
            for a in range(self.dim + 1):
                np.add.at(out, ids[a], contrib[:, a])
        return out

    def assemble_hessian(self, d2f: np.ndarray) -> sparse.csr_matrix:
        """Sparse Hessian of the gradient energy given D2F per simplex."""
        vol = self.simplex_volume
        nperm = factorial(self.dim)
        d = self.dim
        per_perm = d2f.reshape(nperm, self.n_cells, d, d)
        rows, cols, vals = [], [], []
        for ids, g, blk in zip(self._vertex_ids, self._gmats, per_perm):
            local = vol * np.einsum("ia,sij,jb->sab", g, blk, g)
            for a in range(d + 1):
                for b in range(d + 1):
                    rows.append(ids[a])
                    cols.append(ids[b])
                    vals.append(local[:, a, b])
        rows = np.concatenate(rows)
        cols = np.concatenate(cols)
        vals = np.concatenate(vals)
        n = self.n_nodes
        return sparse.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
