"""Box grids, horizontal gradient/divergence and the p-sub-Laplacian.

Scalar fields are numpy arrays of shape ``grid.shape``. The discrete
horizontal gradient keeps both one-sided families (see ``_kernels_py``); the
gradient density is their average, e.g. ``|grad u|^p := (|X^+ u|^p + |X^- u|^p) / 2``.
With that choice ``-grad^T grad`` is the compact (3-point per axis)
sub-Laplacian, and the divergence is the exact negative transpose of the
gradient.
"""
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import InvalidDimension, InvalidExponent, InvalidField, UnsupportedExponent

DEFAULT_EPS = 1e-12


@dataclass
class HVectorField:
    """Horizontal vector field on a grid.

    ``values`` holds the nodal (central) components, shape ``(N1, *grid.shape)``,
    zero on boundary nodes. ``pair`` holds the one-sided families, shape
    ``(2, N1, nnodes)``, or None for fields given only nodally.
    """
    grid: "Grid"
    values: np.ndarray
    pair: np.ndarray = None

    def __post_init__(self):
        if self.values.shape[0] != self.grid.group.n1:
            raise InvalidField(
                f"field has {self.values.shape[0]} components, group has N1={self.grid.group.n1}")

    @classmethod
    def from_nodal(cls, grid, values):
        values = np.asarray(values, dtype=float).reshape((-1,) + grid.shape)
        return cls(grid, values, None)

    def families(self):
        if self.pair is not None:
            return self.pair
        flat = self.values.reshape(self.values.shape[0], -1)
        return np.stack([flat, flat])


class Grid:
    """Tensor grid on the box prod_i [a_i, b_i] carrying a stratified group."""

    def __init__(self, group, ranges, nodes):
        ranges = [tuple(map(float, r)) for r in ranges]
        nodes = [int(n) for n in nodes]
        if len(ranges) != group.n or len(nodes) != group.n:
            raise InvalidDimension(
                f"group has {group.n} coordinates; got {len(ranges)} ranges and {len(nodes)} node counts")
        for (a, b), n in zip(ranges, nodes):
            if not b > a:
                raise InvalidDimension(f"empty axis range ({a}, {b})")
            if n < 3:
                raise InvalidDimension(f"every axis needs at least 3 nodes, got {n}")
        self.group = group
        self.ranges = tuple(ranges)
        self.shape = tuple(nodes)
        self.size = int(np.prod(nodes))
        self.axes = [np.linspace(a, b, n) for (a, b), n in zip(ranges, nodes)]
        self.h = np.array([(b - a) / (n - 1) for (a, b), n in zip(ranges, nodes)])
        self.cell_volume = float(np.prod(self.h))
        self.coords = np.array(np.meshgrid(*self.axes, indexing="ij"))

        interior = np.ones(self.shape, dtype=bool)
        trap = np.full(self.shape, self.cell_volume)
        for ax in range(len(nodes)):
            edge = [slice(None)] * len(nodes)
            for end in (0, -1):
                edge[ax] = end
                interior[tuple(edge)] = False
                trap[tuple(edge)] *= 0.5
            edge[ax] = slice(None)
        self.interior = interior
        self.trap_weights = trap

        pairs = group.active_pairs()
        self._pk = np.array([k for k, _ in pairs], dtype=np.intp)
        self._pj = np.array([j for _, j in pairs], dtype=np.intp)
        self._coef = np.ascontiguousarray(
            np.array([group.coefficient(k, j, self.coords).reshape(-1) for k, j in pairs]))

    @property
    def h_min(self):
        return float(self.h.min())

    @property
    def volume(self):
        return float(np.prod([b - a for a, b in self.ranges]))

    def sample(self, func):
        """Evaluate ``func(*coords)`` on the nodes."""
        return np.asarray(func(*self.coords), dtype=float) * np.ones(self.shape)

    def zero_boundary(self, u):
        u = np.array(u, dtype=float).reshape(self.shape)
        u[~self.interior] = 0.0
        return u

    # -- stencil level -------------------------------------------------
    def grad_pair(self, u):
        """One-sided families of the horizontal gradient, shape (2, N1, nnodes)."""
        u = np.asarray(u, dtype=float).reshape(-1)
        return kernels.gradient_pair(u, self._pk, self._pj, self._coef,
                                     self.shape, self.h, self.group.n1)

    def grad_pair_T(self, v):
        """sum_fam sum_k (X_k^fam)^T v[fam, k] as a flat array."""
        return kernels.gradient_pair_T(v, self._pk, self._pj, self._coef, self.shape, self.h)

    def pair_divergence(self, v):
        """-(1/2) sum (X^fam)^T v restricted to interior nodes."""
        out = -0.5 * self.grad_pair_T(v).reshape(self.shape)
        out[~self.interior] = 0.0
        return out

    @staticmethod
    def pair_norm_sq(g):
        """|X^fam u|^2 per family and node, shape (2, nnodes)."""
        return np.einsum("fkn,fkn->fn", g, g)

    def pair_weights(self, g, p, eps=DEFAULT_EPS):
        if p == 2:
            return np.ones((2, g.shape[2]))
        return (self.pair_norm_sq(g) + eps * eps) ** ((p - 2) / 2)

    def pair_energy(self, g, p):
        """Integral of the gradient density |grad u|^p from a precomputed pair."""
        s = self.pair_norm_sq(g)
        dens = s if p == 2 else s ** (p / 2)
        return 0.5 * self.cell_volume * float(dens.sum())

    # -- field level -----------------------------------------------------
    def gradient(self, u):
        g = self.grad_pair(u)
        central = 0.5 * (g[0] + g[1]).reshape((self.group.n1,) + self.shape)
        central[:, ~self.interior] = 0.0
        return HVectorField(self, central, g)

    def divergence(self, v):
        if v.grid is not self and v.grid.shape != self.shape:
            raise InvalidField("vector field belongs to a different grid")
        if v.values.shape[0] != self.group.n1:
            raise InvalidField("component count does not match N1")
        return self.pair_divergence(v.families())

    def p_sub_laplacian(self, u, p, eps=DEFAULT_EPS):
        if p < 2:
            raise UnsupportedExponent(f"p-sub-Laplacian needs p >= 2, got {p}")
        g = self.grad_pair(u)
        w = self.pair_weights(g, p, eps)
        return self.pair_divergence(g * w[:, None, :])

    def gradient_energy(self, u, p):
        return self.pair_energy(self.grad_pair(u), p)

    def integrate(self, u):
        return float(np.sum(np.asarray(u, dtype=float).reshape(self.shape) * self.trap_weights))

    def dot(self, a, b):
        """Uniform-weight inner product; equals ``integrate(a*b)`` when a or b vanishes on the boundary."""
        return self.cell_volume * float(np.vdot(np.ravel(a), np.ravel(b)))

    def lp_norm(self, u, p):
        if p < 1:
            raise InvalidExponent(f"L^p norm needs p >= 1, got {p}")
        return self.integrate(np.abs(u) ** p) ** (1.0 / p)

    @staticmethod
    def sup_norm(u):
        return float(np.max(np.abs(u)))

    def sup_x_prime(self):
        first = self.coords[: self.group.n1]
        return float(np.sqrt((first ** 2).sum(axis=0)).max())


def horizontal_gradient(grid, u):
    return grid.gradient(u)


def horizontal_divergence(v):
    return v.grid.divergence(v)


def p_sub_laplacian(grid, u, p, eps=DEFAULT_EPS):
    return grid.p_sub_laplacian(u, p, eps)
