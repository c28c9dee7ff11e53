"""Stratified Lie groups in the explicit first-order coordinate form.

A group is stored through its strata dimensions and the polynomial
coefficients of the left-invariant horizontal fields

    X_k = d/dx'_k + sum_{l>=2} sum_m a_{k,m}^{(l)}(x', ..., x^{(l-1)}) d/dx_m^{(l)}

Coordinates are indexed globally, 0-based, stratum after stratum. Horizontal
field indices ``k`` are 0-based as well.
"""
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import InvalidDimension, InvalidGroup, InvalidIndex, InvalidScale

# (coefficient, exponent vector over all n coordinates)
Monomial = tuple[float, tuple[int, ...]]


@dataclass(frozen=True)
class StratifiedGroup:
    strata_dims: tuple[int, ...]
    coeffs: dict = field(default_factory=dict)  # (k, j) -> tuple[Monomial, ...]
    name: str = "custom"
    check_rank: bool = False

    def __post_init__(self):
        dims = tuple(int(d) for d in self.strata_dims)
        if not dims or any(d < 1 for d in dims):
            raise InvalidDimension(f"strata dimensions must be positive, got {self.strata_dims}")
        object.__setattr__(self, "strata_dims", dims)
        clean = {}
        for (k, j), monos in self.coeffs.items():
            if not 0 <= k < self.n1:
                raise InvalidGroup(f"horizontal index {k} out of range 0..{self.n1 - 1}")
            if not self.n1 <= j < self.n:
                raise InvalidGroup(f"coefficient target {j} must be a coordinate of stratum >= 2")
            level = self.stratum_of(j)
            first_forbidden = self.offsets[level]
            monos = tuple((float(c), tuple(int(e) for e in exps)) for c, exps in monos)
            for c, exps in monos:
                if len(exps) != self.n:
                    raise InvalidGroup(f"monomial exponent vector must have length {self.n}")
                if any(e < 0 for e in exps):
                    raise InvalidGroup("negative exponent in monomial")
                if any(exps[first_forbidden:]):
                    raise InvalidGroup(
                        f"a[{k},{j}] depends on coordinates of stratum >= {level + 1}")
            monos = tuple(mo for mo in monos if mo[0] != 0.0)
            if monos:
                clean[(k, j)] = monos
        object.__setattr__(self, "coeffs", clean)
        if self.check_rank and not self._bracket_generating():
            raise InvalidGroup(f"{self.name}: horizontal fields do not generate the Lie algebra")

    @property
    def n(self):
        return sum(self.strata_dims)

    @property
    def n1(self):
        return self.strata_dims[0]

    @property
    def step(self):
        return len(self.strata_dims)

    @property
    def offsets(self):
        """Start index of each stratum, plus n at the end."""
        return tuple(np.concatenate([[0], np.cumsum(self.strata_dims)]).tolist())

    @property
    def weights(self):
        """Dilation weight (stratum number) of each coordinate."""
        return np.repeat(np.arange(1, self.step + 1), self.strata_dims)

    def stratum_of(self, j):
        """0-based stratum containing coordinate ``j``."""
        return int(np.searchsorted(self.offsets, j, side="right") - 1)

    def _bracket_generating(self):
        if self.step == 1:
            return True
        if self.step > 2:
            return True  # only step <= 2 is checked
        lo, hi = self.offsets[1], self.offsets[2]
        rows = []
        for a, b in combinations(range(self.n1), 2):
            vec = []
            for m in range(lo, hi):
                da = _d_dx(self.coeffs.get((b, m), ()), a)
                db = _d_dx(self.coeffs.get((a, m), ()), b)
                vec.append(_eval_monos(da, np.zeros(self.n)) - _eval_monos(db, np.zeros(self.n)))
            rows.append(vec)
        if not rows:
            return False
        return np.linalg.matrix_rank(np.array(rows, dtype=float)) == hi - lo

    def coefficient(self, k, j, coords):
        """Evaluate the coefficient of d/dx_j in X_k at points ``coords`` (shape (n, ...))."""
        coords = np.asarray(coords, dtype=float)
        if j < self.n1:
            return np.full(coords.shape[1:], 1.0 if j == k else 0.0)
        return _eval_monos(self.coeffs.get((k, j), ()), coords)

    def active_pairs(self):
        """(k, j) pairs with a non-zero coefficient, stratum-1 diagonal first."""
        pairs = [(k, k) for k in range(self.n1)]
        pairs += sorted(self.coeffs)
        return pairs


def _eval_monos(monos, coords):
    coords = np.asarray(coords, dtype=float)
    out = np.zeros(coords.shape[1:])
    for c, exps in monos:
        term = np.full(coords.shape[1:], c)
        for i, e in enumerate(exps):
            if e:
                term = term * coords[i] ** e
        out = out + term
    return out


def _d_dx(monos, i):
    out = []
    for c, exps in monos:
        if exps[i]:
            e = list(exps)
            e[i] -= 1
            out.append((c * exps[i], tuple(e)))
    return tuple(out)


def make_euclidean(n):
    if n < 1:
        raise InvalidDimension(f"Euclidean dimension must be >= 1, got {n}")
    return StratifiedGroup((n,), {}, name=f"euclidean:{n}", check_rank=True)


def make_heisenberg(d):
    """Heisenberg group H^d with X_i = dx_i - (y_i/2) dz, X_{d+i} = dy_i + (x_i/2) dz."""
    if d < 1:
        raise InvalidDimension(f"Heisenberg order must be >= 1, got {d}")
    n = 2 * d + 1
    z = 2 * d
    coeffs = {}
    for i in range(d):
        ey = [0] * n
        ey[d + i] = 1
        ex = [0] * n
        ex[i] = 1
        coeffs[(i, z)] = ((-0.5, tuple(ey)),)
        coeffs[(d + i, z)] = ((0.5, tuple(ex)),)
    return StratifiedGroup((2 * d, 1), coeffs, name=f"heisenberg:{d}", check_rank=True)


def _check_point(g, x):
    x = np.asarray(x, dtype=float)
    if x.shape[0] != g.n:
        raise InvalidDimension(f"point has {x.shape[0]} coordinates, group needs {g.n}")
    return x


def dilate(g, lam, x):
    if not lam > 0:
        raise InvalidScale(f"dilation factor must be positive, got {lam}")
    x = _check_point(g, x)
    scale = float(lam) ** g.weights
    return x * scale.reshape((-1,) + (1,) * (x.ndim - 1))


def coeff_vector(g, k, x):
    """Vector c with X_k u(x) = sum_j c_j du/dx_j(x)."""
    if not 0 <= k < g.n1:
        raise InvalidIndex(f"horizontal index {k} out of range 0..{g.n1 - 1}")
    x = _check_point(g, x)
    return np.array([float(g.coefficient(k, j, x.reshape(-1, 1))[0]) for j in range(g.n)])


def homogeneous_dimension(g):
    return int(sum((l + 1) * d for l, d in enumerate(g.strata_dims)))
