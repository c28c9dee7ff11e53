"""Constants and functionals of the blow-up / global-existence theorems."""
from dataclasses import dataclass, field

import numpy as np

from .errors import ExcludedExponent, HypothesisViolation, InsufficientData, InvalidRadius


@dataclass
class TimeSeries:
    times: np.ndarray
    values: np.ndarray
    name: str = ""

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.times.shape != self.values.shape:
            raise InsufficientData(f"{self.name}: times and values differ in length")
        if np.any(np.diff(self.times) <= 0):
            raise InsufficientData(f"{self.name}: times must be strictly increasing")

    def __len__(self):
        return self.times.size

    def finite_prefix(self):
        """The series truncated at its last finite sample."""
        bad = ~np.isfinite(self.values)
        if not bad.any():
            return self
        stop = int(np.argmax(bad))
        return TimeSeries(self.times[:stop], self.values[:stop], self.name)


@dataclass
class EnergyLedger:
    """M + trapezoidal time integral of an integrand series, updated every accepted step."""
    offset: float
    times: list = field(default_factory=list)
    integrand: list = field(default_factory=list)
    values: list = field(default_factory=list)

    def append(self, t, value):
        if self.times:
            if t <= self.times[-1]:
                raise InsufficientData("ledger times must increase")
            dt = t - self.times[-1]
            self.values.append(self.values[-1] + 0.5 * dt * (self.integrand[-1] + value))
        else:
            self.values.append(float(self.offset))
        self.times.append(float(t))
        self.integrand.append(float(value))
        return self.values[-1]

    def series(self, name="E"):
        return TimeSeries(np.array(self.times), np.array(self.values), name)


def poincare_constant(n1, p, R):
    """|N1 - p|^p / (p R)^p."""
    if not p > 1:
        raise ExcludedExponent(f"Poincare inequality needs p > 1, got {p}")
    if p == n1:
        raise ExcludedExponent(f"p = N1 = {n1} is excluded from the Poincare inequality")
    if not R > 0:
        raise InvalidRadius(f"R must be positive, got {R}")
    return abs(n1 - p) ** p / (p * R) ** p


def sigma_pme(p, m, alpha):
    if not alpha > m + 1:
        raise HypothesisViolation(f"alpha = {alpha} must exceed m+1 = {m + 1}")
    s = np.sqrt(p * m * alpha) / (m + 1) - 1
    if not s > 0:
        raise HypothesisViolation(f"sigma = {s} is not positive")
    return float(s)


def sigma_pp(alpha):
    if not alpha > 2:
        raise HypothesisViolation(f"alpha = {alpha} must exceed 2 for sigma > 0")
    return float(np.sqrt(alpha / 2) - 1)


def j_functional(grid, u, p, m, gamma, nl):
    """-1/(m+1) int |grad u^m|^p + int (F(u) - gamma), F the porous-medium antiderivative."""
    um = u if m == 1 else u ** m
    grad = grid.gradient_energy(um, p)
    return -grad / (m + 1) + grid.integrate(nl.F_pme(u, p, m) - gamma)


def f_functional_pp(grid, u, p, gamma, nl):
    """-1/p int |grad u|^p + int (F(u) - gamma), F the plain antiderivative."""
    return -grid.gradient_energy(u, p) / p + grid.integrate(nl.F_pp(u) - gamma)


def bigM_pme(J0, sigma, alpha, m, I0):
    if not J0 > 0:
        raise HypothesisViolation(f"J0 = {J0} must be positive")
    if not (sigma > 0 and I0 > 0):
        raise HypothesisViolation("sigma and the initial integral must be positive")
    return (1 + sigma) * (1 + 1 / sigma) * I0 ** 2 / (alpha * (m + 1) * J0)


def tstar_pme(M, sigma, I0):
    if not (sigma > 0 and I0 > 0):
        raise HypothesisViolation("sigma and the initial integral must be positive")
    return M / (sigma * I0)


def bigM_pp(F0, sigma, alpha, I0):
    if not F0 > 0:
        raise HypothesisViolation(f"F0 = {F0} must be positive")
    if not (sigma > 0 and I0 > 0):
        raise HypothesisViolation("sigma and the initial integral must be positive")
    return (1 + sigma) * (1 + 1 / sigma) * I0 ** 2 / (2 * alpha * F0)


tstar_pp = tstar_pme


def _end_weights(t, x, order):
    """Weights of the ``order``-th derivative at ``x`` of the polynomial interpolating at ``t``."""
    V = np.vander(t - x, t.size, increasing=True).T
    rhs = np.zeros(t.size)
    rhs[order] = float(np.prod(np.arange(1, order + 1)))
    return np.linalg.solve(V, rhs)


def _ends(out, t, v, order, k):
    # weights sum to zero, so apply them to differences (exact zero on constants)
    out[0] = _end_weights(t[:k], t[0], order)[1:] @ (v[1:k] - v[0])
    out[-1] = _end_weights(t[-k:], t[-1], order)[:-1] @ (v[-k:-1] - v[-1])


def derivative_series(s):
    """Second-order derivative estimate: centred inside, one-sided at the ends."""
    if len(s) < 3:
        raise InsufficientData(f"{s.name}: need at least 3 samples for a derivative")
    t, v = s.times, s.values
    hm, hp = t[1:-1] - t[:-2], t[2:] - t[1:-1]
    out = np.empty_like(v)
    out[1:-1] = (hm / (hp * (hm + hp)) * (v[2:] - v[1:-1])
                 + hp / (hm * (hm + hp)) * (v[1:-1] - v[:-2]))
    _ends(out, t, v, 1, 3)
    return TimeSeries(t, out, f"d{s.name}/dt")


def second_derivative_series(s):
    """Three-point second difference inside (exact on quadratics), cubic fit at the ends."""
    if len(s) < 4:
        raise InsufficientData(f"{s.name}: need at least 4 samples for a second derivative")
    t, v = s.times, s.values
    hm, hp = t[1:-1] - t[:-2], t[2:] - t[1:-1]
    out = np.empty_like(v)
    out[1:-1] = 2.0 * ((v[2:] - v[1:-1]) / hp - (v[1:-1] - v[:-2]) / hm) / (hm + hp)
    _ends(out, t, v, 2, 4)
    return TimeSeries(t, out, f"d2{s.name}/dt2")


def concavity_profile(E, sigma):
    """Samples of E''E - (1+sigma)(E')^2 and of E''E."""
    if len(E) < 5:
        raise InsufficientData(f"{E.name}: concavity check needs at least 5 samples")
    d1 = derivative_series(E)
    d2 = second_derivative_series(E)
    return d2.values * E.values - (1 + sigma) * d1.values ** 2, d2.values * E.values


def concavity_margin(E, sigma):
    return float(np.min(concavity_profile(E, sigma)[0]))
