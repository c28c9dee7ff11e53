"""Reaction terms f, their antiderivatives, and the (alpha, beta, gamma) condition checker."""
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import integrate, special

from .errors import DomainError, InvalidExponent, NumericFailure

PME_BLOWUP = "PME_BLOWUP"
PME_GLOBAL = "PME_GLOBAL"
PP_BLOWUP = "PP_BLOWUP"
PP_GLOBAL = "PP_GLOBAL"
KINDS = (PME_BLOWUP, PME_GLOBAL, PP_BLOWUP, PP_GLOBAL)

DEFAULT_U_MAX = 1e6
DEFAULT_U_MIN = 1e-4
DEFAULT_SAMPLES = 2000


class Nonlinearity:
    """Base class. Subclasses give vectorised ``f`` and ``moment(u, a)``.

    ``moment(u, a)`` is the integral of s^a f(s) over [0, u]; both antiderivatives
    used by the theorems are multiples of it.
    """

    certifiable = True
    spec = ""

    def f(self, u):
        raise NotImplementedError

    def moment(self, u, a):
        raise NotImplementedError

    def moment_numeric(self, u, a):
        """Quadrature of s^a f(s) on [0, u]; independent of the closed forms."""
        u = np.atleast_1d(np.asarray(u, dtype=float))
        out = np.empty_like(u)
        for i, ui in enumerate(u):
            val, _ = integrate.quad(lambda s: s ** a * float(self.f(np.array(s))), 0.0, ui,
                                    limit=200, epsabs=0.0, epsrel=1e-12)
            out[i] = val
        return out

    def F_pme(self, u, p, m):
        return p * m / (m + 1.0) * self.moment(u, m - 1.0)

    def F_pp(self, u):
        return self.moment(u, 0.0)

    def rate(self, u):
        """f(u)/u, the local growth rate of the source (0 where u = 0)."""
        u = np.asarray(u, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.where(u > 0, self.f(u) / np.where(u > 0, u, 1.0), 0.0)
        return r

    def validate(self, u_max=DEFAULT_U_MAX, count=2000):
        u = np.logspace(-8, np.log10(u_max), count)
        if float(self.f(np.array(0.0))) != 0.0:
            raise DomainError(f"{self.spec}: f(0) must be 0")
        if self.certifiable and not np.all(self.f(u) > 0):
            bad = u[~(self.f(u) > 0)][0]
            raise DomainError(f"{self.spec}: f must be positive for u > 0 (fails at u={bad:g})")


@dataclass(eq=False)
class Power(Nonlinearity):
    c: float
    q: float

    def __post_init__(self):
        if not self.c > 0:
            raise DomainError(f"power nonlinearity needs c > 0, got {self.c}")
        if not self.q >= 1:
            raise DomainError(f"power nonlinearity needs q >= 1, got {self.q}")
        self.spec = f"power:{self.c!r},{self.q!r}"

    def f(self, u):
        return self.c * np.asarray(u, dtype=float) ** self.q

    def moment(self, u, a):
        return self.c * np.asarray(u, dtype=float) ** (a + self.q + 1) / (a + self.q + 1)


@dataclass(eq=False)
class RationalSaturating(Nonlinearity):
    c: float

    def __post_init__(self):
        if not self.c > 0:
            raise DomainError(f"saturating nonlinearity needs c > 0, got {self.c}")
        self.spec = f"saturating:{self.c!r}"

    def f(self, u):
        u = np.asarray(u, dtype=float)
        return self.c * u / (1.0 + u * u)

    def moment(self, u, a):
        # integral of s^(a+1) / (1 + s^2)
        u = np.asarray(u, dtype=float)
        if a == 0:
            return 0.5 * self.c * np.log1p(u * u)
        b = a + 2.0
        return self.c * u ** b / b * special.hyp2f1(1.0, b / 2, b / 2 + 1, -u * u)


@dataclass(eq=False)
class Tabulated(Nonlinearity):
    """Piecewise-linear f through (u_i, f_i) knots, linearly continued past the last knot."""
    knots: np.ndarray
    values: np.ndarray
    source: str = "table"

    def __post_init__(self):
        u = np.asarray(self.knots, dtype=float)
        fv = np.asarray(self.values, dtype=float)
        order = np.argsort(u)
        u, fv = u[order], fv[order]
        if u.size < 2 or u[0] != 0.0 or fv[0] != 0.0:
            raise DomainError("tabulated f needs at least two knots and the knot (0, 0)")
        if np.any(np.diff(u) <= 0):
            raise DomainError("tabulated f has repeated knots")
        if np.any(fv[1:] <= 0):
            raise DomainError("tabulated f must be positive at every knot u > 0")
        if fv[-1] < fv[-2]:
            raise DomainError("tabulated f: the linear continuation past the last knot turns negative")
        self.knots, self.values = u, fv
        self._slope = np.diff(fv) / np.diff(u)
        self._icept = fv[:-1] - self._slope * u[:-1]
        self.spec = f"table:{self.source}"

    def _segment(self, u):
        return np.clip(np.searchsorted(self.knots, u, side="right") - 1, 0, self.knots.size - 2)

    def f(self, u):
        u = np.asarray(u, dtype=float)
        i = self._segment(u)
        return self._icept[i] + self._slope[i] * u

    def _piece(self, lo, hi, i, a):
        return (self._icept[i] * (hi ** (a + 1) - lo ** (a + 1)) / (a + 1)
                + self._slope[i] * (hi ** (a + 2) - lo ** (a + 2)) / (a + 2))

    def moment(self, u, a):
        u = np.asarray(u, dtype=float)
        seg = np.arange(self.knots.size - 1)
        full = self._piece(self.knots[:-1], self.knots[1:], seg, a)
        cum = np.concatenate([[0.0], np.cumsum(full)])
        i = self._segment(u)
        return cum[i] + self._piece(self.knots[i], u, i, a)

    @classmethod
    def from_csv(cls, path):
        path = Path(path)
        data = np.loadtxt(path, delimiter=",", ndmin=2, comments="#")
        return cls(data[:, 0], data[:, 1], source=str(path))


class Zero(Nonlinearity):
    """f = 0. Oracle/validation runs only; never certifiable."""
    certifiable = False
    spec = "zero"

    def f(self, u):
        return np.zeros_like(np.asarray(u, dtype=float))

    def moment(self, u, a):
        return np.zeros_like(np.asarray(u, dtype=float))


def parse(text, base_dir="."):
    """Build a nonlinearity from ``power:c,q``, ``saturating:c``, ``table:<csv>`` or ``zero``."""
    text = text.strip()
    kind, _, args = text.partition(":")
    kind = kind.strip().lower()
    try:
        if kind == "power":
            c, q = (float(a) for a in args.split(","))
            return Power(c, q)
        if kind == "saturating":
            return RationalSaturating(float(args))
        if kind == "table":
            path = Path(args.strip())
            if not path.is_absolute():
                path = Path(base_dir) / path
            return Tabulated.from_csv(path)
        if kind == "zero" and not args:
            return Zero()
    except (TypeError, ValueError) as exc:
        if isinstance(exc, DomainError):
            raise
        raise DomainError(f"cannot parse nonlinearity {text!r}: {exc}") from None
    raise DomainError(f"unknown nonlinearity {text!r}")


def _check_u(u):
    u = np.asarray(u, dtype=float)
    if np.any(u < 0):
        raise DomainError("nonlinearity evaluated at negative u")
    return u


def eval_f(nl, u):
    return nl.f(_check_u(u))


def eval_F_pme(nl, u, p, m):
    if m < 1:
        raise InvalidExponent(f"m must be >= 1, got {m}")
    return nl.F_pme(_check_u(u), p, m)


def eval_F_pp(nl, u):
    return nl.F_pp(_check_u(u))


# -- condition checker ---------------------------------------------------

@dataclass
class ConditionReport:
    kind: str
    alpha: float
    beta: float
    gamma: float
    side: list = field(default_factory=list)  # (name, passed, bound)
    holds: bool = False
    worst_margin: float = float("nan")
    worst_u: float = float("nan")
    u_min: float = DEFAULT_U_MIN
    u_max: float = DEFAULT_U_MAX
    count: int = DEFAULT_SAMPLES

    @property
    def side_ok(self):
        return all(ok for _, ok, _ in self.side)

    def to_dict(self):
        return {
            "kind": self.kind,
            "alpha": self.alpha,
            "beta": self.beta,
            "gamma": self.gamma,
            "side_constraints": [{"name": n, "passed": bool(ok), "bound": b} for n, ok, b in self.side],
            "holds": bool(self.holds),
            "worst_margin": self.worst_margin,
            "worst_u": self.worst_u,
            "samples": {"u_min": self.u_min, "u_max": self.u_max, "count": self.count,
                        "spacing": "log-uniform"},
        }


@dataclass
class Infeasible:
    """Every candidate (alpha, beta, gamma) of a search failed; each keeps its witness."""
    kind: str
    candidates: list

    holds = False

    def to_dict(self):
        return {
            "kind": self.kind,
            "feasible": False,
            "witnesses": [
                {"alpha": r.alpha, "beta": r.beta, "gamma": r.gamma,
                 "side_ok": r.side_ok, "worst_u": r.worst_u, "worst_margin": r.worst_margin}
                for r in self.candidates
            ],
        }


def _beta_bound(kind, alpha, m, p, C):
    if kind in (PME_BLOWUP, PME_GLOBAL):
        return C * (alpha - m - 1) / (m + 1)
    if kind == PP_BLOWUP:
        return C * (alpha - p) / p
    return (p - alpha) / 2


def side_constraints(kind, alpha, beta, gamma, m, p, C):
    bound = _beta_bound(kind, alpha, m, p, C)
    if kind == PME_BLOWUP:
        return [("alpha > m+1", alpha > m + 1, m + 1), ("gamma > 0", gamma > 0, 0.0),
                ("beta > 0", beta > 0, 0.0), ("beta <= C(alpha-m-1)/(m+1)", beta <= bound, bound)]
    if kind == PME_GLOBAL:
        return [("alpha <= 0", alpha <= 0, 0.0), ("gamma >= 0", gamma >= 0, 0.0),
                ("beta >= C(alpha-m-1)/(m+1)", beta >= bound, bound)]
    if kind == PP_BLOWUP:
        return [("alpha > p", alpha > p, p), ("gamma > 0", gamma > 0, 0.0),
                ("beta > 0", beta > 0, 0.0), ("beta <= C(alpha-p)/p", beta <= bound, bound)]
    if kind == PP_GLOBAL:
        return [("alpha <= 0", alpha <= 0, 0.0), ("gamma >= 0", gamma >= 0, 0.0),
                ("beta >= (p-alpha)/2", beta >= bound, bound)]
    raise DomainError(f"invalid condition kind {kind!r}")


def _sides(kind, nl, u, alpha, beta, gamma, m, p):
    """LHS alpha*F and the three RHS terms of the condition at samples u."""
    if kind in (PME_BLOWUP, PME_GLOBAL):
        lhs = alpha * nl.F_pme(u, p, m)
        terms = (u ** m * nl.f(u), beta * u ** (p * m), np.full_like(u, alpha * gamma))
    else:
        lhs = alpha * nl.F_pp(u)
        terms = (u * nl.f(u), beta * u ** p, np.full_like(u, alpha * gamma))
    return lhs, terms


def oriented_margin(kind, nl, u, alpha, beta, gamma, m, p, flip=False):
    """RHS - LHS for blow-up kinds, LHS - RHS for global kinds (``flip`` negates).

    Differences within the rounding of the operands count as equality.
    """
    lhs, terms = _sides(kind, nl, u, alpha, beta, gamma, m, p)
    rhs = terms[0] + terms[1] + terms[2]
    margin = rhs - lhs if kind in (PME_BLOWUP, PP_BLOWUP) else lhs - rhs
    if flip:
        margin = -margin
    scale = np.abs(lhs) + sum(np.abs(t) for t in terms)
    return np.where(np.abs(margin) <= 64 * np.finfo(float).eps * scale, 0.0, margin)


def _power_tails(kind, nl, alpha, beta, gamma, m, p):
    """Exact sign of the oriented margin as u -> 0+ and u -> inf for power f."""
    c, q = nl.c, nl.q
    if kind in (PME_BLOWUP, PME_GLOBAL):
        top = (m + q, c - alpha * c * p * m / ((m + 1) * (m + q)))
        terms = [top, (p * m, beta), (0.0, alpha * gamma)]
    else:
        top = (q + 1, c - alpha * c / (q + 1))
        terms = [top, (p, beta), (0.0, alpha * gamma)]
    sign = 1.0 if kind in (PME_BLOWUP, PP_BLOWUP) else -1.0
    combined = {}
    for e, coef in terms:
        combined[e] = combined.get(e, 0.0) + sign * coef
    live = sorted((e, v) for e, v in combined.items() if abs(v) > 1e-12 * (abs(c) + 1))
    if not live:
        return True, True
    return live[0][1] > 0, live[-1][1] > 0


def check_condition(kind, nl, alpha, beta, gamma, m, p, C, u_max=DEFAULT_U_MAX,
                    n_samples=DEFAULT_SAMPLES, u_min=DEFAULT_U_MIN):
    if kind not in KINDS:
        raise DomainError(f"invalid condition kind {kind!r}")
    if not u_max > u_min or n_samples < 100 or not C > 0:
        raise DomainError("check_condition needs u_max > u_min, n_samples >= 100 and C > 0")
    side = side_constraints(kind, alpha, beta, gamma, m, p, C)
    if isinstance(nl, Power):
        at_zero, at_inf = _power_tails(kind, nl, alpha, beta, gamma, m, p)
        side += [("leading power as u->0+", at_zero, 0.0), ("leading power as u->inf", at_inf, 0.0)]
    u = np.logspace(np.log10(u_min), np.log10(u_max), int(n_samples))
    with np.errstate(all="ignore"):
        margin = oriented_margin(kind, nl, u, alpha, beta, gamma, m, p)
    bad = ~np.isfinite(margin)
    if bad.any():
        raise NumericFailure(f"non-finite condition value at u={u[bad][0]:g}", where=float(u[bad][0]))
    i = int(np.argmin(margin))
    report = ConditionReport(kind, float(alpha), float(beta), float(gamma), side,
                             worst_margin=float(margin[i]), worst_u=float(u[i]),
                             u_min=float(u_min), u_max=float(u_max), count=int(n_samples))
    report.holds = report.side_ok and report.worst_margin >= 0
    return report


def _candidates(kind, m, p, C):
    gammas = (0.0, 0.1, 1.0, 10.0)
    if kind in (PME_BLOWUP, PP_BLOWUP):
        base = m + 1 if kind == PME_BLOWUP else p
        for s in (0.001, 0.01, 0.05, 0.1, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0):
            alpha = base * (1 + s)
            bmax = _beta_bound(kind, alpha, m, p, C)
            for frac in (1.0, 0.5, 0.1):
                for gamma in gammas[1:]:
                    yield alpha, frac * bmax, gamma
    else:
        for alpha in (0.0, -0.5, -1.0, -2.0, -5.0, -10.0):
            blo = _beta_bound(kind, alpha, m, p, C)
            for beta in (blo, blo + abs(blo) * 0.5 + 0.1):
                for gamma in gammas:
                    yield alpha, beta, gamma


def search_parameters(kind, nl, m, p, C, u_max=DEFAULT_U_MAX, n_samples=DEFAULT_SAMPLES):
    """First (alpha, beta, gamma) passing ``check_condition``, or an ``Infeasible`` summary."""
    tried = []
    if isinstance(nl, Power) and kind in (PME_BLOWUP, PP_BLOWUP):
        if kind == PME_BLOWUP:
            alpha = (m + 1) * (m + nl.q) / (p * m)
        else:
            alpha = nl.q + 1
        bmax = _beta_bound(kind, alpha, m, p, C)
        report = check_condition(kind, nl, alpha, 0.5 * bmax, 1.0, m, p, C, u_max, n_samples)
        if report.holds:
            return report
        tried.append(report)
    for alpha, beta, gamma in _candidates(kind, m, p, C):
        report = check_condition(kind, nl, alpha, beta, gamma, m, p, C, u_max, n_samples)
        if report.holds:
            return report
        tried.append(report)
    return Infeasible(kind, tried)
