"""Explicit time stepping for u_t - L_p(u^m) = f(u) with zero Dirichlet data."""
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidField, NumericFailure
from .functionals import EnergyLedger, TimeSeries
from .grid import DEFAULT_EPS

BLEW_UP = "BlewUp"
REACHED_TMAX = "ReachedTmax"
NUMERICAL_FAILURE = "NumericalFailure"
FLUSH = 1e-150  # positive values below this are set to zero after each step


@dataclass
class PMEConfig:
    m: float = 1.0
    p: float = 2.0
    c_cfl: float = 0.1
    c_react: float = 0.01
    u_blowup: float = 1e6
    dt_min: float = 1e-12
    t_max: float = 1.0
    stride: int = 10
    eps: float = DEFAULT_EPS
    max_steps: int = 5_000_000

    def __post_init__(self):
        if self.m < 1 or self.p < 2:
            raise InvalidField(f"need m >= 1 and p >= 2 (got m={self.m}, p={self.p})")
        if not 0 < self.c_cfl < 1:
            raise InvalidField(f"c_cfl must lie in (0, 1), got {self.c_cfl}")
        if min(self.c_react, self.u_blowup, self.dt_min, self.t_max, self.stride) <= 0:
            raise InvalidField("PME numerics must all be positive")


@dataclass
class RunRecord:
    verdict: str
    t_num: float
    reason: str = ""
    series: dict = field(default_factory=dict)  # name -> np.ndarray, aligned with series["t"]
    clamped: np.ndarray = None
    steps: int = 0
    wall_time: float = 0.0
    final: np.ndarray = None
    kind: str = "pme"
    u_blowup: float = 1e6

    def ts(self, name):
        return TimeSeries(self.series["t"], self.series[name], name).finite_prefix()


def validate_initial(grid, u0):
    u0 = np.asarray(u0, dtype=float).reshape(grid.shape)
    if not np.all(np.isfinite(u0)):
        raise InvalidField("initial data is not finite")
    if np.any(u0 < 0):
        raise InvalidField("initial data must be non-negative")
    if np.any(u0[~grid.interior] != 0):
        raise InvalidField("initial data must vanish on the boundary")
    if not np.any(u0 > 0):
        raise InvalidField("initial data is trivial (identically zero)")
    return u0.copy()


def _diffusivity(grid, u, g, cfg):
    """max over interior of m u^(m-1) (|grad u^m|^2 + eps^2)^((p-2)/2)."""
    inner = grid.interior.reshape(-1)
    uu = u.reshape(-1)[inner]
    d = np.ones_like(uu) if cfg.m == 1 else cfg.m * uu ** (cfg.m - 1)
    if cfg.p != 2:
        s = grid.pair_norm_sq(g)[:, inner].max(axis=0)
        d = d * (s + cfg.eps ** 2) ** ((cfg.p - 2) / 2)
    return float(d.max()) if d.size else 0.0


def _raw_dt(grid, u, g, cfg, nl):
    dt = cfg.c_cfl * grid.h_min ** 2 / (_diffusivity(grid, u, g, cfg) + cfg.eps)
    if nl is not None:
        rate = float(np.max(nl.rate(u)))
        if rate > 0:
            dt = min(dt, cfg.c_react / rate)
    return dt


def choose_dt(grid, u, cfg, nl=None, t=0.0):
    """CFL step from the degenerate diffusivity, optionally capped by the source rate.

    Returns a step in [dt_min, t_max - t].
    """
    um = u if cfg.m == 1 else u ** cfg.m
    dt = _raw_dt(grid, u, grid.grad_pair(um), cfg, nl)
    return min(max(dt, cfg.dt_min), cfg.t_max - t)


def _rhs(grid, u, g, cfg, nl):
    if cfg.p != 2:
        g = g * grid.pair_weights(g, cfg.p, cfg.eps)[:, None, :]
    lap = grid.pair_divergence(g)
    return lap + grid.zero_boundary(nl.f(u))


def _advance(grid, u, dt, rhs):
    new = u + dt * rhs
    new[~grid.interior] = 0.0
    if not np.all(np.isfinite(new)):
        raise NumericFailure("non-finite value in explicit update")
    neg = new < 0
    n_neg = int(neg.sum())
    if n_neg:
        new[neg] = 0.0
    new[new < FLUSH] = 0.0  # keep decaying runs out of slow subnormal arithmetic
    return new, n_neg


def step(grid, u, dt, cfg, nl):
    """One explicit Euler step u + dt (L_p(u^m) + f(u)); boundary re-zeroed, negatives clamped."""
    u = np.asarray(u, dtype=float).reshape(grid.shape)
    um = u if cfg.m == 1 else u ** cfg.m
    return _advance(grid, u, dt, _rhs(grid, u, grid.grad_pair(um), cfg, nl))[0]


def run(grid, u0, cfg, nl, gamma=0.0, M=0.0):
    """Integrate until t_max, numerical blow-up, or failure, recording every accepted step."""
    u = validate_initial(grid, u0)
    m, p = cfg.m, cfg.p
    coef = p * m / (m + 1)
    ledger = EnergyLedger(M)
    rows = {k: [] for k in ("t", "sup_u", "integral_u_m1", "J", "r_J", "E")}
    clamped = []
    t = 0.0
    prev = None  # (J, u, dt) of the previous accepted state
    verdict, reason = REACHED_TMAX, ""
    start = time.perf_counter()
    steps = 0
    while True:
        um = u if m == 1 else u ** m
        g = grid.grad_pair(um)
        sup = float(u.max())
        I = grid.integrate(u ** (m + 1))
        J = -grid.pair_energy(g, p) / (m + 1) + grid.integrate(nl.F_pme(u, p, m) - gamma)
        if prev is None:
            r = float("nan")
        else:
            J0, u_old, dt_old = prev
            dJ = (J - J0) / dt_old
            ut = (u - u_old) / dt_old
            weight = ut * ut if m == 1 else u_old ** (m - 1) * ut * ut
            r = abs(dJ - coef * grid.integrate(weight)) / max(abs(dJ), 1.0)
        E = ledger.append(t, I)
        for key, val in zip(rows, (t, sup, I, J, r, E)):
            rows[key].append(val)

        if not (np.isfinite(sup) and np.isfinite(J)):
            verdict, reason = NUMERICAL_FAILURE, "non-finite monitor"
            break
        if sup >= cfg.u_blowup:
            verdict, reason = BLEW_UP, f"sup u >= {cfg.u_blowup:g}"
            break
        if t >= cfg.t_max:
            break
        if steps >= cfg.max_steps:
            verdict, reason = NUMERICAL_FAILURE, f"step limit {cfg.max_steps} reached"
            break
        dt = _raw_dt(grid, u, g, cfg, nl)
        if dt < cfg.dt_min:
            if len(rows["sup_u"]) > 1 and sup > rows["sup_u"][-2]:
                verdict, reason = BLEW_UP, f"step {dt:.3g} below dt_min with growing sup u"
            else:
                verdict, reason = NUMERICAL_FAILURE, f"step {dt:.3g} below dt_min"
            break
        dt = min(dt, cfg.t_max - t)
        try:
            new, n_neg = _advance(grid, u, dt, _rhs(grid, u, g, cfg, nl))
        except NumericFailure as exc:
            verdict, reason = NUMERICAL_FAILURE, str(exc)
            break
        clamped.append(n_neg)
        prev = (J, u, dt)
        u = new
        t = cfg.t_max if dt >= cfg.t_max - t else t + dt
        steps += 1

    series = {k: np.array(v) for k, v in rows.items()}
    return RunRecord(verdict, t, reason, series, np.array(clamped, dtype=int), steps,
                     time.perf_counter() - start, u, u_blowup=cfg.u_blowup)


def global_decay_check(record, tol=1e-8):
    """int u^(m+1) never exceeds its initial value and never increases beyond tol * I(0) per step."""
    I = record.series["integral_u_m1"]
    if I.size == 0:
        return True
    I0 = I[0]
    if I0 == 0:
        return bool(np.all(I == 0))
    return bool(np.all(I <= I0 * (1 + tol)) and np.all(np.diff(I) <= tol * I0))
