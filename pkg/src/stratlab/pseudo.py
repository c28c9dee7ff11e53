"""Semi-implicit stepping for u_t - div(|grad u|^{p-2} grad u_t) = L_p u + f(u).

Each step solves the symmetric positive definite system B(u) delta = dt (L_p u + f(u))
with B(u) w = w - div(omega grad w), omega frozen at the current state, by
Jacobi-preconditioned conjugate gradients.
"""
import time
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InvalidField, NoConvergence, NumericFailure
from .functionals import EnergyLedger
from .grid import DEFAULT_EPS
from .pme import BLEW_UP, FLUSH, NUMERICAL_FAILURE, REACHED_TMAX, RunRecord, validate_initial

PPRunRecord = RunRecord


@dataclass
class PPConfig:
    p: float = 2.0
    dt: float = 1e-3
    c_react: float = 0.01
    cg_tol: float = 1e-10
    cg_max_iter: int = None  # default 10 sqrt(nodes) + 200
    picard_iters: int = 1
    u_blowup: float = 1e6
    dt_min: float = 1e-12
    t_max: float = 1.0
    stride: int = 10
    eps: float = DEFAULT_EPS
    max_steps: int = 5_000_000

    def __post_init__(self):
        if self.p < 2:
            raise InvalidField(f"need p >= 2, got {self.p}")
        if min(self.dt, self.c_react, self.u_blowup, self.dt_min, self.t_max, self.stride) <= 0:
            raise InvalidField("pseudo-parabolic numerics must all be positive")
        if not 0 < self.cg_tol <= 1e-4:
            raise InvalidField(f"cg_tol must lie in (0, 1e-4], got {self.cg_tol}")
        if not 1 <= self.picard_iters <= 5:
            raise InvalidField(f"picard_iters must be 1..5, got {self.picard_iters}")

    def max_iter(self, grid):
        if self.cg_max_iter is not None:
            return int(self.cg_max_iter)
        return int(10 * np.sqrt(grid.size)) + 200


class BOperator:
    """w -> w - div(omega grad w) with weights frozen at a reference state."""

    def __init__(self, grid, u_ref, p, eps=DEFAULT_EPS):
        self.grid = grid
        self.p = p
        u_ref = np.asarray(u_ref, dtype=float)
        if u_ref.size != grid.size:
            raise InvalidField("reference field does not match the grid")
        self.omega = None if p == 2 else grid.pair_weights(grid.grad_pair(u_ref), p, eps)
        self._diag = None

    def __call__(self, w):
        w = np.asarray(w, dtype=float).reshape(self.grid.shape)
        g = self.grid.grad_pair(w)
        if self.omega is not None:
            g = g * self.omega[:, None, :]
        return w - self.grid.pair_divergence(g)

    def diagonal(self):
        """Exact diagonal by probing: couplings never reach 3 nodes apart along any axis."""
        if self._diag is None and self.omega is None:
            self._diag = getattr(self.grid, "_b_diag_unweighted", None)
        if self._diag is None:
            grid = self.grid
            idx = np.indices(grid.shape) % 3
            diag = np.zeros(grid.shape)
            for colour in np.ndindex(*(3,) * len(grid.shape)):
                sel = np.all(idx == np.array(colour).reshape((-1,) + (1,) * len(grid.shape)), axis=0)
                diag[sel] = self(sel.astype(float))[sel]
            self._diag = diag
            if self.omega is None:
                grid._b_diag_unweighted = diag
        return self._diag


def apply_B(grid, u_ref, w, p, eps=DEFAULT_EPS):
    return BOperator(grid, u_ref, p, eps)(w)


def cg_solve(operator, rhs, tol=1e-10, max_iter=1000, x0=None, precond=None, return_info=False):
    """Preconditioned CG for an SPD operator; stops at ||A x - b|| <= tol ||b||.

    ``precond`` is a diagonal (array) or None. Raises NoConvergence after max_iter.
    """
    b = np.asarray(rhs, dtype=float)
    bnorm = float(np.linalg.norm(b))
    x = np.zeros_like(b) if x0 is None else np.array(x0, dtype=float).reshape(b.shape)
    if bnorm == 0.0:
        x = np.zeros_like(b)
        return (x, 0, 0.0) if return_info else x
    r = b - operator(x) if x0 is not None else b.copy()
    inv = None if precond is None else 1.0 / precond
    res = float(np.linalg.norm(r))
    it = 0
    if res > tol * bnorm:
        z = r if inv is None else inv * r
        d = z.copy()
        rz = float(np.vdot(r, z))
        while True:
            if it >= max_iter:
                raise NoConvergence("conjugate gradients did not converge", res / bnorm, it)
            q = operator(d)
            dq = float(np.vdot(d, q))
            if not dq > 0:
                raise NumericFailure("operator is not positive definite", "cg_solve")
            a = rz / dq
            x += a * d
            r -= a * q
            it += 1
            res = float(np.linalg.norm(r))
            if res <= tol * bnorm:
                break
            z = r if inv is None else inv * r
            rz_new = float(np.vdot(r, z))
            d = z + (rz_new / rz) * d
            rz = rz_new
    return (x, it, res / bnorm) if return_info else x


def _rhs(grid, u, g, p, eps, nl):
    if p != 2:
        g = g * grid.pair_weights(g, p, eps)[:, None, :]
    return grid.pair_divergence(g) + grid.zero_boundary(nl.f(u))


def _solve(grid, u, rhs, cfg, x0=None, op=None):
    op = op or BOperator(grid, u, cfg.p, cfg.eps)
    total = 0
    for k in range(cfg.picard_iters):
        if k:
            op = BOperator(grid, np.maximum(u + x0, 0.0), cfg.p, cfg.eps)
        x0, it, res = cg_solve(op, rhs, cfg.cg_tol, cfg.max_iter(grid), x0=x0,
                               precond=op.diagonal(), return_info=True)
        total += it
    return x0, total, res


def _finish(grid, u, delta):
    new = u + delta
    new[~grid.interior] = 0.0
    if not np.all(np.isfinite(new)):
        raise NumericFailure("non-finite value in semi-implicit update")
    neg = new < 0
    n_neg = int(neg.sum())
    if n_neg:
        new[neg] = 0.0
    new[new < FLUSH] = 0.0  # keep decaying runs out of slow subnormal arithmetic
    return new, n_neg


def step(grid, u, cfg, nl, dt=None):
    """One semi-implicit step of size ``dt`` (default cfg.dt)."""
    dt = cfg.dt if dt is None else dt
    u = np.asarray(u, dtype=float).reshape(grid.shape)
    rhs = dt * _rhs(grid, u, grid.grad_pair(u), cfg.p, cfg.eps, nl)
    delta, _, _ = _solve(grid, u, rhs, cfg)
    return _finish(grid, u, delta)[0]


def _raw_dt(u, cfg, nl, observed=None, dt_prev=None):
    """cfg.dt capped so the relative change per step stays near c_react.

    Before the first step the rate is bounded by max f(u)/u; afterwards by the
    observed rate max|delta| / (dt sup u) of the previous step, with growth of
    at most a factor 2 per step.
    """
    dt = cfg.dt
    if observed is None:
        rate = float(np.max(nl.rate(u)))
    else:
        rate = observed
        dt = min(dt, 2.0 * dt_prev)
    if rate > 0:
        dt = min(dt, cfg.c_react / rate)
    return dt


def run(grid, u0, cfg, nl, gamma=0.0, M=0.0):
    """Integrate until t_max, numerical blow-up, or failure, recording every accepted step.

    The step is cfg.dt, reduced where needed so the relative change of u per
    step stays near c_react.
    """
    u = validate_initial(grid, u0)
    p = cfg.p
    ledger = EnergyLedger(M)
    keys = ("t", "sup_u", "Ip", "F", "r_F", "Ep", "cg_iters", "cg_residual")
    rows = {k: [] for k in keys}
    clamped = []
    t = 0.0
    prev = None  # (F, u, dt, omega-pair of the old state)
    it, res = 0, 0.0
    delta = prev_dt = observed = None
    verdict, reason = REACHED_TMAX, ""
    start = time.perf_counter()
    steps = 0
    p2 = p == 2
    while True:
        g = grid.grad_pair(u)
        sup = float(u.max())
        grad_p = grid.pair_energy(g, p)
        Ip = grid.integrate(u * u) + 2.0 / p * grad_p
        F = -grad_p / p + grid.integrate(nl.F_pp(u) - gamma)
        if prev is None:
            r = float("nan")
        else:
            F0, u_old, dt_old, w_old = prev
            dF = (F - F0) / dt_old
            ut = (u - u_old) / dt_old
            gt = grid.pair_norm_sq(grid.grad_pair(ut))
            dens = gt.sum() if p2 else float((w_old * gt).sum())
            r = abs(dF - grid.integrate(ut * ut) - 0.5 * grid.cell_volume * dens) / max(abs(dF), 1.0)
        Ep = ledger.append(t, Ip)
        for key, val in zip(keys, (t, sup, Ip, F, r, Ep, it, res)):
            rows[key].append(val)

        if not (np.isfinite(sup) and np.isfinite(F)):
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
        dt = _raw_dt(u, cfg, nl, observed, prev_dt)
        if dt < cfg.dt_min:
            if len(rows["sup_u"]) > 1 and sup > rows["sup_u"][-2]:
                verdict, reason = BLEW_UP, f"step {dt:.3g} below dt_min with growing sup u"
            else:
                verdict, reason = NUMERICAL_FAILURE, f"step {dt:.3g} below dt_min"
            break
        dt = min(dt, cfg.t_max - t)
        op = BOperator(grid, u, p, cfg.eps)
        rhs = dt * _rhs(grid, u, g, p, cfg.eps, nl)
        x0 = None if delta is None else delta * (dt / prev_dt)
        try:
            delta, it, res = _solve(grid, u, rhs, cfg, x0=x0, op=op)
            new, n_neg = _finish(grid, u, delta)
        except NoConvergence as exc:
            verdict, reason = NUMERICAL_FAILURE, f"{exc} (residual {exc.residual:.3g})"
            break
        except NumericFailure as exc:
            verdict, reason = NUMERICAL_FAILURE, str(exc)
            break
        clamped.append(n_neg)
        prev = (F, u, dt, op.omega)
        prev_dt = dt
        observed = float(np.abs(delta).max()) / (dt * sup)
        u = new
        t = cfg.t_max if dt >= cfg.t_max - t else t + dt
        steps += 1

    series = {k: np.array(v) for k, v in rows.items()}
    return RunRecord(verdict, t, reason, series, np.array(clamped, dtype=int), steps,
                     time.perf_counter() - start, u, kind="pp",
                     u_blowup=cfg.u_blowup)


def exp_decay_check(record, p, alpha, tol=1e-6):
    """I_p(t) <= exp(-(p - alpha) t) I_p(0) (1 + tol) at every sample; requires alpha <= 0."""
    if alpha > 0:
        raise DomainError(f"the exponential decay estimate needs alpha <= 0, got {alpha}")
    t, Ip = record.series["t"], record.series["Ip"]
    if Ip.size == 0:
        return True
    return bool(np.all(Ip <= np.exp(-(p - alpha) * t) * Ip[0] * (1 + tol)))
