"""Hypothesis verdicts, theorem constants and post-run checks, assembled into a certificate.

Theorems are identified by the condition kind they rest on:

    PME_BLOWUP  finite-time blow-up of the porous medium problem
    PME_GLOBAL  global existence and decay of int u^(m+1)
    PP_BLOWUP   finite-time blow-up of the pseudo-parabolic problem
    PP_GLOBAL   global existence with exponential decay of I_p
"""
import json
import math
from dataclasses import dataclass

import numpy as np

from . import functionals as fn
from . import nonlinearity as nlmod
from .errors import ExcludedExponent, HypothesisViolation, InsufficientData, InvalidPairing
from .pme import BLEW_UP, NUMERICAL_FAILURE, global_decay_check
from .pseudo import exp_decay_check

THEOREMS = nlmod.KINDS
BLOWUP = (nlmod.PME_BLOWUP, nlmod.PP_BLOWUP)

CERTIFIED = "CERTIFIED"
HYPOTHESES_FAILED = "HYPOTHESES_FAILED"
RUN_CONTRADICTS = "RUN_CONTRADICTS"
NOT_APPLICABLE = "NOT_APPLICABLE"
INCONCLUSIVE = "INCONCLUSIVE"

TOLERANCES = {
    "blowup_time_factor": 1.1,
    "monotone_rel": 1e-6,
    "residual_max": 0.05,
    "residual_sup_fraction": 0.5,
    "concavity_rel": 1e-3,
    "decay_step_rel": 1e-8,
    "exp_decay_rel": 1e-6,
    "resolution_h": 1.0 / 32,
}


@dataclass
class Problem:
    """Everything the hypotheses depend on. ``alpha=None`` requests a parameter search."""
    grid: object
    p: float
    nl: object
    u0: np.ndarray
    m: float = 1.0
    alpha: float = None
    beta: float = None
    gamma: float = None
    u_max: float = nlmod.DEFAULT_U_MAX
    samples: int = nlmod.DEFAULT_SAMPLES


def _is_pme(theorem):
    return theorem in (nlmod.PME_BLOWUP, nlmod.PME_GLOBAL)


def initial_energy(theorem, problem):
    """(energy functional at t=0, monitored integral I(0))."""
    g, u0, p, m = problem.grid, problem.u0, problem.p, problem.m
    gamma = problem.gamma or 0.0
    if _is_pme(theorem):
        return (fn.j_functional(g, u0, p, m, gamma, problem.nl),
                g.integrate(u0 ** (m + 1)))
    grad_p = g.gradient_energy(u0, p)
    return fn.f_functional_pp(g, u0, p, gamma, problem.nl), g.integrate(u0 * u0) + 2.0 / p * grad_p


def verify_hypotheses(theorem, problem):
    """Hypothesis section: every sub-check with its number, and an overall status."""
    if theorem not in THEOREMS:
        raise InvalidPairing(f"unknown theorem {theorem!r}")
    g, p, m = problem.grid, problem.p, (problem.m if _is_pme(theorem) else 1.0)
    n1 = g.group.n1
    R = g.sup_x_prime()
    sec = {"theorem": theorem, "N1": n1, "p": p, "m": m if _is_pme(theorem) else None,
           "R": R, "p_ne_N1": p != n1, "nonlinearity": problem.nl.spec}
    checks = {}
    try:
        C = fn.poincare_constant(n1, p, R)
    except ExcludedExponent as exc:
        sec.update(C=None, status=NOT_APPLICABLE, reason=str(exc), checks=checks)
        return sec
    sec["C"] = C
    checks["f_certifiable"] = bool(problem.nl.certifiable)

    if problem.alpha is None:
        found = nlmod.search_parameters(theorem, problem.nl, m, p, C, problem.u_max, problem.samples)
        sec["parameter_search"] = True
    else:
        found = nlmod.check_condition(theorem, problem.nl, problem.alpha, problem.beta,
                                      problem.gamma, m, p, C, problem.u_max, problem.samples)
        sec["parameter_search"] = False
    sec["condition"] = found.to_dict()
    checks["condition"] = bool(found.holds)
    if isinstance(found, nlmod.Infeasible):
        alpha = beta = gamma = None
    else:
        alpha, beta, gamma = found.alpha, found.beta, found.gamma
    sec.update(alpha=alpha, beta=beta, gamma=gamma)

    solved = Problem(g, p, problem.nl, problem.u0, m, alpha, beta, gamma)
    E0, I0 = initial_energy(theorem, solved)
    name = "J0" if _is_pme(theorem) else "F0"
    sec[name] = E0
    sec["I0"] = I0
    if theorem in BLOWUP:
        checks[f"{name} > 0"] = E0 > 0
    elif alpha is not None and alpha < 0:
        # the alpha * energy(0) term only enters the decay argument when alpha < 0
        checks[f"{name} >= 0"] = E0 >= 0
    sec[f"{name}_sign"] = "positive" if E0 > 0 else ("zero" if E0 == 0 else "negative")

    sec["sigma"] = sec["M"] = sec["T_star"] = None
    if theorem in BLOWUP and alpha is not None:
        try:
            if _is_pme(theorem):
                sigma = fn.sigma_pme(p, m, alpha)
                M = fn.bigM_pme(E0, sigma, alpha, m, I0)
            else:
                sigma = fn.sigma_pp(alpha)
                M = fn.bigM_pp(E0, sigma, alpha, I0)
            sec.update(sigma=sigma, M=M, T_star=fn.tstar_pme(M, sigma, I0))
        except HypothesisViolation as exc:
            checks["constants"] = False
            sec["constants_error"] = str(exc)
    sec["checks"] = checks
    ok = all(checks.values())
    sec["status"] = CERTIFIED if ok else HYPOTHESES_FAILED
    if not ok:
        sec["reason"] = "failed: " + ", ".join(k for k, v in checks.items() if not v)
    if theorem in BLOWUP and not ok:
        sec["T_star"] = None
    return sec


def _monotone(values, tol):
    v = values[np.isfinite(values)]
    return bool(np.all(v[1:] >= v[:-1] - tol * np.abs(v[:-1])))


def _smooth_residual(record, name, fraction):
    """Largest identity residual over samples with sup u <= fraction * blow-up threshold."""
    r = record.series[name]
    mask = (record.series["sup_u"] <= fraction * record.u_blowup) & np.isfinite(r)
    return float(r[mask].max()) if mask.any() else 0.0


def post_run_verdict(theorem, hyp, record, h=None):
    """Combine a hypothesis section with a completed run into a certificate dict."""
    if theorem != hyp.get("theorem"):
        raise InvalidPairing(f"hypotheses are for {hyp.get('theorem')}, run is for {theorem}")
    if (record.kind == "pme") != _is_pme(theorem):
        raise InvalidPairing(f"a {record.kind} run cannot certify {theorem}")
    tol = TOLERANCES
    series = record.series
    run = {"verdict": record.verdict, "t_num": record.t_num, "reason": record.reason,
           "steps": record.steps,
           "clamped_after_first_step": int(record.clamped[1:].sum()) if record.clamped.size else 0}
    flags = {}
    if h is not None:
        run["h_max"] = h
    checks = {}
    conclusion_ok = True
    res_name, energy_name, ledger_name = (("r_J", "J", "E") if record.kind == "pme"
                                          else ("r_F", "F", "Ep"))

    if theorem in BLOWUP:
        T = hyp.get("T_star")
        run["T_star"] = T
        blew = record.verdict == BLEW_UP
        checks["blew_up"] = blew
        if T is not None:
            run["t_num_over_T_star"] = record.t_num / T
            run["t_num_le_T_star"] = bool(blew and record.t_num <= T)
            checks["t_num <= 1.1 T*"] = bool(blew and record.t_num <= tol["blowup_time_factor"] * T)
            if record.t_num > tol["blowup_time_factor"] * T and record.verdict != NUMERICAL_FAILURE:
                conclusion_ok = False
                if h is None or h > tol["resolution_h"]:
                    # late blow-up on a coarse grid may be a resolution effect
                    flags["INCONCLUSIVE_RESOLUTION"] = True
        checks[f"{energy_name} monotone"] = _monotone(series[energy_name], tol["monotone_rel"])
        rmax = _smooth_residual(record, res_name, tol["residual_sup_fraction"])
        run[f"{res_name}_max_smooth"] = rmax
        checks[f"{res_name} <= 0.05"] = rmax <= tol["residual_max"]
        sigma = hyp.get("sigma")
        if sigma is not None:
            E = fn.TimeSeries(series["t"], series[ledger_name], ledger_name).finite_prefix()
            try:
                margin, ee = fn.concavity_profile(E, sigma)
                scale = float(np.max(np.abs(ee)))
                run["concavity_margin"] = float(margin.min())
                run["concavity_scale"] = scale
                checks["concavity"] = bool(margin.min() >= -tol["concavity_rel"] * scale)
            except InsufficientData as exc:
                run["concavity_error"] = str(exc)
                checks["concavity"] = False
    else:
        checks["no blow-up"] = record.verdict != BLEW_UP
        conclusion_ok = record.verdict != BLEW_UP
        if record.kind == "pme":
            decay = global_decay_check(record, tol["decay_step_rel"])
            checks["integral decay"] = decay
        else:
            alpha = hyp.get("alpha")
            decay = alpha is not None and exp_decay_check(record, hyp["p"], alpha, tol["exp_decay_rel"])
            checks["exponential decay"] = bool(decay)
        conclusion_ok = conclusion_ok and bool(decay)
        I_name = "integral_u_m1" if record.kind == "pme" else "Ip"
        run[f"{I_name}_initial"] = float(series[I_name][0])
        run[f"{I_name}_final"] = float(series[I_name][-1])

    run["checks"] = checks
    if hyp["status"] != CERTIFIED:
        status = hyp["status"]
    elif record.verdict == NUMERICAL_FAILURE:
        status = INCONCLUSIVE
    elif all(checks.values()):
        status = CERTIFIED
    elif not conclusion_ok and not flags.get("INCONCLUSIVE_RESOLUTION"):
        status = RUN_CONTRADICTS
    else:
        status = INCONCLUSIVE
    return {"theorem": theorem, "status": status, "hypotheses": hyp, "run": run,
            "flags": flags, "tolerances": dict(tol)}


def hypotheses_certificate(hyp):
    """Certificate with the hypothesis section only (``check`` subcommand)."""
    return {"theorem": hyp["theorem"], "status": hyp["status"], "hypotheses": hyp,
            "tolerances": dict(TOLERANCES)}


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    return obj


def to_json(cert):
    """Deterministic JSON text (stable key order, non-finite floats as strings)."""
    return json.dumps(_clean(cert), indent=2) + "\n"
