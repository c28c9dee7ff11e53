import json

import numpy as np
import pytest

from conftest import cube, heis, sin_product
from stratlab import certificates as certs
from stratlab import pme, pseudo
from stratlab.errors import InvalidPairing
from stratlab.nonlinearity import PME_BLOWUP, PME_GLOBAL, PP_BLOWUP, PP_GLOBAL, Power, RationalSaturating


def blowup_problem(A, nodes=17):
    g = cube(nodes=nodes)
    return certs.Problem(g, 2.0, Power(1, 3), A * sin_product(g), 1.0, 4.0, 1 / 24, 0.1)


def test_blowup_hypotheses_certified():
    hyp = certs.verify_hypotheses(PME_BLOWUP, blowup_problem(15))
    assert hyp["status"] == certs.CERTIFIED
    assert hyp["C"] == pytest.approx(1 / 12)
    assert hyp["J0"] == pytest.approx(250.8, rel=0.03)
    assert hyp["sigma"] == pytest.approx(np.sqrt(2) - 1)
    assert np.isfinite(hyp["T_star"]) and hyp["T_star"] > 0
    assert hyp["T_star"] == pytest.approx(hyp["M"] / (hyp["sigma"] * hyp["I0"]))


def test_small_amplitude_fails_energy_sign():
    hyp = certs.verify_hypotheses(PME_BLOWUP, blowup_problem(5))
    assert hyp["status"] == certs.HYPOTHESES_FAILED
    assert hyp["checks"]["J0 > 0"] is False
    assert hyp["T_star"] is None


def test_heisenberg_p2_not_applicable():
    g = heis(nodes=9)
    prob = certs.Problem(g, 2.0, Power(1, 3), sin_product(g), 1.0, 4.0, 0.01, 0.1)
    hyp = certs.verify_hypotheses(PME_BLOWUP, prob)
    assert hyp["status"] == certs.NOT_APPLICABLE and hyp["C"] is None


def test_unknown_theorem():
    with pytest.raises(InvalidPairing):
        certs.verify_hypotheses("THM_9", blowup_problem(15, nodes=9))


def test_parameter_search_used_when_auto():
    g = cube(nodes=9)
    prob = certs.Problem(g, 2.0, Power(1, 3), 20 * sin_product(g))
    hyp = certs.verify_hypotheses(PP_BLOWUP, prob)
    assert hyp["parameter_search"] and hyp["alpha"] == pytest.approx(4)


def test_pp_global_power_is_infeasible():
    g = cube(nodes=9)
    hyp = certs.verify_hypotheses(PP_GLOBAL, certs.Problem(g, 2.0, Power(1, 2), sin_product(g)))
    assert hyp["status"] == certs.HYPOTHESES_FAILED
    assert hyp["condition"]["feasible"] is False and hyp["condition"]["witnesses"]


def test_blowup_run_certified_and_pairing_checked():
    prob = blowup_problem(20)
    hyp = certs.verify_hypotheses(PME_BLOWUP, prob)
    rec = pme.run(prob.grid, prob.u0, pme.PMEConfig(), prob.nl, gamma=0.1, M=hyp["M"])
    cert = certs.post_run_verdict(PME_BLOWUP, hyp, rec, h=1 / 16)
    assert cert["status"] == certs.CERTIFIED, cert["run"]["checks"]
    assert cert["run"]["t_num"] <= 1.1 * hyp["T_star"]
    assert cert["tolerances"]["residual_max"] == 0.05
    with pytest.raises(InvalidPairing):
        certs.post_run_verdict(PME_GLOBAL, hyp, rec)
    with pytest.raises(InvalidPairing):
        certs.post_run_verdict(PP_BLOWUP, dict(hyp, theorem=PP_BLOWUP), rec)


def test_failed_hypotheses_gate_the_run():
    prob = blowup_problem(5, nodes=9)
    hyp = certs.verify_hypotheses(PME_BLOWUP, prob)
    rec = pme.run(prob.grid, prob.u0, pme.PMEConfig(t_max=0.01), prob.nl)
    assert certs.post_run_verdict(PME_BLOWUP, hyp, rec)["status"] == certs.HYPOTHESES_FAILED


def test_global_theorem_short_run():
    g = cube(nodes=9, hi=0.25)
    prob = certs.Problem(g, 2.0, RationalSaturating(1), sin_product(g), 1.0, 0.0, -1.0, 0.0)
    hyp = certs.verify_hypotheses(PME_GLOBAL, prob)
    assert hyp["status"] == certs.CERTIFIED and hyp["C"] == pytest.approx(4 / 3)
    rec = pme.run(g, prob.u0, pme.PMEConfig(t_max=0.05), prob.nl)
    assert certs.post_run_verdict(PME_GLOBAL, hyp, rec)["status"] == certs.CERTIFIED


def test_late_blowup_contradicts_or_flags_resolution():
    prob = blowup_problem(20, nodes=9)
    hyp = certs.verify_hypotheses(PME_BLOWUP, prob)
    hyp = dict(hyp, T_star=1e-6)
    rec = pme.run(prob.grid, prob.u0, pme.PMEConfig(), prob.nl, gamma=0.1, M=hyp["M"])
    coarse = certs.post_run_verdict(PME_BLOWUP, hyp, rec, h=1 / 8)
    assert coarse["status"] == certs.INCONCLUSIVE and coarse["flags"]["INCONCLUSIVE_RESOLUTION"]
    fine = certs.post_run_verdict(PME_BLOWUP, hyp, rec, h=1 / 64)
    assert fine["status"] == certs.RUN_CONTRADICTS


def test_json_is_deterministic_and_valid():
    hyp = certs.verify_hypotheses(PME_BLOWUP, blowup_problem(15, nodes=9))
    a = certs.to_json(certs.hypotheses_certificate(hyp))
    b = certs.to_json(certs.hypotheses_certificate(
        certs.verify_hypotheses(PME_BLOWUP, blowup_problem(15, nodes=9))))
    assert a == b and a.endswith("\n")
    assert json.loads(certs.to_json({"x": float("nan"), "y": np.float64(2), "z": np.bool_(True)})) == \
        {"x": "nan", "y": 2.0, "z": True}


def test_pp_blowup_small_grid_certificate_lists_checks():
    g = cube(nodes=9)
    prob = certs.Problem(g, 2.0, Power(1, 3), 15 * sin_product(g), 1.0, 4.0, 1 / 24, 0.1)
    hyp = certs.verify_hypotheses(PP_BLOWUP, prob)
    rec = pseudo.run(g, prob.u0, pseudo.PPConfig(t_max=10), prob.nl, gamma=0.1, M=hyp["M"])
    cert = certs.post_run_verdict(PP_BLOWUP, hyp, rec, h=1 / 8)
    assert set(cert["run"]["checks"]) >= {"blew_up", "F monotone", "r_F <= 0.05", "concavity"}
