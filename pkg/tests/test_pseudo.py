import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import cube, heis, random_interior, sin_product
from stratlab import pseudo
from stratlab.errors import DomainError, InvalidField, NoConvergence, NumericFailure
from stratlab.grid import Grid
from stratlab.group import make_euclidean
from stratlab.nonlinearity import Power, Zero
from stratlab.pme import BLEW_UP, REACHED_TMAX, RunRecord


def line(nodes=5, length=4.0):
    return Grid(make_euclidean(1), [(0, length)], [nodes])


def test_apply_B_examples():
    g = line()
    w = np.array([0, 0, 1, 0, 0.0])
    assert np.allclose(pseudo.apply_B(g, np.zeros(5), w, 2), [0, -1, 3, -1, 0])
    assert np.all(pseudo.apply_B(g, np.zeros(5), np.zeros(5), 2) == 0)
    g3 = cube(nodes=9)
    rng = np.random.default_rng(3)
    w = random_interior(g3, rng)
    out = pseudo.apply_B(g3, np.zeros(g3.shape), w, 3, eps=1e-12)
    assert np.abs(out - w).max() <= 1e-6 * np.abs(w).max()


def test_B_diagonal_by_probing():
    g = line()
    op = pseudo.BOperator(g, np.zeros(5), 2)
    assert np.allclose(op.diagonal(), [1, 3, 3, 3, 1])
    g3 = heis(nodes=7)
    op = pseudo.BOperator(g3, sin_product(g3), 3.5)
    dense = np.array([op(e)[np.unravel_index(i, g3.shape)]
                      for i, e in enumerate(np.eye(g3.size).reshape((g3.size,) + g3.shape))])
    assert np.allclose(op.diagonal().reshape(-1), dense, rtol=1e-13)


def test_cg_examples():
    g = line()
    op = pseudo.BOperator(g, np.zeros(5), 2)
    rhs = np.array([0, 0, 1, 0, 0.0])
    x, it, res = pseudo.cg_solve(op, rhs, return_info=True)
    assert x[2] == pytest.approx(3 / 7, rel=1e-10)
    assert np.allclose(x[1:4], np.linalg.solve([[3, -1, 0], [-1, 3, -1], [0, -1, 3]], [0, 1, 0]))
    b = np.arange(5.0)
    x, it, _ = pseudo.cg_solve(lambda v: v, b, return_info=True)
    assert np.allclose(x, b) and it == 1
    assert np.all(pseudo.cg_solve(op, np.zeros(5)) == 0)


def test_cg_failures():
    with pytest.raises(NoConvergence) as info:
        g = cube(nodes=9)
        op = pseudo.BOperator(g, np.zeros(g.shape), 2)
        pseudo.cg_solve(op, g.zero_boundary(np.ones(g.shape)), tol=1e-14, max_iter=2)
    assert info.value.iterations == 2
    with pytest.raises(NumericFailure):
        pseudo.cg_solve(lambda v: -v, np.ones(4))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 31), st.sampled_from([2.0, 3.0, 4.0]))
def test_B_symmetric_and_coercive(seed, p):
    g = heis(nodes=7)
    rng = np.random.default_rng(seed)
    u = np.abs(random_interior(g, rng))
    w, v = random_interior(g, rng), random_interior(g, rng)
    op = pseudo.BOperator(g, u, p)
    Bw, Bv = op(w), op(v)
    scale = np.linalg.norm(Bw) * np.linalg.norm(v) + np.linalg.norm(w) * np.linalg.norm(Bv)
    assert abs(np.vdot(Bw, v) - np.vdot(w, Bv)) <= 1e-12 * scale
    assert np.vdot(Bw, w) >= np.vdot(w, w) - 1e-12 * np.linalg.norm(Bw) * np.linalg.norm(w)


def test_eigenmode_step_factor():
    g = line(nodes=17, length=1.0)
    h = 1 / 16
    u = np.sin(np.pi * g.coords[0])
    lam = 4 / h ** 2 * np.sin(np.pi * h / 2) ** 2
    dt = 1e-3
    cfg = pseudo.PPConfig(dt=dt, cg_tol=1e-13)
    new = pseudo.step(g, u, cfg, Zero())
    assert np.allclose(new, (1 - dt * lam / (1 + lam)) * u, atol=1e-11)


def test_step_trivial_and_first_order():
    g = cube(nodes=9)
    cfg = pseudo.PPConfig(p=3, cg_tol=1e-13)
    assert np.all(pseudo.step(g, np.zeros(g.shape), cfg, Power(1, 3)) == 0)
    u = 3 * sin_product(g)
    d3 = np.abs(pseudo.step(g, u, cfg, Power(1, 3), dt=1e-3) - u).max()
    d4 = np.abs(pseudo.step(g, u, cfg, Power(1, 3), dt=1e-4) - u).max()
    assert 9 <= d3 / d4 <= 11


def test_config_validation():
    with pytest.raises(InvalidField):
        pseudo.PPConfig(p=1.5)
    with pytest.raises(InvalidField):
        pseudo.PPConfig(cg_tol=0.1)
    with pytest.raises(InvalidField):
        pseudo.PPConfig(picard_iters=6)
    assert pseudo.PPConfig().max_iter(cube(nodes=9)) == int(10 * np.sqrt(729)) + 200


def test_zero_initial_rejected():
    g = cube(nodes=7)
    with pytest.raises(InvalidField):
        pseudo.run(g, np.zeros(g.shape), pseudo.PPConfig(), Zero())


def test_linear_run_decay_rate_and_envelope():
    g = cube(nodes=9)
    u0 = sin_product(g)
    rec = pseudo.run(g, u0, pseudo.PPConfig(t_max=0.5), Zero())
    assert rec.verdict == REACHED_TMAX
    lam_h = 3 * 4 * 8 ** 2 * np.sin(np.pi / 16) ** 2
    rate = lam_h / (1 + lam_h)
    assert rec.final.max() == pytest.approx(np.exp(-rate * 0.5), rel=2e-3)
    F = rec.series["F"]
    assert np.all(F[1:] >= F[:-1] - 1e-6 * np.abs(F[:-1]))
    assert not pseudo.exp_decay_check(rec, 2, 0.0)  # envelope e^{-2t} is faster than the run
    with pytest.raises(DomainError):
        pseudo.exp_decay_check(rec, 2, 0.5)


def test_exp_decay_check_zero_record():
    rec = RunRecord(REACHED_TMAX, 1.0, series={"t": np.array([0.0, 1.0]), "Ip": np.zeros(2)})
    assert pseudo.exp_decay_check(rec, 2, 0.0)


def test_blowup_run_small_grid():
    g = cube(nodes=9)
    rec = pseudo.run(g, 15 * sin_product(g), pseudo.PPConfig(t_max=10), Power(1, 3), gamma=0.1)
    assert rec.verdict == BLEW_UP and np.isfinite(rec.t_num)
    F = rec.series["F"]
    assert np.all(F[1:] >= F[:-1] - 1e-6 * np.abs(F[:-1]))
    assert rec.clamped[1:].sum() == 0


def test_picard_iterations_run():
    g = cube(nodes=9)
    u = 2 * sin_product(g)
    a = pseudo.step(g, u, pseudo.PPConfig(p=4, picard_iters=1), Power(1, 2))
    b = pseudo.step(g, u, pseudo.PPConfig(p=4, picard_iters=3), Power(1, 2))
    assert np.abs(a - b).max() < 1e-2 * np.abs(a - u).max()
