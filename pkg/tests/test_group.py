import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stratlab.errors import InvalidDimension, InvalidGroup, InvalidIndex, InvalidScale
from stratlab.group import (StratifiedGroup, coeff_vector, dilate, homogeneous_dimension,
                            make_euclidean, make_heisenberg)


def test_euclidean_shapes():
    g = make_euclidean(3)
    assert (g.n1, g.n, g.step) == (3, 3, 1)
    assert g.coeffs == {}
    g1 = make_euclidean(1)
    assert (g1.n1, g1.n) == (1, 1)


@pytest.mark.parametrize("maker", [make_euclidean, make_heisenberg])
def test_zero_dimension_rejected(maker):
    with pytest.raises(InvalidDimension):
        maker(0)


def test_heisenberg_shapes_and_coefficients():
    g = make_heisenberg(1)
    assert g.strata_dims == (2, 1) and g.n == 3
    x = np.array([[0.4], [1.0], [-2.0]])
    assert g.coefficient(0, 2, x)[0] == pytest.approx(-0.5)
    assert g.coefficient(1, 2, x)[0] == pytest.approx(0.2)
    g2 = make_heisenberg(2)
    assert g2.strata_dims == (4, 1) and g2.n == 5


def test_heisenberg_commutator_is_dz():
    # [X1, X2] = (d_x a_2 - d_y a_1) dz = (1/2 + 1/2) dz
    g = make_heisenberg(1)
    eps = 1e-6
    x0 = np.array([0.3, -0.7, 1.1])
    d_a2_dx = (g.coefficient(1, 2, (x0 + [eps, 0, 0]).reshape(3, 1))
               - g.coefficient(1, 2, (x0 - [eps, 0, 0]).reshape(3, 1)))[0] / (2 * eps)
    d_a1_dy = (g.coefficient(0, 2, (x0 + [0, eps, 0]).reshape(3, 1))
               - g.coefficient(0, 2, (x0 - [0, eps, 0]).reshape(3, 1)))[0] / (2 * eps)
    assert d_a2_dx - d_a1_dy == pytest.approx(1.0)


def test_dilate_examples():
    assert np.allclose(dilate(make_heisenberg(1), 2, [1, 1, 1]), [2, 2, 4])
    assert np.allclose(dilate(make_euclidean(3), 0.5, [2, 2, 2]), [1, 1, 1])
    x = np.array([0.3, -1.2, 5.0])
    assert np.array_equal(dilate(make_heisenberg(1), 1, x), x)
    with pytest.raises(InvalidScale):
        dilate(make_euclidean(3), 0, [1, 1, 1])
    with pytest.raises(InvalidDimension):
        dilate(make_euclidean(3), 2, [1, 1])


def test_coeff_vector_examples():
    assert np.allclose(coeff_vector(make_euclidean(3), 0, [0.1, 0.2, 0.3]), [1, 0, 0])
    h = make_heisenberg(1)
    assert np.allclose(coeff_vector(h, 0, [0.4, 1.0, -2.0]), [1, 0, -0.5])
    assert np.allclose(coeff_vector(h, 1, [0.4, 1.0, -2.0]), [0, 1, 0.2])
    with pytest.raises(InvalidIndex):
        coeff_vector(h, 2, [0, 0, 0])


def test_homogeneous_dimension():
    assert homogeneous_dimension(make_euclidean(3)) == 3
    assert homogeneous_dimension(make_heisenberg(1)) == 4
    assert homogeneous_dimension(make_heisenberg(2)) == 6


def test_stratification_violation_rejected():
    # coefficient of d/dz may not depend on z itself
    with pytest.raises(InvalidGroup):
        StratifiedGroup((2, 1), {(0, 2): ((1.0, (0, 0, 1)),)})
    with pytest.raises(InvalidGroup):
        StratifiedGroup((2, 1), {(0, 1): ((1.0, (1, 0, 0)),)})


def test_rank_condition_checked_for_builtins():
    with pytest.raises(InvalidGroup):
        StratifiedGroup((2, 1), {}, check_rank=True)
    assert make_heisenberg(3)._bracket_generating()


SCALES = st.sampled_from([0.5, 1.0, 2.0, 3.0])
POINTS = st.lists(st.floats(-10, 10, allow_nan=False), min_size=5, max_size=5)


@given(SCALES, SCALES, POINTS)
def test_dilation_composition(lam, mu, x):
    g = make_heisenberg(2)
    x = np.array(x)
    a, b = dilate(g, lam, dilate(g, mu, x)), dilate(g, lam * mu, x)
    if {lam, mu} <= {0.5, 1.0, 2.0}:
        assert np.array_equal(a, b)  # powers of two scale without rounding
    else:
        assert np.all(np.abs(a - b) <= 2 * np.spacing(np.abs(b)))


@settings(max_examples=50)
@given(POINTS, st.floats(-10, 10, allow_nan=False))
def test_coefficients_ignore_own_stratum(x, z):
    g = make_heisenberg(2)
    x = np.array(x)
    y = x.copy()
    y[4] = z
    for k in range(g.n1):
        assert np.array_equal(coeff_vector(g, k, x), coeff_vector(g, k, y))
