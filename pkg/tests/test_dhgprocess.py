import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dhglevy.dhgprocess import (DhgParameters, LongTermBehavior, characteristic_exponent, gaussian_component,
                                growth_index_fit, laplace_exponent_psi, levy_density_two_sided,
                                log_characteristic_exponent, long_term_behavior, psi_derivative_at_zero,
                                two_sided_residue_density)
from dhglevy.doublebeta import Quadruple, laplace_exponent, random_interior_quadruple
from dhglevy.errors import ParameterError

EXAMPLE = Quadruple(0.5, 1.1, 0.2, 0.9)
BOUNDARY_ZERO = Quadruple(0.5, 1.0, 0.0, 0.5)


def _pair(seed):
    rng = np.random.default_rng(seed)
    return DhgParameters(random_interior_quadruple(rng), random_interior_quadruple(rng))


pairs = st.integers(0, 2**32 - 1).map(_pair)
thetas = st.floats(-50, 50)


def test_rejects_factor_outside_class():
    with pytest.raises(ParameterError):
        DhgParameters(Quadruple(0.5, 1.8, 0.2, 0.9), EXAMPLE)


@given(pairs, thetas)
def test_exponent_is_product_of_factors(p, th):
    ref = laplace_exponent(p.plus, -1j * th) * laplace_exponent(p.minus, 1j * th)
    assert characteristic_exponent(p, th) == pytest.approx(ref, rel=1e-13)


@given(pairs, thetas)
def test_hermitian_symmetry(p, th):
    assert characteristic_exponent(p, -th) == pytest.approx(np.conj(characteristic_exponent(p, th)), rel=1e-12)


@given(pairs, thetas)
def test_psi_on_imaginary_axis(p, th):
    assert laplace_exponent_psi(p, 1j * th) == pytest.approx(-characteristic_exponent(p, th), rel=1e-12)


@given(pairs, st.floats(-200, 200))
def test_real_part_nonnegative(p, th):
    assert np.real(characteristic_exponent(p, th)) >= 0


@given(pairs)
def test_log_exponent_agrees_with_direct(p):
    th = np.linspace(-30, 30, 13)
    np.testing.assert_allclose(np.exp(log_characteristic_exponent(p, th)), characteristic_exponent(p, th),
                               rtol=1e-11)


@given(pairs)
def test_growth_index(p):
    assert growth_index_fit(p) == pytest.approx(p.index, abs=0.02)


def test_gaussian_boundary_pair_grows_quadratically():
    p = DhgParameters(Quadruple(0.5, 1.2, 0.2, 0.5), Quadruple(0.5, 1.3, 0.3, 0.5))
    assert gaussian_component(p) == 2.0
    assert growth_index_fit(p) == pytest.approx(2.0, abs=1e-6)
    assert gaussian_component(DhgParameters(EXAMPLE, EXAMPLE)) == 0.0


@given(pairs, st.floats(0.3, 6.0))
def test_two_sided_density_matches_residue_expansion(p, x):
    for sgn in (1.0, -1.0):
        a = float(levy_density_two_sided(p, sgn * x))
        b = float(two_sided_residue_density(p, sgn * x, 300))
        assert a > 0
        assert abs(a - b) <= 1e-8 * a


@given(pairs, st.floats(0.1, 5.0))
def test_swapping_factors_mirrors_the_density(p, x):
    assert float(levy_density_two_sided(p.swapped(), -x)) == pytest.approx(
        float(levy_density_two_sided(p, x)), rel=1e-11)


def test_long_term_behaviour():
    assert long_term_behavior(DhgParameters(EXAMPLE, EXAMPLE)) is LongTermBehavior.KILLED
    assert long_term_behavior(DhgParameters(BOUNDARY_ZERO, EXAMPLE)) is LongTermBehavior.DRIFTS_PLUS
    assert long_term_behavior(DhgParameters(EXAMPLE, BOUNDARY_ZERO)) is LongTermBehavior.DRIFTS_MINUS
    assert long_term_behavior(DhgParameters(BOUNDARY_ZERO, BOUNDARY_ZERO)) is LongTermBehavior.OSCILLATES


def test_derivative_at_zero_matches_finite_difference():
    p = DhgParameters(EXAMPLE, Quadruple(0.4, 1.3, 0.3, 0.8))
    h = 1e-6
    fd = float(np.real(laplace_exponent_psi(p, h) - laplace_exponent_psi(p, -h))) / (2 * h)
    assert psi_derivative_at_zero(p) == pytest.approx(fd, rel=1e-7)
