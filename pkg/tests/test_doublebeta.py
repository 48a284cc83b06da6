import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dhglevy.doublebeta import (ClassTag, Quadruple, classify, exponent_sum_gap, killing_rate, laplace_exponent,
                                laplace_of_levy_density, laplace_of_potential_density, levy_density,
                                levy_density_residue, potential_density, potential_density_residue,
                                random_interior_quadruple, residue_series, small_jump_constant,
                                small_potential_constant)
from dhglevy.errors import DomainError, ParameterError
from dhglevy.ricochet import bernstein_probe, is_pick_on_samples, upper_half_plane_samples

EXAMPLE = Quadruple(0.5, 1.1, 0.2, 0.9)
interior = st.integers(0, 2**32 - 1).map(lambda k: random_interior_quadruple(np.random.default_rng(k)))


def mp_phi(q, z):
    a, b, g, d = q.as_tuple()
    return mpmath.gamma(z + a) * mpmath.gamma(z + b) / (mpmath.gamma(z + g) * mpmath.gamma(z + d))


def mp_levy_density(q, s):
    """f(s) from the residues of B at -alpha-n and -beta-n, summed term by term in mpmath."""
    a, b, g, d = q.as_tuple()
    s = mpmath.mpf(s)
    n_terms = int(80 / s) + 50

    def family(lead, other):
        total = mpmath.mpf(0)
        for n in range(n_terms):
            res = (-1) ** n / mpmath.factorial(n) * mpmath.gamma(other - lead - n) \
                / (mpmath.gamma(g - lead - n) * mpmath.gamma(d - lead - n))
            total -= res * mpmath.exp(-(lead + n) * s)
        return total

    return float(family(a, b) + family(b, a))


# ---------------------------------------------------------------------------
# classification
# ---------------------------------------------------------------------------

def test_example_is_interior_first_chain():
    c = classify(EXAMPLE)
    assert c.tag is ClassTag.INTERIOR_I and c.k == 0 and c.interior and c.in_G


def test_non_interlacing_control_is_rejected():
    c = classify(Quadruple(0.5, 1.8, 0.2, 0.9))
    assert c.tag is ClassTag.NOT_CB and c.reason
    with pytest.raises(ParameterError):
        exponent_sum_gap(Quadruple(0.5, 1.8, 0.2, 0.9))


def test_zero_parameter_lands_on_boundary():
    c = classify(Quadruple(0.5, 1.0, 0.0, 0.5))
    assert c.tag is ClassTag.BOUNDARY and c.in_G and not c.interior
    assert any("zero" in d for d in c.diagnostics)


@given(interior)
def test_random_interior_quadruples_classify_interior(q):
    c = classify(q)
    assert c.interior
    # the class does not depend on the order within each pair
    assert classify(Quadruple(q.beta, q.alpha, q.delta, q.gamma)).interior


@given(interior)
def test_sum_gap_in_open_unit_interval(q):
    assert 0.0 < exponent_sum_gap(q) < 1.0


def test_parse_and_validation():
    assert Quadruple.parse(" 0.5, 1.1,0.2 ,0.9") == EXAMPLE
    with pytest.raises(ParameterError):
        Quadruple.parse("1,2,3")
    with pytest.raises(ParameterError):
        Quadruple(-0.1, 1, 1, 1)
    with pytest.raises(ParameterError):
        Quadruple(math.inf, 1, 1, 1)


# ---------------------------------------------------------------------------
# the exponent
# ---------------------------------------------------------------------------

@given(interior, st.floats(0.0, 50.0))
def test_laplace_exponent_matches_mpmath(q, z):
    ref = float(mp_phi(q, z))
    assert abs(float(laplace_exponent(q, z)) - ref) <= 1e-12 * ref


def test_cancellation_of_shared_parameters():
    q = Quadruple(0.7, 1.3, 0.7, 1.3)
    assert laplace_exponent(q, np.array([0.0, 2.0, 7.0])).tolist() == [1.0, 1.0, 1.0]
    assert laplace_exponent(Quadruple(0.4, 1.0, 0.4, 0.6), 0.0) == pytest.approx(1 / math.gamma(0.6), rel=1e-14)


@given(interior)
def test_killing_rate_is_value_at_zero(q):
    assert killing_rate(q) == pytest.approx(float(mp_phi(q, 0)), rel=1e-13)


@given(interior)
def test_bernstein_shape_on_positive_axis(q):
    z = np.linspace(0.0, 20.0, 201)
    v = laplace_exponent(q, z)
    assert np.all(v > 0)
    assert np.all(np.diff(v) > 0)
    assert np.all(np.diff(v, 2) < 1e-12 * v[2:])


@given(interior)
def test_pick_property_on_upper_half_plane(q):
    assert is_pick_on_samples(q, upper_half_plane_samples(np.random.default_rng(1), 200))


def test_probe_alternates_for_interior_example():
    rep = bernstein_probe(EXAMPLE, scale=False)
    assert rep.alternates and rep.first_failure is None


def test_conjugate_symmetry():
    z = np.array([0.3 + 2j, 5 + 0.1j])
    np.testing.assert_allclose(laplace_exponent(EXAMPLE, z.conj()), np.conj(laplace_exponent(EXAMPLE, z)))


# ---------------------------------------------------------------------------
# densities
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("s", [0.05, 0.3, 1.0, 4.0])
def test_levy_density_against_mpmath_residues(s):
    assert float(levy_density(EXAMPLE, s)) == pytest.approx(mp_levy_density(EXAMPLE, s), rel=1e-10)


@given(interior, st.floats(0.25, 10.0))
def test_levy_density_closed_form_vs_residue_series(q, s):
    a = float(levy_density(q, s))
    b = float(levy_density_residue(q, s, 500))
    assert a > 0
    assert abs(a - b) <= 1e-8 * abs(a)


@given(interior, st.floats(0.25, 10.0))
def test_potential_density_closed_form_vs_residue_series(q, x):
    a = float(potential_density(q, x))
    b = float(potential_density_residue(q, x, 500))
    assert a > 0
    assert abs(a - b) <= 1e-8 * abs(a)


def test_small_argument_asymptotics():
    g = exponent_sum_gap(EXAMPLE)
    s = 1e-6
    assert float(levy_density(EXAMPLE, s)) * s ** (1 + g) == pytest.approx(small_jump_constant(EXAMPLE), rel=1e-3)
    assert float(potential_density(EXAMPLE, s)) * s ** (1 - g) == pytest.approx(
        small_potential_constant(EXAMPLE), rel=1e-3)


@pytest.mark.parametrize("z", [0.5, 2.0])
def test_laplace_identities(z):
    phi = float(laplace_exponent(EXAMPLE, z))
    assert laplace_of_levy_density(EXAMPLE, z) == pytest.approx(phi, rel=1e-7)
    assert laplace_of_potential_density(EXAMPLE, z) == pytest.approx(1 / phi, rel=1e-7)


def test_residue_series_reproduces_exponent():
    rs = residue_series(EXAMPLE, 200)
    z = np.array([1.0, 2.0, 10.0])
    np.testing.assert_allclose(rs.evaluate(z), laplace_exponent(EXAMPLE, z), rtol=1e-10)
    # without the tail the truncation error is visible
    assert np.max(np.abs(rs.evaluate(z, tail=False) / laplace_exponent(EXAMPLE, z) - 1)) > 1e-8


def test_density_domain_guards():
    with pytest.raises(DomainError):
        levy_density(EXAMPLE, 0.0)
    with pytest.raises(ParameterError):
        levy_density(Quadruple(0.5, 1.0, 0.0, 0.5), 1.0)
