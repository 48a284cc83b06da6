import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dhglevy.errors import DomainError, ParameterError
from dhglevy.ricochet import RicochetParameters, psi_star
from dhglevy.rssmp import (MatrixForm, Phase, RssmpParameters, chi_prime_zero, classify_phase, hits_zero_continuously,
                           hits_zero_forms, matrix_exponent, perron_eigenvalue, phase_scan, random_rssmp_parameters,
                           real_matrix)

params = st.integers(0, 2**32 - 1).map(lambda k: random_rssmp_parameters(np.random.default_rng(k)))


def test_validation():
    with pytest.raises(ParameterError):
        RssmpParameters(1.5, 0.4, 1.0, 0.2)
    with pytest.raises(ParameterError):
        RssmpParameters(1.5, 0.1, 0.2, 0.2)


@given(params)
def test_sine_and_gamma_forms_agree(rs):
    th = np.linspace(-5, 5, 21)
    a = matrix_exponent(rs, th, MatrixForm.SINE)
    b = matrix_exponent(rs, th, MatrixForm.GAMMA)
    assert np.max(np.abs(a - b) / np.maximum(np.abs(a), 1e-300)) < 1e-9


@given(params)
def test_zero_row_sums_at_origin(rs):
    m = real_matrix(rs, 0.0)
    np.testing.assert_allclose(m.sum(axis=1), 0.0, atol=1e-14)
    assert abs(perron_eigenvalue(rs, 0.0)) < 1e-12


@given(params)
def test_real_matrix_matches_complex(rs):
    for t in (-0.5, 0.0, 0.3 * rs.alpha):
        np.testing.assert_allclose(real_matrix(rs, t), np.real(matrix_exponent(rs, -1j * t)), rtol=1e-12, atol=1e-14)


@given(params)
def test_chi_prime_against_finite_difference(rs):
    h = 1e-5
    fd = (perron_eigenvalue(rs, h) - perron_eigenvalue(rs, -h)) / (2 * h)
    assert abs(fd - chi_prime_zero(rs)) < 1e-6 * max(1.0, abs(fd))


@given(st.floats(0.1, 1.9), st.floats(0, 1), st.floats(0, 0.99))
def test_equal_probabilities_identity(a, u, p):
    lo, hi = max(0.0, 1 - 1 / a), min(1.0, 1 / a)
    rho = lo + (hi - lo) * (0.02 + 0.96 * u)
    if abs(a - 1) < 1e-6:
        rho = 0.5
    rs = RssmpParameters(a, rho, p, p)
    lhs = chi_prime_zero(rs) * (math.sin(math.pi * a * rho) + math.sin(math.pi * a * (1 - rho)))
    assert lhs == pytest.approx(math.gamma(a) * math.sin(math.pi * a), abs=1e-10)


@given(params)
def test_phase_follows_sign_of_chi_prime(rs):
    forms = hits_zero_forms(rs)
    assert not forms.disagreement or abs(chi_prime_zero(rs)) < 1e-8
    assert hits_zero_continuously(rs) == (chi_prime_zero(rs) < 0)
    expected = Phase.HITS_ZERO if chi_prime_zero(rs) < 0 else Phase.DRIFTS
    assert classify_phase(rs) is expected


def test_diagonal_entry_is_the_positive_ricochet_exponent():
    # the (1, 1) entry is minus the exponent of the positive-valued process with the same p
    rs = RssmpParameters(1.5, 0.4, 0.3, 0.6)
    th = np.linspace(-3, 3, 7)
    m = matrix_exponent(rs, th)
    np.testing.assert_allclose(-m[:, 0, 0], psi_star(RicochetParameters(1.5, 0.4, 0.3), th), rtol=1e-10)


def test_perron_domain():
    rs = RssmpParameters(1.5, 0.4, 0.3, 0.6)
    with pytest.raises(DomainError):
        perron_eigenvalue(rs, 1.6)


def test_phase_scan_shape_and_labels():
    out = phase_scan(1.5, 0.4, [0.0, 0.5, 0.9], [0.0, 0.9])
    assert out.shape == (3, 2)
    assert set(out.ravel()) <= {p.value for p in Phase}
    # alpha < 1: chi'(0) > 0 at p = phat, so the process drifts away from zero
    assert set(phase_scan(0.7, 0.5, [0.2], [0.2]).ravel()) == {Phase.DRIFTS.value}
