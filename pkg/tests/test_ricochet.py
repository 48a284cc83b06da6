import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from dhglevy.doublebeta import classify, laplace_exponent
from dhglevy.errors import ParameterError
from dhglevy.ricochet import (Degenerate, Form, GluedParameters, PssmpClass, RicochetParameters, Shift,
                              bernstein_probe, esscher_factor_quadruples, esscher_roots, esscher_shifted_exponent,
                              factor_gate, glued_exponent, glued_factors, glued_inf_law_laplace,
                              glued_sup_law_laplace, inf_law_laplace, psi_dagger, psi_star, pssmp_classification,
                              random_ricochet_parameters, sigma_b, sup_law_laplace, t0_mellin, t0_mellin_spec,
                              wh_factors, wh_quadruples, wiener_hopf_condition)

params = st.integers(0, 2**32 - 1).map(lambda k: random_ricochet_parameters(np.random.default_rng(k)))
wh_params = st.integers(0, 2**32 - 1).map(
    lambda k: random_ricochet_parameters(np.random.default_rng(k), require_wh=True))
theta = np.linspace(-10, 10, 41)
MC = RicochetParameters(1.5, 0.4, 0.5)


def test_parameter_validation():
    with pytest.raises(ParameterError):
        RicochetParameters(2.0, 0.5, 0.5)
    with pytest.raises(ParameterError):
        RicochetParameters(1.5, 0.2, 0.5)  # alpha rho^ >= 1
    with pytest.raises(ParameterError):
        RicochetParameters(1.0, 0.3, 0.5)
    with pytest.raises(ParameterError):
        RicochetParameters(1.5, 0.4, 1.5)


@given(params)
def test_three_forms_agree(rp):
    ref = psi_star(rp, theta, Form.BUDD)
    for form in (Form.GAMMA_PRODUCT, Form.CONSTRUCTION):
        got = psi_star(rp, theta, form)
        assert np.max(np.abs(got - ref) / np.maximum(np.abs(ref), 1e-300)) < 1e-9


@given(params)
def test_exponent_vanishes_only_through_killing(rp):
    # Psi*(0) = Gamma(alpha) (1 - p) sin(pi alpha rho^) / pi is the rate of absorption
    v = psi_star(rp, 0.0)
    assert v == pytest.approx(math.gamma(rp.alpha) * (1 - rp.p) * math.sin(math.pi * rp.alpha * rp.rho_hat) / math.pi,
                              rel=1e-12, abs=1e-15)


def test_p_zero_reduces_to_killed_process():
    for a, r in ((0.7, 0.4), (1.5, 0.4), (1.2, 0.5)):
        rp = RicochetParameters(a, r, 0.0)
        np.testing.assert_allclose(psi_star(rp, theta), psi_dagger(a, r, theta), rtol=1e-12)
        assert sigma_b(rp).b == 0.5


@given(st.floats(0.05, 1.95), st.floats(0, 1))
def test_b_limits(a, u):
    lo, hi = max(0.0, 1 - 1 / a), min(1.0, 1 / a)
    rho = lo + (hi - lo) * (0.02 + 0.96 * u)
    assume(abs(a - 1) > 1e-6)
    s1 = sigma_b(RicochetParameters(a, rho, 1.0))
    assert abs(s1.b - abs(s1.sigma)) < 1e-14
    sb = sigma_b(RicochetParameters(a, rho, 0.3))
    assert 0 <= sb.b <= 1 and math.cos(math.pi * sb.b) == pytest.approx(0.3 * math.cos(math.pi * sb.sigma))


@given(params)
def test_wiener_hopf_forms_agree_with_factor_class(rp):
    w = wiener_hopf_condition(rp)
    assert w.interval_form == w.sine_form == factor_gate(rp)
    assert not w.disagreement


@given(wh_params)
def test_factorisation_reproduces_exponent(rp):
    f = wh_factors(rp)
    got = f.prefactor * laplace_exponent(f.plus, -0.5j * theta) * laplace_exponent(f.minus, 0.5j * theta)
    np.testing.assert_allclose(got, psi_star(rp, theta), rtol=1e-10, atol=1e-14)
    assert classify(f.plus).in_G and classify(f.minus).in_G


def test_wh_failure_is_reported():
    rp = RicochetParameters(0.8, 0.3, 0.95)
    assert not wiener_hopf_condition(rp).holds
    assert not classify(wh_quadruples(rp).plus).in_G
    with pytest.raises(ParameterError):
        wh_factors(rp)


@given(wh_params)
def test_extrema_laws_are_laplace_transforms(rp):
    z = np.linspace(0.0, 6.0, 13)
    sup = sup_law_laplace(rp, z)
    assume(not isinstance(sup, Degenerate))
    assert sup[0] == pytest.approx(1.0)
    assert np.all(np.diff(sup) < 0) and np.all(sup > 0)
    # log-convexity in z, as for any E[exp(-z L)]
    assert np.all(np.diff(np.log(sup), 2) > -1e-12)


def test_p_one_degenerate_laws():
    rp = RicochetParameters(0.8, 0.6, 1.0)  # alpha rho^ = 0.32 <= 1/2: the supremum is infinite
    assert sup_law_laplace(rp, 1.0) == Degenerate("infinite")
    assert pssmp_classification(rp) is PssmpClass.DRIFTS
    rp = RicochetParameters(1.2, 0.5, 1.0)  # alpha rho^ = 0.6 >= 1/2
    assert inf_law_laplace(rp, 1.0) == Degenerate("zero")
    assert pssmp_classification(rp) is PssmpClass.ABSORBED
    with pytest.raises(ParameterError):
        pssmp_classification(MC)


@given(wh_params)
def test_esscher_roots_are_zeros(rp):
    for which, root in zip((Shift.PLUS, Shift.MINUS), esscher_roots(rp)):
        assert abs(psi_star(rp, root)) < 1e-10
        got = esscher_shifted_exponent(rp, theta, which)
        np.testing.assert_allclose(got, psi_star(rp, theta + root), rtol=1e-9, atol=1e-12)


def test_esscher_factors_are_bernstein():
    for which in Shift:
        up, dn = esscher_factor_quadruples(MC, which)
        assert classify(up).in_G and classify(dn).in_G
        assert bernstein_probe(up).alternates and bernstein_probe(dn).alternates


@pytest.mark.parametrize("a", [0.5, 0.8, 1.2, 1.6, 1.9])
def test_glued_reduces_to_symmetric_killed_process(a):
    np.testing.assert_allclose(glued_exponent(GluedParameters(a, 0.0), theta), psi_dagger(a, 0.5, theta), rtol=1e-10)


@pytest.mark.parametrize("a,q", [(0.8, 0.3), (1.2, 0.5), (1.6, 0.9)])
def test_glued_factors_in_class(a, q):
    f1, f2 = glued_factors(GluedParameters(a, q))
    assert classify(f1).in_G and classify(f2).in_G


@given(st.floats(0.1, 1.9), st.floats(0.0, 0.99))
def test_glued_laws_at_zero(a, q):
    gp = GluedParameters(a, q)
    assert glued_sup_law_laplace(gp, 0.0) == pytest.approx(1.0)
    assert glued_inf_law_laplace(gp, 0.0) == pytest.approx(1.0)


def test_glued_at_q_zero_matches_ricochet_p_zero():
    gp, rp = GluedParameters(1.2, 0.0), RicochetParameters(1.2, 0.5, 0.0)
    z = np.array([0.5, 1.0, 2.0])
    np.testing.assert_allclose(glued_sup_law_laplace(gp, z), sup_law_laplace(rp, z), rtol=1e-12)
    np.testing.assert_allclose(glued_inf_law_laplace(gp, z), inf_law_laplace(rp, z), rtol=1e-12)


def test_t0_mellin_normalised_and_scaled():
    assert t0_mellin(MC, 1.0) == pytest.approx(1.0, abs=1e-12)
    spec = t0_mellin_spec(MC)
    assert spec.c == pytest.approx(2 / MC.alpha)
    s = 1.25
    # T0 = 2^-alpha I
    from dhglevy.expfunctional import mellin
    assert t0_mellin(MC, s) == pytest.approx(2 ** (-MC.alpha * (s - 1)) * mellin(spec, s))


def test_probe_flags_non_bernstein_function():
    rep = bernstein_probe(lambda z: z**2, n_derivatives=3)
    assert not rep.alternates and rep.first_failure == 2
