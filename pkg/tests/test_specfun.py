import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dhglevy.errors import DomainError, PoleError
from dhglevy.specfun import (SeriesControl, barnes_g, gamma_ratio, hyp2f1, lgamma_sign, log_barnes_g, log_gamma,
                             log_gamma_ratio, pfq, pochhammer_log_ratio, sinpi)

mpmath.mp.dps = 30
re_part = st.floats(-30, 30, allow_nan=False)
im_part = st.floats(-200, 200, allow_nan=False)


@given(re_part, im_part)
def test_log_gamma_matches_mpmath(x, y):
    z = complex(x, y)
    if abs(y) < 1e-3 and x <= 0 and abs(x - round(x)) < 1e-3:
        return
    ref = complex(mpmath.loggamma(mpmath.mpc(x, y)))
    got = complex(log_gamma(z))
    # compare exp-free: real parts absolutely, imaginary parts mod 2 pi
    assert abs(got.real - ref.real) <= 1e-12 * max(1.0, abs(ref.real))
    d = (got.imag - ref.imag) / (2 * math.pi)
    assert abs(d - round(d)) < 1e-12 * max(1.0, abs(ref.imag))


@pytest.mark.parametrize("z", [0, -1, -7, -30])
def test_log_gamma_poles(z):
    with pytest.raises(PoleError):
        log_gamma(z)


def test_lgamma_sign_alternates_on_negative_axis():
    x = np.array([-0.5, -1.5, -2.5, -3.5, 0.5])
    lg, sign = lgamma_sign(x)
    assert list(sign) == [-1, 1, -1, 1, 1]
    np.testing.assert_allclose(lg, [float(mpmath.log(abs(mpmath.gamma(t)))) for t in x], rtol=1e-14)


def test_lgamma_sign_at_pole():
    lg, sign = lgamma_sign(np.array([-3.0]))
    assert np.isposinf(lg[0]) and sign[0] == 0


@given(st.integers(-50, 50))
def test_sinpi_vanishes_exactly_at_integers(n):
    assert sinpi(n) == 0.0


@given(st.floats(-20, 20), st.floats(-20, 20))
def test_gamma_ratio_against_mpmath(a, b):
    if min(a, b) <= 0:
        a, b = abs(a) + 0.1, abs(b) + 0.1
    got = gamma_ratio([a, b + 0.5j], [a + b, 1.5])
    ref = complex(mpmath.gamma(a) * mpmath.gamma(mpmath.mpc(b, 0.5)) / (mpmath.gamma(a + b) * mpmath.gamma(1.5)))
    assert abs(got - ref) <= 1e-11 * abs(ref)


def test_gamma_ratio_zero_at_denominator_pole():
    assert gamma_ratio([1.5], [-2.0]) == 0.0


def test_log_gamma_ratio_flags_zero():
    val, zero = log_gamma_ratio([1.5], [-3.0])
    assert bool(zero)


def test_pochhammer_log_ratio():
    k = np.arange(6)
    got = np.exp(pochhammer_log_ratio([0.5, 1.2], [2.0], k))
    ref = [float(mpmath.rf(0.5, int(j)) * mpmath.rf(1.2, int(j)) / mpmath.rf(2.0, int(j))) for j in k]
    np.testing.assert_allclose(np.real(got), ref, rtol=1e-13)


@pytest.mark.parametrize("up,lo,z", [
    ([0.5, 1.0], [1.5], 0.3),
    ([0.2, 0.7, 1.1], [1.3, 2.4], -0.8),
    ([1.0, 1.0, 0.5, 0.3], [2.0, 1.7, 2.2], 0.95),
])
def test_pfq_matches_mpmath(up, lo, z):
    res = pfq(up, lo, z)
    ref = float(mpmath.hyper(up, lo, z))
    assert abs(res.value - ref) <= 1e-11 * abs(ref)
    assert res.terms > 0


def test_pfq_rejects_outside_disc():
    with pytest.raises(DomainError):
        pfq([1.0], [2.0], 1.0)


@given(st.floats(0.05, 3), st.floats(0.05, 3), st.floats(0.1, 4), st.floats(0, 0.999999))
def test_hyp2f1_matches_mpmath(a, b, c, z):
    got = float(hyp2f1(a, b, c, z))
    ref = float(mpmath.hyp2f1(a, b, c, z))
    assert abs(got - ref) <= 1e-9 * abs(ref)


def test_hyp2f1_one_minus_z_argument():
    s = 1e-9
    got = float(hyp2f1(0.3, 0.6, 1.4, 1 - s, one_minus_z=s))
    ref = float(mpmath.hyp2f1(0.3, 0.6, 1.4, 1 - mpmath.mpf(s)))
    assert abs(got - ref) <= 1e-10 * abs(ref)


def test_series_control_validation():
    with pytest.raises(ValueError):
        SeriesControl(max_terms=0)
    with pytest.raises(ValueError):
        SeriesControl(rel_tol=2.0)


# ---------------------------------------------------------------------------
# Barnes double gamma: G(1) = 1 plus its two shift relations
# ---------------------------------------------------------------------------

taus = st.floats(0.2, 5.0)
zs = st.floats(0.3, 6.0)


@given(taus)
def test_barnes_normalisation(tau):
    assert abs(barnes_g(1.0, tau) - 1.0) < 1e-13


@given(zs, st.floats(-20, 20), taus)
def test_barnes_unit_shift(x, y, tau):
    z = complex(x, y)
    lhs = log_barnes_g(z + 1, tau) - log_barnes_g(z, tau)
    rhs = complex(mpmath.loggamma(mpmath.mpc(x, y) / tau))
    d = lhs - rhs
    assert abs(d.real) < 1e-10 * max(1, abs(rhs))
    assert abs((d.imag / (2 * math.pi)) - round(d.imag / (2 * math.pi))) < 1e-9


@given(zs, taus)
def test_barnes_tau_shift(x, tau):
    # G(z + tau) = (2 pi)^((tau - 1)/2) tau^(1/2 - z) Gamma(z) G(z)
    lhs = float(np.real(log_barnes_g(x + tau, tau) - log_barnes_g(x, tau)))
    rhs = 0.5 * (tau - 1) * math.log(2 * math.pi) + (0.5 - x) * math.log(tau) + math.lgamma(x)
    assert abs(lhs - rhs) < 1e-10 * max(1.0, abs(rhs))


def test_barnes_zero_at_lattice_point():
    assert np.isneginf(np.real(log_barnes_g(-2.0, 0.7)))


def test_barnes_rejects_nonpositive_tau():
    with pytest.raises(DomainError):
        log_barnes_g(1.0, 0.0)
