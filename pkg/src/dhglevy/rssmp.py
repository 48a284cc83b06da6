"""Real-valued ricocheted stable process.

Crossings from (0, inf) to (-inf, 0) are reflected with probability p and
crossings the other way with probability p^; otherwise the path continues.
Through the Lamperti-Kiu transform this is a Markov additive process with
two phases (state 1 = positive half-line, state -1 = negative half-line) and
matrix exponent

    Psi*(theta) = Gamma(alpha - i theta) Gamma(1 + i theta) / pi
        [[p sin(pi a^) - sin(pi (a^ - i theta)),  (1 - p) sin(pi a^)],
         [(1 - p^) sin(pi a),  p^ sin(pi a) - sin(pi (a - i theta))]],

with a = alpha rho, a^ = alpha rho^.  On the real axis Psi*(-i theta) has
zero row sums at theta = 0 and its Perron-Frobenius eigenvalue chi(theta)
has chi(0) = 0; the sign of chi'(0) decides between drifting to infinity,
oscillation and continuous absorption at 0.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np

from .errors import DomainError, ParameterError
from .ricochet import TOL, _check_stable
from .specfun import gamma_ratio

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RssmpParameters:
    alpha: float
    rho: float
    p: float
    phat: float

    def __post_init__(self):
        _check_stable(self.alpha, self.rho)
        if not (0.0 <= self.p < 1.0 and 0.0 <= self.phat < 1.0):
            raise ParameterError("p and phat must lie in [0, 1)")

    @property
    def rho_hat(self) -> float:
        return 1.0 - self.rho


class MatrixForm(str, Enum):
    SINE = "SineForm"
    GAMMA = "GammaForm"


class Phase(str, Enum):
    HITS_ZERO = "HitsZero"
    DRIFTS = "DriftsToInfinity"
    OSCILLATES = "Oscillates"


def _sb(alpha: float, ar_hat: float, p: float) -> tuple[float, float]:
    sigma = 0.5 - ar_hat
    b = 0.5 if p == 0.0 else math.acos(p * math.cos(math.pi * sigma)) / math.pi
    return sigma, b


def _sine_form(rs: RssmpParameters, th):
    a = rs.alpha
    ar, arh = a * rs.rho, a * rs.rho_hat
    s1, s2 = math.sin(math.pi * arh), math.sin(math.pi * ar)
    g = gamma_ratio([a - 1j * th, 1 + 1j * th], []) / math.pi
    m = np.empty(th.shape + (2, 2), dtype=complex)
    m[..., 0, 0] = g * (rs.p * s1 - np.sin(math.pi * (arh - 1j * th)))
    m[..., 0, 1] = g * (1 - rs.p) * s1
    m[..., 1, 0] = g * (1 - rs.phat) * s2
    m[..., 1, 1] = g * (rs.phat * s2 - np.sin(math.pi * (ar - 1j * th)))
    return m


def _factor_pair(alpha: float, sigma: float, b: float, th, at_zero: bool):
    lam = 0.5j * th
    lo = 0.0 if at_zero else lam
    left = gamma_ratio([0.5 + lam, 1 + lam], [(sigma + b) / 2 + lo, (sigma - b) / 2 + 1 + lo])
    right = gamma_ratio([alpha / 2 - lam, (1 + alpha) / 2 - lam],
                        [(b - sigma) / 2 - (0.0 if at_zero else lam), (2 - sigma - b) / 2 - (0.0 if at_zero else lam)])
    return left * right


def _gamma_form(rs: RssmpParameters, th):
    a = rs.alpha
    s, b = _sb(a, a * rs.rho_hat, rs.p)
    sh, bh = _sb(a, a * rs.rho, rs.phat)
    m = np.empty(th.shape + (2, 2), dtype=complex)
    m[..., 0, 0] = _factor_pair(a, s, b, th, False)
    m[..., 0, 1] = -_factor_pair(a, s, b, th, True)
    m[..., 1, 0] = -_factor_pair(a, sh, bh, th, True)
    m[..., 1, 1] = _factor_pair(a, sh, bh, th, False)
    return -(2.0**a) * m


def matrix_exponent(rs: RssmpParameters, theta, form: MatrixForm | str = MatrixForm.SINE) -> np.ndarray:
    """2x2 matrix exponent at theta (array input gives a stack of matrices)."""
    th = np.asarray(theta, dtype=complex)
    form = MatrixForm(form)
    out = _sine_form(rs, th) if form is MatrixForm.SINE else _gamma_form(rs, th)
    return out


def real_matrix(rs: RssmpParameters, theta: float) -> np.ndarray:
    """Psi*(-i theta) for real theta, evaluated in real arithmetic."""
    a = rs.alpha
    ar, arh = a * rs.rho, a * rs.rho_hat
    if not -1.0 < theta < a:
        raise DomainError("Perron regime needs -1 < theta < alpha")
    s1, s2 = math.sin(math.pi * arh), math.sin(math.pi * ar)
    g = math.gamma(a - theta) * math.gamma(1 + theta) / math.pi
    return np.array([
        [g * (rs.p * s1 - math.sin(math.pi * (arh - theta))), g * (1 - rs.p) * s1],
        [g * (1 - rs.phat) * s2, g * (rs.phat * s2 - math.sin(math.pi * (ar - theta)))],
    ])


def perron_eigenvalue(rs: RssmpParameters, theta: float) -> float:
    """Largest real eigenvalue of Psi*(-i theta), from the quadratic formula."""
    m = real_matrix(rs, float(theta))
    (a, b), (c, d) = m
    if not (b > 0 and c > 0):
        raise DomainError("off-diagonal entries must be positive in the Perron regime")
    half_tr = 0.5 * (a + d)
    disc = (0.5 * (a - d)) ** 2 + b * c
    root = math.sqrt(disc)
    if half_tr >= 0:
        return half_tr + root
    # avoid cancellation: the product of the eigenvalues is the determinant
    return (a * d - b * c) / (half_tr - root)


def chi_prime_zero(rs: RssmpParameters) -> float:
    a = rs.alpha
    s2, s1 = math.sin(math.pi * a * rs.rho), math.sin(math.pi * a * rs.rho_hat)
    c2, c1 = math.cos(math.pi * a * rs.rho), math.cos(math.pi * a * rs.rho_hat)
    num = (1 - rs.phat) * s2 * c1 + (1 - rs.p) * s1 * c2
    den = (1 - rs.phat) * s2 + (1 - rs.p) * s1
    return math.gamma(a) * num / den


class HitZeroForms(NamedTuple):
    numerator_form: bool
    sine_form: bool
    disagreement: bool


def hits_zero_forms(rs: RssmpParameters) -> HitZeroForms:
    a = rs.alpha
    s2, s1 = math.sin(math.pi * a * rs.rho), math.sin(math.pi * a * rs.rho_hat)
    c2, c1 = math.cos(math.pi * a * rs.rho), math.cos(math.pi * a * rs.rho_hat)
    num = (1 - rs.phat) * s2 * c1 + (1 - rs.p) * s1 * c2
    alt = math.sin(math.pi * a) < rs.phat * s2 * c1 + rs.p * s1 * c2
    first = num < 0
    return HitZeroForms(first, alt, first != alt)


def hits_zero_continuously(rs: RssmpParameters) -> bool:
    forms = hits_zero_forms(rs)
    if forms.disagreement:
        log.warning("hit-zero forms disagree at %s (rounding near the boundary)", rs)
    return forms.numerator_form


def classify_phase(rs: RssmpParameters, tol: float = TOL) -> Phase:
    cp = chi_prime_zero(rs)
    if abs(cp) <= tol:
        return Phase.OSCILLATES
    return Phase.DRIFTS if cp > 0 else Phase.HITS_ZERO


def phase_scan(alpha: float, rho: float, p_grid, phat_grid) -> np.ndarray:
    """Phase labels on the (p, phat) grid; rows follow p_grid, columns phat_grid."""
    p_grid, phat_grid = list(p_grid), list(phat_grid)
    out = np.empty((len(p_grid), len(phat_grid)), dtype=object)
    for i, p in enumerate(p_grid):
        for j, ph in enumerate(phat_grid):
            out[i, j] = classify_phase(RssmpParameters(alpha, rho, float(p), float(ph))).value
    return out


def random_rssmp_parameters(rng: np.random.Generator) -> RssmpParameters:
    while True:
        a = float(rng.uniform(0.05, 1.95))
        lo, hi = max(0.0, 1.0 - 1.0 / a), min(1.0, 1.0 / a)
        rho = float(rng.uniform(lo, hi))
        if min(a * rho, a * (1 - rho)) < 1e-3 or max(a * rho, a * (1 - rho)) > 1 - 1e-3:
            continue
        try:
            return RssmpParameters(a, rho, float(rng.uniform(0, 0.999)), float(rng.uniform(0, 0.999)))
        except ParameterError:
            continue
