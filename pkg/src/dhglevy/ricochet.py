"""Ricocheted and glued stable processes.

A stable process with index alpha and positivity parameter rho that, on each
crossing into (-inf, 0), is reflected to |X| with probability p and otherwise
absorbed at 0, is a positive self-similar Markov process.  The Levy process
xi* underlying it through the Lamperti transform has exponent

    Psi*(theta) = Gamma(alpha - i theta) Gamma(1 + i theta) / pi
                  * [sin(pi (alpha rho^ - i theta)) - p sin(pi alpha rho^)],

which factorises with sigma = 1/2 - alpha rho^ and b = arccos(p cos(pi sigma)) / pi as

    Psi*(theta) = 2^alpha B(plus; -i theta/2) B(minus; i theta/2),
    plus  = (alpha/2, (1+alpha)/2, (b-sigma)/2, (2-sigma-b)/2),
    minus = (1/2, 1, (sigma+b)/2, (sigma-b)/2 + 1).

plus is the ascending ladder factor; it lies in G exactly when
p sin(pi alpha rho^) <= sin(pi alpha rho).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, NamedTuple

import numpy as np

from .dhgprocess import DhgParameters
from .doublebeta import Quadruple, classify, laplace_exponent
from .errors import ConvergenceError, ParameterError
from .expfunctional import MellinSpec, mellin
from .specfun import gamma_ratio

TOL = 1e-12


@dataclass(frozen=True)
class RicochetParameters:
    alpha: float
    rho: float
    p: float

    def __post_init__(self):
        _check_stable(self.alpha, self.rho)
        if not 0.0 <= self.p <= 1.0:
            raise ParameterError("ricochet probability p must lie in [0, 1]")

    @property
    def rho_hat(self) -> float:
        return 1.0 - self.rho


def _check_stable(alpha: float, rho: float) -> None:
    if not 0.0 < alpha < 2.0:
        raise ParameterError("alpha must lie in (0, 2)")
    if not (0.0 < alpha * rho < 1.0 and 0.0 < alpha * (1.0 - rho) < 1.0):
        raise ParameterError("need 0 < alpha rho < 1 and 0 < alpha (1 - rho) < 1")
    if abs(alpha - 1.0) < TOL and abs(rho - 0.5) > TOL:
        raise ParameterError("alpha = 1 requires rho = 1/2")


@dataclass(frozen=True)
class SigmaB:
    sigma: float
    b: float


@dataclass(frozen=True)
class GluedParameters:
    alpha: float
    q: float

    def __post_init__(self):
        if not 0.0 < self.alpha < 2.0:
            raise ParameterError("alpha must lie in (0, 2)")
        if not 0.0 <= self.q < 1.0:
            raise ParameterError("gluing probability q must lie in [0, 1)")

    @property
    def gamma_glue(self) -> float:
        return math.asin(math.sqrt(self.q) * math.sin(0.5 * math.pi * self.alpha)) / math.pi


class Form(str, Enum):
    BUDD = "Budd"
    GAMMA_PRODUCT = "GammaProduct"
    CONSTRUCTION = "Construction"


class Shift(str, Enum):
    PLUS = "PlusShift"
    MINUS = "MinusShift"


@dataclass(frozen=True)
class Degenerate:
    kind: str  # "infinite" or "zero"


class PssmpClass(str, Enum):
    ABSORBED = "AbsorbedAtZero"
    OSCILLATES = "Oscillates"
    DRIFTS = "DriftsToInfinity"


def sigma_b(rp: RicochetParameters) -> SigmaB:
    sigma = 0.5 - rp.alpha * rp.rho_hat
    if rp.p == 0.0:
        b = 0.5
    elif rp.p == 1.0:
        b = abs(sigma)
    else:
        b = math.acos(rp.p * math.cos(math.pi * sigma)) / math.pi
    return SigmaB(sigma, b)


# ---------------------------------------------------------------------------
# the exponent in three forms
# ---------------------------------------------------------------------------

def psi_dagger(alpha: float, rho: float, theta):
    """Exponent of the Lamperti-stable process of the stable process killed on leaving (0, inf)."""
    th = np.asarray(theta, dtype=complex)
    ar = alpha * (1.0 - rho)
    return gamma_ratio([alpha - 1j * th, 1 + 1j * th], [ar - 1j * th, 1 - ar + 1j * th])


def _budd(rp: RicochetParameters, th):
    a, ar = rp.alpha, rp.alpha * rp.rho_hat
    pref = gamma_ratio([a - 1j * th, 1 + 1j * th], []) / math.pi
    return pref * (np.sin(math.pi * (ar - 1j * th)) - rp.p * math.sin(math.pi * ar))


def _gamma_product(rp: RicochetParameters, th):
    f = wh_quadruples(rp)
    up, dn = f.plus.as_tuple(), f.minus.as_tuple()
    lam_up = -0.5j * th
    lam_dn = 0.5j * th
    val = gamma_ratio([lam_up + up[0], lam_up + up[1], lam_dn + dn[0], lam_dn + dn[1]],
                      [lam_up + up[2], lam_up + up[3], lam_dn + dn[2], lam_dn + dn[3]])
    return 2.0**rp.alpha * val


def _construction(rp: RicochetParameters, th):
    a, ar = rp.alpha, rp.alpha * rp.rho_hat
    q_dag = math.gamma(a) / (math.gamma(ar) * math.gamma(1 - ar))
    overshoot = gamma_ratio([a - 1j * th, 1 + 1j * th], [a])
    return psi_dagger(a, rp.rho, th) - q_dag * rp.p * overshoot


def psi_star(rp: RicochetParameters, theta, form: Form | str = Form.BUDD):
    th = np.asarray(theta, dtype=complex)
    form = Form(form)
    if form is Form.BUDD:
        out = _budd(rp, th)
    elif form is Form.GAMMA_PRODUCT:
        out = _gamma_product(rp, th)
    else:
        out = _construction(rp, th)
    out = np.asarray(out, dtype=complex)
    return out[()] if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Wiener-Hopf structure
# ---------------------------------------------------------------------------

class WHCondition(NamedTuple):
    holds: bool
    interval_form: bool
    sine_form: bool
    disagreement: bool


def wiener_hopf_condition(rp: RicochetParameters) -> WHCondition:
    sb = sigma_b(rp)
    s, b = sb.sigma, sb.b
    interval = (1 - s - b) - TOL <= rp.alpha <= (b - s + 1) + TOL
    lhs = rp.p * math.sin(math.pi * rp.alpha * rp.rho_hat)
    rhs = math.sin(math.pi * rp.alpha * rp.rho)
    sine = lhs <= rhs + TOL
    return WHCondition(sine, interval, sine, interval != sine)


class WHFactors(NamedTuple):
    plus: Quadruple
    minus: Quadruple
    half_argument: bool
    prefactor: float


def wh_quadruples(rp: RicochetParameters) -> WHFactors:
    """The two gamma-ratio factors of Psi*, whether or not they are Bernstein."""
    sb = sigma_b(rp)
    s, b, a = sb.sigma, sb.b, rp.alpha
    plus = Quadruple(a / 2, (1 + a) / 2, max(0.0, (b - s) / 2), (2 - s - b) / 2)
    minus = Quadruple(0.5, 1.0, max(0.0, (s + b) / 2), (s - b) / 2 + 1)
    return WHFactors(plus, minus, True, 2.0**a)


def wh_factors(rp: RicochetParameters) -> WHFactors:
    """Ladder factors: Psi*(theta) = prefactor * B(plus; -i theta/2) * B(minus; i theta/2)."""
    if not wiener_hopf_condition(rp).holds:
        raise ParameterError("Wiener-Hopf condition p sin(pi alpha rho^) <= sin(pi alpha rho) fails")
    return wh_quadruples(rp)


def sup_law_laplace(rp: RicochetParameters, z):
    """E[(sup Y* / Y_0)^(-z)] = Phi+(0) / Phi+(z), Phi+ = B(plus; ./2)."""
    f = wh_factors(rp)
    if rp.p == 1.0 and rp.alpha * rp.rho_hat <= 0.5:
        return Degenerate("infinite")
    za = np.asarray(z, dtype=float)
    num = laplace_exponent(f.plus, 0.0)
    return num / laplace_exponent(f.plus, za / 2)


def inf_law_laplace(rp: RicochetParameters, z):
    """E[(Y_0 / inf Y*)^(-z)] = Phi-(0) / Phi-(z), Phi- = B(minus; ./2)."""
    f = wh_factors(rp)
    if rp.p == 1.0 and rp.alpha * rp.rho_hat >= 0.5:
        return Degenerate("zero")
    za = np.asarray(z, dtype=float)
    return laplace_exponent(f.minus, 0.0) / laplace_exponent(f.minus, za / 2)


def pssmp_classification(rp: RicochetParameters) -> PssmpClass:
    if rp.p != 1.0:
        raise ParameterError("classification into absorbed/oscillating/drifting needs p = 1")
    s = sigma_b(rp).sigma
    if abs(s) <= TOL:
        return PssmpClass.OSCILLATES
    return PssmpClass.ABSORBED if s < 0 else PssmpClass.DRIFTS


# ---------------------------------------------------------------------------
# glued process and Esscher transforms
# ---------------------------------------------------------------------------

def glued_factors(gp: GluedParameters) -> tuple[Quadruple, Quadruple]:
    a, g = gp.alpha, gp.gamma_glue
    return (Quadruple(a / 2, a, a / 2 - g, a / 2 + g), Quadruple(1 - a / 2, 1.0, 1 - g - a / 2, 1 + g - a / 2))


def glued_exponent(gp: GluedParameters, theta):
    th = np.asarray(theta, dtype=float)
    f1, f2 = glued_factors(gp)
    out = np.asarray(laplace_exponent(f1, -1j * th) * laplace_exponent(f2, 1j * th), dtype=complex)
    return out[()] if out.ndim == 0 else out


def glued_sup_law_laplace(gp: GluedParameters, z):
    """E[(sup Y / Y_0)^(-z)] for the glued process: B(f1; 0) / B(f1; z)."""
    f1, _ = glued_factors(gp)
    return laplace_exponent(f1, 0.0) / laplace_exponent(f1, np.asarray(z, dtype=float))


def glued_inf_law_laplace(gp: GluedParameters, z):
    """E[(Y_0 / inf Y)^(-z)] for the glued process: B(f2; 0) / B(f2; z)."""
    _, f2 = glued_factors(gp)
    return laplace_exponent(f2, 0.0) / laplace_exponent(f2, np.asarray(z, dtype=float))


def esscher_roots(rp: RicochetParameters) -> tuple[complex, complex]:
    sb = sigma_b(rp)
    return (1j * (sb.b + sb.sigma), -1j * (sb.b - sb.sigma))


def _esscher_shift(rp: RicochetParameters, which: Shift) -> tuple[float, float]:
    sb = sigma_b(rp)
    if which is Shift.PLUS:
        # theta -> theta + i(b + sigma): plus factor gains (b+sigma)/2, minus factor loses it
        return (0.5 * (sb.b + sb.sigma), -0.5 * (sb.b + sb.sigma))
    return (-0.5 * (sb.b - sb.sigma), 0.5 * (sb.b - sb.sigma))


def esscher_factor_quadruples(rp: RicochetParameters, which: Shift | str) -> tuple[Quadruple, Quadruple]:
    """Factor quadruples (plus, minus) of Psi* after the Esscher shift at one of its roots."""
    which = Shift(which)
    f = wh_factors(rp)
    du, dd = _esscher_shift(rp, which)
    up = [x + du for x in f.plus.as_tuple()]
    dn = [x + dd for x in f.minus.as_tuple()]
    up = [0.0 if abs(x) < TOL else x for x in up]
    dn = [0.0 if abs(x) < TOL else x for x in dn]
    return Quadruple(*up), Quadruple(*dn)


def esscher_shifted_exponent(rp: RicochetParameters, theta, which: Shift | str = Shift.PLUS):
    """Psi*(theta + root) through the gamma-product form; vanishes at theta = 0."""
    which = Shift(which)
    up, dn = esscher_factor_quadruples(rp, which)
    th = np.asarray(theta, dtype=complex)
    val = laplace_exponent(up, -0.5j * th) * laplace_exponent(dn, 0.5j * th)
    out = np.asarray(2.0**rp.alpha * val, dtype=complex)
    return out[()] if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Bernstein probe
# ---------------------------------------------------------------------------

class ProbeReport(NamedTuple):
    derivatives: np.ndarray  # shape (len(grid), n + 1), column 0 holds the function value
    alternates: bool
    first_failure: int | None  # smallest derivative order whose sign is wrong, if any


def _cauchy_derivatives(f: Callable, x: float, n: int, radius: float, nodes: int = 64) -> np.ndarray:
    k = np.arange(nodes)
    w = np.exp(2j * np.pi * k / nodes)
    vals = np.asarray(f(x + radius * w), dtype=complex)
    coeffs = np.fft.fft(vals) / nodes  # Taylor coefficients times radius^m
    m = np.arange(n + 1)
    facts = np.array([math.factorial(int(j)) for j in m], dtype=float)
    return np.real(coeffs[: n + 1]) * facts / radius**m


def bernstein_probe(factor, scale: bool = True, n_derivatives: int = 4, grid=None) -> ProbeReport:
    """Derivatives 0..n of lambda -> B(factor; lambda/2) (or of a callable) on a grid.

    Derivatives come from the discrete Cauchy integral on a circle around each
    grid point, a difference scheme exact for polynomials of degree below the
    node count.  ``alternates`` reports whether f >= 0 and (-1)^(m-1) f^(m) >= 0
    for m = 1..n at every grid point, as for a Bernstein function.  Advisory only.
    """
    if n_derivatives > 8:
        raise ParameterError("n_derivatives must be <= 8")
    if grid is None:
        grid = np.geomspace(0.1, 10.0, 12)
    grid = np.asarray(grid, dtype=float)
    if isinstance(factor, Quadruple):
        lead = min(factor.alpha, factor.beta)
        div = 2.0 if scale else 1.0

        def f(z):
            return laplace_exponent(factor, np.asarray(z, dtype=complex) / div)

        pole_distance = lambda x: x + div * lead  # noqa: E731
    else:
        f = factor
        pole_distance = lambda x: np.inf  # noqa: E731
    out = np.empty((grid.size, n_derivatives + 1))
    for i, x in enumerate(grid):
        r = min(0.5 * pole_distance(x), 0.5 * max(x, 0.1), 1.0)
        d1 = _cauchy_derivatives(f, x, n_derivatives, r)
        d2 = _cauchy_derivatives(f, x, n_derivatives, 0.5 * r, nodes=96)
        # Cauchy estimate: |f^(m)| <= m! max|f| / r^m sets the natural size of each column
        fmax = float(np.max(np.abs(f(x + r * np.exp(2j * np.pi * np.arange(16) / 16)))))
        m = np.arange(n_derivatives + 1)
        natural = fmax * np.array([math.factorial(int(j)) for j in m]) / r**m
        if np.any(np.abs(d1 - d2) > 1e-6 * np.abs(d1) + 1e-10 * natural):
            raise ConvergenceError(f"derivative estimates unstable at lambda={x}")
        out[i] = d1
    signs_ok = out[:, 0] >= 0
    failure = None
    for m in range(1, n_derivatives + 1):
        ok = ((-1) ** (m - 1)) * out[:, m] >= 0
        if not np.all(ok) and failure is None:
            failure = m
    alternates = bool(np.all(signs_ok)) and failure is None
    return ProbeReport(out, alternates, failure)


def is_pick_on_samples(q: Quadruple, z) -> bool:
    """True when Im B(q; z) > 0 at every sample point of the upper half-plane."""
    return bool(np.all(np.imag(laplace_exponent(q, np.asarray(z, dtype=complex))) > 0))


def upper_half_plane_samples(rng: np.random.Generator, n: int = 500) -> np.ndarray:
    """Half polar samples over several decades, half in a band just above the real axis.

    Where interlacing fails, Im B(q; z) turns negative only close to the
    negative real axis, so the band is where a violation can be seen.
    """
    n_polar = n // 2
    r = np.exp(rng.uniform(np.log(1e-2), np.log(1e2), n_polar))
    phi = rng.uniform(0.01, math.pi - 0.01, n_polar)
    band_x = rng.uniform(-6.0, 6.0, n - n_polar)
    band_y = np.exp(rng.uniform(np.log(1e-3), 0.0, n - n_polar))
    return np.concatenate([r * np.exp(1j * phi), band_x + 1j * band_y])


# ---------------------------------------------------------------------------
# absorption time
# ---------------------------------------------------------------------------

def t0_process(rp: RicochetParameters) -> DhgParameters:
    """Exponents of eta_u = -2 xi*(2^-alpha u): plus and minus factors of Psi* trade places."""
    f = wh_factors(rp)
    return DhgParameters(f.minus, f.plus)


def t0_mellin_spec(rp: RicochetParameters) -> MellinSpec:
    sb = sigma_b(rp)
    if not 0 < sb.b - sb.sigma < rp.alpha:
        raise ParameterError("Mellin transform of T0 needs 0 < b - sigma < alpha")
    return MellinSpec(t0_process(rp), 2.0 / rp.alpha)


def t0_mellin(rp: RicochetParameters, s):
    """E[T0^(s-1)] for Y_0 = 1: T0 = 2^-alpha I with I the exponential functional of eta, c = 2/alpha."""
    spec = t0_mellin_spec(rp)
    sa = np.asarray(s)
    return 2.0 ** (-rp.alpha * (sa - 1.0)) * mellin(spec, sa)


def random_ricochet_parameters(rng: np.random.Generator, *, require_wh: bool = False) -> RicochetParameters:
    while True:
        a = float(rng.uniform(0.05, 1.95))
        lo, hi = max(0.0, 1.0 - 1.0 / a), min(1.0, 1.0 / a)
        rho = float(rng.uniform(lo, hi))
        p = float(rng.uniform(0.0, 1.0))
        if abs(a - 1.0) < 1e-9:
            continue
        try:
            rp = RicochetParameters(a, rho, p)
        except ParameterError:
            continue
        if min(a * rho, a * (1 - rho)) < 1e-3 or max(a * rho, a * (1 - rho)) > 1 - 1e-3:
            continue
        if require_wh and not wiener_hopf_condition(rp).holds:
            continue
        return rp


def factor_gate(rp: RicochetParameters) -> bool:
    """classify(plus) in G for the ascending factor."""
    return classify(wh_quadruples(rp).plus).in_G
