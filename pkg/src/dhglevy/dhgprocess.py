"""Double hypergeometric Levy processes.

A pair of quadruples (plus, minus) in G defines the Levy process with
characteristic exponent

    Psi(theta) = B(plus; -i theta) * B(minus; i theta),

whose ascending and descending ladder height exponents are B(plus; .) and
B(minus; .).  The Laplace exponent is psi(z) = -Psi(-i z).
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .doublebeta import INTEGER_TOL, Quadruple, classify, gamma_ratio_asymptotic, laplace_exponent
from .errors import DomainError, ParameterError
from .specfun import DEFAULT_CONTROL, SeriesControl, gamma_ratio, log_gamma_ratio, pfq

X_MIN = 1e-6


@dataclass(frozen=True)
class DhgParameters:
    plus: Quadruple
    minus: Quadruple

    def __post_init__(self):
        for side, q in (("plus", self.plus), ("minus", self.minus)):
            if not classify(q).in_G:
                raise ParameterError(f"{side} quadruple {q.as_tuple()} is outside the class G")

    def swapped(self) -> "DhgParameters":
        return DhgParameters(self.minus, self.plus)

    def canonical(self) -> "DhgParameters":
        return DhgParameters(self.plus.canonical(), self.minus.canonical())

    @property
    def interior(self) -> bool:
        return classify(self.plus).interior and classify(self.minus).interior

    @property
    def index(self) -> float:
        """alpha+beta+alpha^+beta^-gamma-delta-gamma^-delta^, the growth index of |Psi|."""
        a, b, g, d = self.plus.as_tuple()
        ah, bh, gh, dh = self.minus.as_tuple()
        return a + b + ah + bh - g - d - gh - dh


class LongTermBehavior(str, Enum):
    KILLED = "Killed"
    OSCILLATES = "Oscillates"
    DRIFTS_PLUS = "DriftsPlus"
    DRIFTS_MINUS = "DriftsMinus"


def characteristic_exponent(p: DhgParameters, theta):
    th = np.asarray(theta, dtype=float)
    up = laplace_exponent(p.plus, -1j * th)
    dn = laplace_exponent(p.minus, 1j * th)
    return up * dn


def log_characteristic_exponent(p: DhgParameters, theta):
    """log Psi(theta) accumulated in log space (usable for |theta| up to 1e5 and beyond)."""
    th = np.asarray(theta, dtype=float)
    a, b, g, d = p.plus.as_tuple()
    ah, bh, gh, dh = p.minus.as_tuple()
    zp, zm = -1j * th, 1j * th
    lr, zero = log_gamma_ratio([zp + a, zp + b, zm + ah, zm + bh], [zp + g, zp + d, zm + gh, zm + dh])
    return np.where(zero, -np.inf, lr)


def laplace_exponent_psi(p: DhgParameters, z):
    """psi(z) = -B(plus; -z) B(minus; z)."""
    za = np.asarray(z)
    return -laplace_exponent(p.plus, -za) * laplace_exponent(p.minus, za)


def psi_derivative_at_zero(p: DhgParameters) -> float:
    """d/dz psi at 0, via digamma differences (for unkilled processes)."""
    from scipy.special import digamma

    def dlog(q: Quadruple) -> float:
        num = [x for x in (q.alpha, q.beta)]
        den = [x for x in (q.gamma, q.delta)]
        for x in list(num):
            if x in den:
                num.remove(x)
                den.remove(x)
        return sum(digamma(x) for x in num) - sum(digamma(x) for x in den)

    # psi = -B+(-z) B-(z); the killing must vanish for a finite derivative to be meaningful
    bp0 = float(np.real(laplace_exponent(p.plus, 0.0)))
    bm0 = float(np.real(laplace_exponent(p.minus, 0.0)))
    if bp0 == 0.0 and bm0 == 0.0:
        return 0.0
    if bp0 == 0.0:
        # psi ~ -B+'(0)(-z) B-(0): the derivative of B+ at 0 comes from the simple zero
        return _zero_slope(p.plus) * bm0
    if bm0 == 0.0:
        return -bp0 * _zero_slope(p.minus)
    val = -bp0 * bm0
    return float(val * (-dlog(p.plus) + dlog(p.minus)))


def _zero_slope(q: Quadruple) -> float:
    """B'(q; 0) when B(q; 0) = 0 (a gamma parameter equals zero)."""
    num = [q.alpha, q.beta]
    den = [q.gamma, q.delta]
    for x in list(num):
        if x in den:
            num.remove(x)
            den.remove(x)
    if 0.0 not in den:
        raise ParameterError("B(q; 0) is not zero")
    den.remove(0.0)
    # Gamma(z)^{-1} = z + O(z^2)
    return float(np.real(gamma_ratio(num, den)))


def _two_sided_terms(q: Quadruple, qh: Quadruple, x, ctl: SeriesControl):
    a, b, g, d = q.canonical().as_tuple()
    ah, bh, gh, dh = qh.as_tuple()
    out = np.zeros_like(x)
    z = np.exp(-x)
    for lead, other in ((a, b), (b, a)):
        coef = -gamma_ratio([lead + ah, lead + bh, other - lead], [lead + gh, lead + dh, g - lead, d - lead])
        if coef == 0.0:
            continue
        upper = [lead + ah, lead + bh, 1 + lead - g, 1 + lead - d]
        lower = [1 + lead - other, lead + gh, lead + dh]
        out = out + coef * np.exp(-lead * x) * np.real(pfq(upper, lower, z, ctl).value)
    return out


def levy_density_two_sided(p: DhgParameters, x, ctl: SeriesControl = DEFAULT_CONTROL, *, x_min: float = X_MIN):
    """Levy density pi(x) for x != 0 (both quadruples in G°)."""
    if not p.interior:
        raise ParameterError("two-sided density requires both quadruples in the interior class")
    xa = np.asarray(x, dtype=float)
    if np.any(np.abs(xa) < x_min):
        raise DomainError(f"two-sided density needs |x| >= {x_min}")
    flat = xa.reshape(-1)
    out = np.zeros(flat.shape)
    pos, neg = flat > 0, flat < 0
    if np.any(pos):
        out[pos] = _two_sided_terms(p.plus, p.minus, flat[pos], ctl)
    if np.any(neg):
        out[neg] = _two_sided_terms(p.minus, p.plus, -flat[neg], ctl)
    out = out.reshape(xa.shape)
    return out[()] if out.ndim == 0 else out


def two_sided_residue_density(p: DhgParameters, x, n_poles: int = 300, *, tail: bool = True):
    """pi(x) = sum_n a_n rho_n exp(-rho_n |x|) with a_n rho_n = -B(other; rho_n) Res(B(side; .), -rho_n).

    The first ``n_poles`` poles are summed exactly.  With ``tail`` set, the
    remaining poles of each family lead + N0 are added using the large-k
    expansion of their weights, which are gamma ratios in k.
    """
    if not p.interior:
        raise ParameterError("residue expansion requires both quadruples in the interior class")
    xa = np.asarray(x, dtype=float)
    flat = xa.reshape(-1)
    out = np.zeros(flat.shape)
    for mask, side, other, sgn in ((flat > 0, p.plus, p.minus, 1.0), (flat < 0, p.minus, p.plus, -1.0)):
        if not np.any(mask):
            continue
        xs = sgn * flat[mask]
        a, b, g, d = side.canonical().as_tuple()
        ah, bh, gh, dh = other.as_tuple()
        k = np.arange(n_poles + 1, dtype=float)
        merged = np.sort(np.concatenate([a + k, b + k]), kind="stable")[:n_poles]
        for lead, oth in ((a, b), (b, a)):
            n_fam = int(np.sum(np.isin(merged, lead + k)))
            kk = np.arange(n_fam, dtype=float)
            w = _two_sided_weights(lead, oth, g, d, ah, bh, gh, dh, kk)
            out[mask] += (w[None, :] * np.exp(-np.outer(xs, lead + kk))).sum(axis=1)
            if tail:
                out[mask] += _two_sided_tail(lead, oth, g, d, ah, bh, gh, dh, n_fam, xs)
    out = out.reshape(xa.shape)
    return out[()] if out.ndim == 0 else out


def _two_sided_weights(lead, oth, g, d, ah, bh, gh, dh, kk):
    # Res(B, -lead-k) = (-1)^k Gamma(oth-lead-k) / (k! Gamma(g-lead-k) Gamma(d-lead-k))
    lres, zr = log_gamma_ratio([oth - lead - kk], [kk + 1, g - lead - kk, d - lead - kk])
    res = np.where(zr, 0.0, np.real(np.exp(lres))) * (-1.0) ** kk
    rho = lead + kk
    lbm, zb = log_gamma_ratio([rho + ah, rho + bh], [rho + gh, rho + dh])
    bm = np.where(zb, 0.0, np.real(np.exp(lbm)))
    return -bm * res


def _two_sided_tail(lead, oth, g, d, ah, bh, gh, dh, N, xs, rel: float = 1e-18):
    if N == 0:
        return np.zeros_like(xs)
    # after reflection the weight is A * Gamma-ratio in k with these parameters
    upper = [1 + lead - g, 1 + lead - d, lead + ah, lead + bh]
    lower = [1 + lead - oth, 1.0, lead + gh, lead + dh]
    k0 = np.array([float(N)])
    amp = _two_sided_weights(lead, oth, g, d, ah, bh, gh, dh, k0)[0] / gamma_ratio_asymptotic(upper, lower, k0)[0]
    xmin = float(np.min(xs))
    power = sum(upper) - sum(lower)
    # sum until k^power exp(-k x) has fallen by ``rel`` relative to the first tail term
    span = 1
    while (1 + span / N) ** max(power, 0.0) * np.exp(-span * xmin) > rel:
        span *= 2
    kk = N + np.arange(span, dtype=float)
    w = amp * gamma_ratio_asymptotic(upper, lower, kk)
    return (w[None, :] * np.exp(-np.outer(xs, lead + kk))).sum(axis=1)


def gaussian_component(p) -> float:
    """Diffusion coefficient: 2 when both exponent-sum gaps equal 1, else 0.

    Accepts a DhgParameters or any (plus, minus) pair of quadruples.
    """
    plus, minus = (p.plus, p.minus) if isinstance(p, DhgParameters) else p
    a, b, g, d = plus.as_tuple()
    ah, bh, gh, dh = minus.as_tuple()
    if abs(a + b - g - d - 1.0) <= INTEGER_TOL and abs(ah + bh - gh - dh - 1.0) <= INTEGER_TOL:
        return 2.0
    return 0.0


def _footnote_normalise(q: Quadruple) -> Quadruple:
    c = q.canonical()
    if c.delta == 0.0 and not (c.alpha == 0.0 and c.gamma == 0.0):
        raise ParameterError("delta = 0 forces alpha = gamma = 0 for a member of G")
    return c


def long_term_behavior(p: DhgParameters) -> LongTermBehavior:
    """Killed, oscillating, or drifting to +inf / -inf."""
    q, qh = _footnote_normalise(p.plus), _footnote_normalise(p.minus)
    if q.delta * qh.delta <= 0:
        raise ParameterError("long-term classification assumes delta * delta^ > 0")
    g, gh = q.gamma, qh.gamma
    if g > 0 and gh > 0:
        return LongTermBehavior.KILLED
    if g == 0 and gh == 0 and q.alpha * qh.alpha > 0:
        return LongTermBehavior.OSCILLATES
    if g == 0 and gh * q.alpha > 0:
        return LongTermBehavior.DRIFTS_PLUS
    if gh == 0 and g * qh.alpha > 0:
        return LongTermBehavior.DRIFTS_MINUS
    raise ParameterError("parameters fall outside the lifetime case analysis")


def growth_index_fit(p: DhgParameters, theta_lo: float = 1e3, theta_hi: float = 1e5, n: int = 41) -> float:
    """Least-squares slope of log|Psi(theta)| against log(theta)."""
    th = np.geomspace(theta_lo, theta_hi, n)
    y = np.real(log_characteristic_exponent(p, th))
    return float(np.polyfit(np.log(th), y, 1)[0])

