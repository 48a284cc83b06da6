"""Double beta subordinators.

A quadruple q = (alpha, beta, gamma, delta) of nonnegative reals defines

    B(q; z) = Gamma(z + alpha) Gamma(z + beta) / (Gamma(z + gamma) Gamma(z + delta)).

This module decides when B(q; .) is a complete Bernstein function (the
interlacing classes G and its strict interior G°), evaluates it, and gives
the Levy and potential densities of the corresponding subordinator together
with their residue (partial fraction) expansions, which serve as independent
numerical oracles.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable

import numpy as np
from scipy import special as sps

from .errors import DomainError, ParameterError
from .quadrature import integrate_log
from .specfun import DEFAULT_CONTROL, SeriesControl, gamma_ratio, hyp2f1, log_gamma_ratio

S_MIN = 1e-8
INTEGER_TOL = 1e-12


@dataclass(frozen=True)
class Quadruple:
    alpha: float
    beta: float
    gamma: float
    delta: float

    def __post_init__(self):
        vals = self.as_tuple()
        if not all(math.isfinite(v) for v in vals):
            raise ParameterError(f"quadruple entries must be finite: {vals}")
        if min(vals) < 0:
            raise ParameterError(f"quadruple entries must be nonnegative: {vals}")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.alpha, self.beta, self.gamma, self.delta)

    def canonical(self) -> "Quadruple":
        """Order alpha <= beta and gamma <= delta."""
        a, b = sorted((self.alpha, self.beta))
        g, d = sorted((self.gamma, self.delta))
        return Quadruple(a, b, g, d)

    def swaps(self) -> list["Quadruple"]:
        """The quadruple under all combinations of alpha<->beta and gamma<->delta."""
        a, b, g, d = self.as_tuple()
        return [Quadruple(a, b, g, d), Quadruple(b, a, g, d), Quadruple(a, b, d, g), Quadruple(b, a, d, g)]

    @classmethod
    def parse(cls, text: str) -> "Quadruple":
        parts = [float(p) for p in text.replace(" ", "").split(",")]
        if len(parts) != 4:
            raise ParameterError(f"expected four comma-separated numbers, got {text!r}")
        return cls(*parts)


class ClassTag(str, Enum):
    INTERIOR_I = "InteriorI"
    INTERIOR_II = "InteriorII"
    BOUNDARY = "Boundary"
    NOT_CB = "NotCompleteBernstein"


@dataclass(frozen=True)
class QuadrupleClass:
    tag: ClassTag
    k: int | None = None
    chain: str | None = None
    reason: str = ""
    diagnostics: tuple[str, ...] = ()

    @property
    def interior(self) -> bool:
        return self.tag in (ClassTag.INTERIOR_I, ClassTag.INTERIOR_II)

    @property
    def in_G(self) -> bool:
        return self.tag is not ClassTag.NOT_CB


def _near_integer(x: float, tol: float = INTEGER_TOL) -> bool:
    return abs(x - round(x)) <= tol


def _k_bound(q: Quadruple) -> int:
    return int(math.ceil(max(q.beta, q.delta))) + 2


def _chain_i(q: Quadruple, k: int, strict: bool) -> bool:
    a, b, g, d = q.as_tuple()
    seq = (g + k, a + k, d, b, g + k + 1)
    return all((x < y) if strict else (x <= y) for x, y in zip(seq, seq[1:]))


def _chain_ii(q: Quadruple, k: int, strict: bool) -> bool:
    a, b, g, d = q.as_tuple()
    seq = (a + k - 1, g + k, b, d, a + k)
    return all((x < y) if strict else (x <= y) for x, y in zip(seq, seq[1:]))


def _find_chain(q: Quadruple, strict: bool):
    for k in range(0, _k_bound(q) + 1):
        if _chain_i(q, k, strict):
            return "I", k
    for k in range(1, _k_bound(q) + 1):
        if _chain_ii(q, k, strict):
            return "II", k
    return None


def classify(q: Quadruple) -> QuadrupleClass:
    """Place q in G° (with its witness k), on the boundary G minus G°, or outside G."""
    a, b, g, d = q.as_tuple()
    diags = []
    diffs = {"alpha-beta": a - b, "gamma-delta": g - d, "gamma-alpha": g - a,
             "delta-alpha": d - a, "gamma-beta": g - b, "delta-beta": d - b}
    integer_diffs = [name for name, v in diffs.items() if _near_integer(v)]
    positive = min(a, b, g, d) > 0
    if positive and not integer_diffs:
        hit = _find_chain(q.canonical(), strict=True)
        if hit is not None:
            chain, k = hit
            tag = ClassTag.INTERIOR_I if chain == "I" else ClassTag.INTERIOR_II
            return QuadrupleClass(tag, k=k, chain=chain)
    else:
        if not positive:
            diags.append("some parameter is zero")
        if integer_diffs:
            diags.append("integer differences: " + ", ".join(integer_diffs))
    for variant in q.swaps():
        hit = _find_chain(variant, strict=False)
        if hit is not None:
            chain, k = hit
            return QuadrupleClass(ClassTag.BOUNDARY, k=k, chain=chain + "'", diagnostics=tuple(diags))
    return QuadrupleClass(
        ClassTag.NOT_CB,
        reason="no k makes chain (i') or (ii') hold under any alpha<->beta, gamma<->delta swap",
        diagnostics=tuple(diags),
    )


def _require_interior(q: Quadruple) -> QuadrupleClass:
    cls = classify(q)
    if not cls.interior:
        raise ParameterError(f"quadruple {q.as_tuple()} is not in the interior class ({cls.tag.value})")
    return cls


def _cancel(numer: list[float], denom: list[float]) -> tuple[list[float], list[float]]:
    numer, denom = list(numer), list(denom)
    for x in list(numer):
        if x in denom:
            numer.remove(x)
            denom.remove(x)
    return numer, denom


def laplace_exponent(q: Quadruple, z):
    """B(q; z); parameters shared by numerator and denominator cancel exactly."""
    num, den = _cancel([q.alpha, q.beta], [q.gamma, q.delta])
    za = np.asarray(z)
    if not num and not den:
        return np.ones_like(za, dtype=za.dtype if np.iscomplexobj(za) else float)[()]
    return gamma_ratio([za + p for p in num], [za + p for p in den])


def exponent_sum_gap(q: Quadruple) -> float:
    """(alpha + beta) - (gamma + delta); lies in (0, 1) on G°, in [0, 1] on G."""
    cls = classify(q)
    if not cls.in_G:
        raise ParameterError(f"quadruple {q.as_tuple()} is outside the class G")
    return (q.alpha + q.beta) - (q.gamma + q.delta)


def killing_rate(q: Quadruple) -> float:
    return float(np.real(laplace_exponent(q, 0.0)))


# ---------------------------------------------------------------------------
# densities
# ---------------------------------------------------------------------------

def _density_terms(lead: float, other: float, den1: float, den2: float, s, ctl, sign: float):
    """One exponential-times-2F1 term of the Levy/potential density formulas."""
    coef = sign * gamma_ratio([other - lead], [den1 - lead, den2 - lead])
    if coef == 0.0:
        return np.zeros_like(s)
    z = np.exp(-s)
    w = -np.expm1(-s)
    f = hyp2f1(1 + lead - den1, 1 + lead - den2, 1 + lead - other, z, one_minus_z=w, ctl=ctl)
    return coef * np.exp(-lead * s) * f


def levy_density(q: Quadruple, s, ctl: SeriesControl = DEFAULT_CONTROL, *, s_min: float = S_MIN):
    """Levy density f(s) of the double beta subordinator with exponent B(q; .)."""
    _require_interior(q)
    sa = np.asarray(s, dtype=float)
    if np.any(sa < s_min):
        raise DomainError(f"levy_density needs s >= {s_min}")
    a, b, g, d = q.canonical().as_tuple()
    out = _density_terms(a, b, g, d, sa, ctl, -1.0) + _density_terms(b, a, g, d, sa, ctl, -1.0)
    return out[()] if np.ndim(out) == 0 else out


def potential_density(q: Quadruple, x, ctl: SeriesControl = DEFAULT_CONTROL, *, x_min: float = S_MIN):
    """Potential density u(x), whose Laplace transform is 1 / B(q; .)."""
    _require_interior(q)
    xa = np.asarray(x, dtype=float)
    if np.any(xa < x_min):
        raise DomainError(f"potential_density needs x >= {x_min}")
    a, b, g, d = q.canonical().as_tuple()
    out = _density_terms(g, d, a, b, xa, ctl, 1.0) + _density_terms(d, g, a, b, xa, ctl, 1.0)
    return out[()] if np.ndim(out) == 0 else out


def small_jump_constant(q: Quadruple) -> float:
    """C with f(s) ~ C s^(-1-g) as s -> 0, where g is the exponent-sum gap."""
    g = exponent_sum_gap(q)
    return g / math.gamma(1.0 - g)


def small_potential_constant(q: Quadruple) -> float:
    """C with u(x) ~ C x^(g-1) as x -> 0."""
    g = exponent_sum_gap(q)
    return 1.0 / math.gamma(g)


# ---------------------------------------------------------------------------
# residue expansions
# ---------------------------------------------------------------------------

def _bernoulli_poly(n: int, x: float) -> float:
    B = sps.bernoulli(n)
    return float(sum(math.comb(n, j) * B[j] * x ** (n - j) for j in range(n + 1)))


def _log_gamma_ratio_expansion(upper: Iterable[float], lower: Iterable[float], order: int) -> np.ndarray:
    """Coefficients d_1..d_order with
    log[prod Gamma(k + u) / prod Gamma(k + l)] = (sum u - sum l) log k + sum_n d_n k^-n
    when the two lists have equal length."""
    d = np.zeros(order + 1)
    for n in range(1, order + 1):
        acc = sum(_bernoulli_poly(n + 1, u) for u in upper) - sum(_bernoulli_poly(n + 1, l) for l in lower)
        d[n] = (-1) ** (n + 1) * acc / (n * (n + 1))
    return d


def gamma_ratio_asymptotic(upper, lower, k, order: int = 12):
    """prod Gamma(k + u) / prod Gamma(k + l) for large k, from its 1/k expansion.

    ``upper`` and ``lower`` must have equal length.  Returns the approximation
    k^(sum u - sum l) * exp(sum_n d_n / k^n) evaluated at the array ``k``.
    """
    upper, lower = list(upper), list(lower)
    if len(upper) != len(lower):
        raise ValueError("upper and lower parameter lists need equal length")
    d = _log_gamma_ratio_expansion(upper, lower, order)
    k = np.asarray(k, dtype=float)
    inv = 1.0 / k
    poly = np.zeros_like(k)
    for n in range(order, 0, -1):
        poly = (poly + d[n]) * inv
    return np.exp((sum(upper) - sum(lower)) * np.log(k) + poly)


def _series_exp(c: np.ndarray) -> np.ndarray:
    """exp of a power series with c[0] = 0, truncated to len(c)."""
    n = len(c)
    e = np.zeros(n, dtype=c.dtype)
    e[0] = 1.0
    # e' = c' e
    for m in range(1, n):
        e[m] = sum(j * c[j] * e[m - j] for j in range(1, m + 1)) / m
    return e


def _series_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    n = len(a)
    return np.convolve(a, b)[:n]


@dataclass(frozen=True)
class _PoleFamily:
    """Weights c_k = A * Gamma(k+u1) Gamma(k+u2) / (Gamma(k+l1) Gamma(k+1)) at poles rho0 + k."""

    rho0: float
    log_amp: complex
    upper: tuple[float, float]
    lower: tuple[float, float]

    def weights(self, k: np.ndarray) -> np.ndarray:
        lr, _ = log_gamma_ratio([k + self.upper[0], k + self.upper[1]], [k + self.lower[0], k + self.lower[1]])
        return np.real(np.exp(self.log_amp + lr))


@dataclass(frozen=True)
class ResidueSeries:
    """Truncated partial fraction expansion

        Phi(z) = b + sum_n c_n [1/rho_n - 1/(rho_n + z)]

    with poles -rho_n of Phi.  The affine part is (a, b, d) = (0, Phi(0), 0).
    An asymptotic tail beyond the truncation is available through the pole
    families the weights come from.
    """

    poles: np.ndarray
    weights: np.ndarray
    affine: tuple[float, float, float]
    truncation: int
    families: tuple[_PoleFamily, ...] = field(default=(), repr=False)
    counts: tuple[int, ...] = field(default=(), repr=False)
    gap: float = 0.0

    def evaluate(self, z, *, tail: bool = True, tail_order: int = 14):
        za = np.asarray(z, dtype=complex)
        rho = self.poles
        terms = self.weights[None, :] * (1.0 / rho[None, :] - 1.0 / (rho[None, :] + za.reshape(-1, 1)))
        val = self.affine[1] + terms.sum(axis=1)
        if tail:
            val = val + sum(
                self._family_tail(fam, n, za.reshape(-1), tail_order) for fam, n in zip(self.families, self.counts)
            )
        val = val.reshape(za.shape)
        if not np.iscomplexobj(np.asarray(z)):
            val = val.real
        return val[()] if val.ndim == 0 else val

    def _family_tail(self, fam: _PoleFamily, N: int, z: np.ndarray, order: int):
        """sum_{k >= N} c_k z / ((rho0 + k)(rho0 + k + z)), by expansion in 1/k."""
        g = self.gap
        d = _log_gamma_ratio_expansion(fam.upper, fam.lower, order)
        amp = _series_exp(d.astype(complex))
        amp_real = np.exp(fam.log_amp).real
        out = np.zeros(z.shape, dtype=complex)
        for i, zi in enumerate(z):
            # z t^2 / ((1 + rho0 t)(1 + (rho0 + z) t)) as a series in t = 1/k
            geo1 = (-fam.rho0) ** np.arange(order + 1)
            geo2 = (-(fam.rho0 + zi)) ** np.arange(order + 1)
            frac = _series_mul(geo1.astype(complex), geo2.astype(complex))
            ser = _series_mul(amp, frac)
            # summand = amp_real * zi * sum_j ser[j] k^(g - 2 - j)
            acc = 0.0 + 0.0j
            for j, coef in enumerate(ser[: order - 1]):
                acc += coef * sps.zeta(2.0 + j - g, N)
            out[i] = amp_real * zi * acc
        return out

    def density(self, s):
        """sum_n c_n exp(-rho_n s): the jump density implied by the expansion."""
        sa = np.asarray(s, dtype=float)
        val = (self.weights[None, :] * np.exp(-np.outer(sa.reshape(-1), self.poles))).sum(axis=1)
        val = val.reshape(sa.shape)
        return val[()] if val.ndim == 0 else val


def _levy_family(lead: float, other: float, g: float, d: float) -> _PoleFamily:
    # c_k = (-1)^{k+1} Gamma(other - lead - k) / (k! Gamma(g - lead - k) Gamma(d - lead - k)).
    # Reflection turns this into A Gamma(k+1+lead-g) Gamma(k+1+lead-d) / (Gamma(k+1+lead-other) k!).
    u1, u2, l1 = 1 + lead - g, 1 + lead - d, 1 + lead - other
    # the k = 0 weight fixes the amplitude and its sign
    c0 = -gamma_ratio([other - lead], [g - lead, d - lead])
    base, _ = log_gamma_ratio([u1, u2], [l1])
    log_amp = np.log(complex(c0)) - base
    return _PoleFamily(lead, complex(log_amp), (u1, u2), (l1, 1.0))


def residue_series(q: Quadruple, n_poles: int) -> ResidueSeries:
    """First n_poles poles of B(q; .) (from {alpha, beta} + N0) with weights c_n = -Res."""
    _require_interior(q)
    if n_poles < 1:
        raise ParameterError("n_poles must be >= 1")
    cq = q.canonical()
    a, b, g, d = cq.as_tuple()
    fams = (_levy_family(a, b, g, d), _levy_family(b, a, g, d))
    kmax = n_poles + 1
    cand = np.concatenate([a + np.arange(kmax), b + np.arange(kmax)])
    order = np.argsort(cand, kind="stable")[:n_poles]
    na = int(np.sum(order < kmax))
    nb = n_poles - na
    ka, kb = np.arange(na, dtype=float), np.arange(nb, dtype=float)
    wa = fams[0].weights(ka) if na else np.zeros(0)
    wb = fams[1].weights(kb) if nb else np.zeros(0)
    poles = np.concatenate([a + ka, b + kb])
    weights = np.concatenate([wa, wb])
    idx = np.argsort(poles, kind="stable")
    phi0 = killing_rate(cq)
    return ResidueSeries(
        poles=poles[idx],
        weights=weights[idx],
        affine=(0.0, phi0, 0.0),
        truncation=n_poles,
        families=fams,
        counts=(na, nb),
        gap=exponent_sum_gap(cq),
    )


def levy_density_residue(q: Quadruple, s, n_poles: int = 500):
    """f(s) as sum_n c_n exp(-rho_n s), computed from residue weights of B(q; .)."""
    return residue_series(q, n_poles).density(s)


def potential_density_residue(q: Quadruple, x, n_poles: int = 500):
    """u(x) from the residues of 1 / B(q; .) at the poles -gamma-k, -delta-k."""
    _require_interior(q)
    a, b, g, d = q.canonical().as_tuple()
    kmax = n_poles
    k = np.arange(kmax, dtype=float)
    xa = np.asarray(x, dtype=float)
    total = np.zeros(xa.size)
    for lead, other in ((g, d), (d, g)):
        # Res(1/B, -lead-k) = (-1)^k / k! * Gamma(other-lead-k) / (Gamma(a-lead-k) Gamma(b-lead-k))
        lr, zero = log_gamma_ratio([other - lead - k], [k + 1, a - lead - k, b - lead - k])
        r = np.where(zero, 0.0, np.real(np.exp(lr))) * (-1.0) ** k
        total += (r[None, :] * np.exp(-np.outer(xa.reshape(-1), lead + k))).sum(axis=1)
    total = total.reshape(xa.shape)
    return total[()] if total.ndim == 0 else total


# ---------------------------------------------------------------------------
# quadrature oracles for the Laplace identities
# ---------------------------------------------------------------------------

def _upper_limit(q: Quadruple) -> float:
    lead = min(q.alpha, q.beta, q.gamma, q.delta)
    return max(50.0, 40.0 / max(lead, 1e-3))


def laplace_of_levy_density(q: Quadruple, z: float, *, s_min: float = S_MIN, rel_tol: float = 1e-9) -> float:
    """Phi(0) + int_0^inf (1 - e^{-z s}) f(s) ds by quadrature.

    Below s_min the integrand is replaced by its leading small-s behaviour
    z s * C s^(-1-g); above the upper limit the residual mass is negligible.
    """
    cq = q.canonical()
    g = exponent_sum_gap(cq)
    C = small_jump_constant(cq)
    upper = _upper_limit(cq)
    res = integrate_log(lambda s: -np.expm1(-z * s) * levy_density(cq, s, s_min=s_min), s_min, upper, rel_tol=rel_tol)
    head = z * C * s_min ** (1.0 - g) / (1.0 - g)
    return killing_rate(cq) + float(np.real(res.value)) + head


def laplace_of_potential_density(q: Quadruple, z: float, *, x_min: float = S_MIN, rel_tol: float = 1e-9) -> float:
    """int_0^inf e^{-z x} u(x) dx by quadrature, with the x^(g-1) head handled analytically."""
    cq = q.canonical()
    g = exponent_sum_gap(cq)
    C = small_potential_constant(cq)
    upper = _upper_limit(cq)
    res = integrate_log(lambda x: np.exp(-z * x) * potential_density(cq, x, x_min=x_min), x_min, upper, rel_tol=rel_tol)
    head = C * x_min**g / g
    return float(np.real(res.value)) + head


# ---------------------------------------------------------------------------
# sampling helpers
# ---------------------------------------------------------------------------

def random_interior_quadruple(rng: np.random.Generator, *, kmax: int = 2, margin: float = 0.03) -> Quadruple:
    """Draw a quadruple from G° by sampling a strict chain (I) or (II) directly."""
    while True:
        k = int(rng.integers(0, kmax + 1))
        if k == 0 or rng.random() < 0.5:
            # (I): gamma + k < alpha + k < delta < beta < gamma + k + 1
            g = rng.uniform(0.05, 1.5)
            a = rng.uniform(g, g + 1.0)
            lo, hi = a + k, g + k + 1.0
            d, b = np.sort(rng.uniform(lo, hi, size=2))
        else:
            # (II): alpha + k - 1 < gamma + k < beta < delta < alpha + k
            a = rng.uniform(0.05, 1.5)
            g = rng.uniform(max(0.0, a - 1.0), a)
            lo, hi = g + k, a + k
            b, d = np.sort(rng.uniform(lo, hi, size=2))
        q = Quadruple(float(a), float(b), float(g), float(d))
        vals = q.as_tuple()
        diffs = [vals[i] - vals[j] for i in range(4) for j in range(i + 1, 4)]
        if min(vals) < margin or min(abs(x - round(x)) for x in diffs) < margin:
            continue
        if classify(q).interior:
            return q
