"""Special-function kernel.

Complex log-gamma, sign-aware gamma ratios, generalised hypergeometric
series, the Gauss function near unit argument, and Barnes' double gamma
function G(z; tau).

All routines accept scalars or numpy arrays and broadcast.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple, Sequence

import numpy as np
from scipy import special as sps

from .errors import ConvergenceError, DomainError, PoleError

EULER_GAMMA = 0.57721566490153286061
_LOG_PI = math.log(math.pi)
_LOG_MAX = 709.0


@dataclass(frozen=True)
class SeriesControl:
    """Truncation policy for power series."""

    max_terms: int = 10**6
    rel_tol: float = 1e-12
    abs_floor: float = 1e-300

    def __post_init__(self):
        if self.max_terms < 1:
            raise ValueError("max_terms must be >= 1")
        if not 0.0 < self.rel_tol < 1.0:
            raise ValueError("rel_tol must lie in (0, 1)")
        if self.abs_floor <= 0.0:
            raise ValueError("abs_floor must be positive")


DEFAULT_CONTROL = SeriesControl()


class SeriesResult(NamedTuple):
    value: np.ndarray | complex | float
    error: np.ndarray | float
    terms: int


def _is_nonpositive_integer(z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    re = z.real
    return (z.imag == 0) & (re <= 0) & (re == np.round(re))


def sinpi(x):
    """sin(pi x) for real x with exact argument reduction."""
    x = np.asarray(x, dtype=float)
    r = x - 2.0 * np.round(0.5 * x)  # r in [-1, 1]
    r = np.where(r > 0.5, 1.0 - r, np.where(r < -0.5, -1.0 - r, r))
    return np.sin(np.pi * r)


def log_gamma(z):
    """Principal branch of log Gamma(z); raises PoleError at 0, -1, -2, ..."""
    za = np.asarray(z, dtype=complex)
    if np.any(_is_nonpositive_integer(za)):
        raise PoleError(f"log_gamma pole at {z!r}")
    out = sps.loggamma(za)
    return out[()] if out.ndim == 0 else out


def lgamma_sign(x):
    """Return (log|Gamma(x)|, sign Gamma(x)) for real x.

    Arguments below 1/2 go through the reflection formula.  At the poles
    the log is +inf and the sign is 0.
    """
    x = np.asarray(x, dtype=float)
    lg = np.empty_like(x)
    sg = np.ones_like(x)
    hi = x >= 0.5
    lg[hi] = sps.gammaln(x[hi])
    lo = ~hi
    if np.any(lo):
        xl = x[lo]
        s = sinpi(xl)
        pole = s == 0.0
        with np.errstate(divide="ignore"):
            lgl = _LOG_PI - np.log(np.abs(s)) - sps.gammaln(1.0 - xl)
        lgl[pole] = np.inf
        sgl = np.sign(s)
        lg[lo] = lgl
        sg[lo] = sgl
    return lg, sg


def _log_gamma_signed(z):
    """log Gamma for complex arrays, real-axis entries via reflection.

    Returns a complex log; real-axis entries carry i*pi for negative sign.
    Poles give -inf... i.e. +inf real part, flagged by the second output.
    """
    z = np.asarray(z, dtype=complex)
    out = np.empty(z.shape, dtype=complex)
    real_axis = z.imag == 0
    pole = np.zeros(z.shape, dtype=bool)
    if np.any(real_axis):
        lg, sg = lgamma_sign(z.real[real_axis])
        pole[real_axis] = sg == 0
        out[real_axis] = lg + np.where(sg < 0, 1j * np.pi, 0.0)
    off = ~real_axis
    if np.any(off):
        out[off] = sps.loggamma(z[off])
    return out, pole


def _as_arg_list(args) -> list:
    if isinstance(args, np.ndarray) and args.ndim == 0:
        return [args]
    return list(args)


def log_gamma_ratio(numerators: Sequence, denominators: Sequence):
    """log of prod Gamma(num) / prod Gamma(den), plus a zero mask.

    The zero mask marks entries where some denominator sits at a pole (and
    the ratio vanishes).  Raises PoleError if a numerator hits a pole.
    """
    nums = [np.asarray(a, dtype=complex) for a in _as_arg_list(numerators)]
    dens = [np.asarray(a, dtype=complex) for a in _as_arg_list(denominators)]
    shape = np.broadcast_shapes(*(a.shape for a in nums + dens)) if nums or dens else ()
    total = np.zeros(shape, dtype=complex)
    zero = np.zeros(shape, dtype=bool)
    for a in nums:
        lg, pole = _log_gamma_signed(np.broadcast_to(a, shape))
        if np.any(pole):
            raise PoleError("numerator gamma argument at a pole")
        total = total + lg
    for a in dens:
        lg, pole = _log_gamma_signed(np.broadcast_to(a, shape))
        zero |= pole
        total = total - np.where(pole, 0.0, lg)
    return total, zero


def gamma_ratio(numerators: Sequence, denominators: Sequence):
    """prod Gamma(num) / prod Gamma(den), evaluated in log space.

    Exact zero where a denominator argument is a nonpositive integer.
    Real inputs give real output.
    """
    all_real = all(
        not np.iscomplexobj(np.asarray(a)) for a in list(_as_arg_list(numerators)) + list(_as_arg_list(denominators))
    )
    logv, zero = log_gamma_ratio(numerators, denominators)
    if np.any((logv.real > _LOG_MAX) & ~zero):
        raise OverflowError("gamma ratio overflows double precision")
    val = np.where(zero, 0.0, np.exp(np.where(zero, 0.0, logv)))
    if all_real:
        val = val.real
    return val[()] if np.ndim(val) == 0 else val


def pochhammer_log_ratio(upper, lower, k):
    """log of prod (a)_k / prod (b)_k for real parameters and integer k >= 0."""
    k = np.asarray(k, dtype=float)
    out = np.zeros_like(k, dtype=complex)
    for a in upper:
        num, _ = log_gamma_ratio([a + k], [a])
        out += num
    for b in lower:
        num, _ = log_gamma_ratio([b + k], [b])
        out -= num
    return out


def pfq(upper: Sequence, lower: Sequence, z, ctl: SeriesControl = DEFAULT_CONTROL) -> SeriesResult:
    """Generalised hypergeometric series pFq(upper; lower; z) for |z| < 1.

    Terms are generated in blocks from the term ratio.  Summation stops once
    the geometric tail estimate |t_k| r / (1 - r), with r the latest term
    ratio, falls below rel_tol * |sum| (or abs_floor).
    """
    za = np.asarray(z)
    scalar = za.ndim == 0
    is_complex = np.iscomplexobj(za) or any(np.iscomplexobj(np.asarray(p)) for p in list(upper) + list(lower))
    dtype = complex if is_complex else float
    zf = np.atleast_1d(za).astype(dtype).ravel()
    if np.any(np.abs(zf) >= 1.0):
        raise DomainError("pfq series requires |z| < 1")
    up = np.array(list(upper), dtype=dtype)
    lo = np.array(list(lower), dtype=dtype)

    total = np.ones_like(zf)
    err = np.zeros(zf.shape, dtype=float)
    active = np.ones(zf.shape, dtype=bool)
    term = np.ones_like(zf)
    prev_abs = np.ones(zf.shape, dtype=float)
    k = 0
    block = 16
    n_used = 1
    if np.all(zf == 0):
        active[:] = False
    while np.any(active):
        if k >= ctl.max_terms:
            raise ConvergenceError(
                f"pfq did not converge within {ctl.max_terms} terms (max |z| = {np.abs(zf).max():.6g})"
            )
        kk = np.arange(k, min(k + block, ctl.max_terms), dtype=float)
        if lo.size:
            lo_k = lo[None, :] + kk[:, None]
            if np.any(lo_k == 0):
                raise DomainError("lower parameter reaches a nonpositive integer")
            den = np.prod(lo_k, axis=1) * (kk + 1.0)
        else:
            den = kk + 1.0
        num = np.prod(up[None, :] + kk[:, None], axis=1) if up.size else np.ones_like(kk)
        coef = num / den  # t_{k+1} / t_k without the z factor
        zi = zf[active]
        steps = coef[None, :] * zi[:, None]
        seq = term[active][:, None] * np.cumprod(steps, axis=1)
        partial = seq.sum(axis=1)
        total[active] = total[active] + partial
        last = seq[:, -1]
        last_abs = np.abs(last)
        before = np.abs(seq[:, -2]) if seq.shape[1] > 1 else prev_abs[active]
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.where(before > 0, last_abs / before, 0.0)
        tail = np.where(r < 1.0, last_abs * r / np.maximum(1.0 - r, 1e-300), np.inf)
        tail = np.where(last_abs == 0.0, 0.0, tail)
        done = tail <= np.maximum(ctl.rel_tol * np.abs(total[active]), ctl.abs_floor)
        idx = np.flatnonzero(active)
        err[idx] = tail
        term[idx] = last
        prev_abs[idx] = last_abs
        active[idx[done]] = False
        k += kk.size
        n_used = k + 1
        block = min(block * 2, 8192)
    value = total.reshape(np.shape(za)) if not scalar else total[0]
    error = err.reshape(np.shape(za)) if not scalar else float(err[0])
    return SeriesResult(value, error, n_used)


def hyp2f1(a: float, b: float, c: float, z, *, one_minus_z=None, ctl: SeriesControl = DEFAULT_CONTROL):
    """Gauss function 2F1(a, b; c; z) for real parameters and z in [0, 1).

    Arguments above 1/2 use the z -> 1 - z connection formula, so the routine
    stays fast arbitrarily close to z = 1.  Pass ``one_minus_z`` when 1 - z
    is known more accurately than z itself (e.g. -expm1(-s)).
    """
    z = np.asarray(z, dtype=float)
    w = 1.0 - z if one_minus_z is None else np.asarray(one_minus_z, dtype=float)
    if np.any(z < 0) or np.any(w <= 0):
        raise DomainError("hyp2f1 here needs z in [0, 1)")
    out = np.empty(np.broadcast(z, w).shape, dtype=float)
    z, w = np.broadcast_arrays(z, w)
    near = z > 0.5
    if np.any(~near):
        out[~near] = np.real(pfq([a, b], [c], z[~near], ctl).value)
    if np.any(near):
        e = c - a - b
        if abs(e - round(e)) < 1e-12:
            # logarithmic case of the connection formula; scipy treats it separately
            out[near] = sps.hyp2f1(a, b, c, z[near])
            return out[()] if out.ndim == 0 else out
        wn = w[near]
        k1 = gamma_ratio([c, e], [c - a, c - b])
        k2 = gamma_ratio([c, -e], [a, b])
        f1 = np.real(pfq([a, b], [1.0 - e], wn, ctl).value) if k1 != 0 else 0.0
        f2 = np.real(pfq([c - a, c - b], [1.0 + e], wn, ctl).value) if k2 != 0 else 0.0
        out[near] = k1 * f1 + k2 * np.power(wn, e) * f2
    return out[()] if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Barnes double gamma
# ---------------------------------------------------------------------------
#
# Definition (Barnes; normalisation as in Kuznetsov's Levy-process papers):
#
#   G(z; tau) = (z/tau) exp(a z/tau + b z^2/(2 tau))
#               * prod'_{m,n>=0} (1 + z/w) exp(-z/w + z^2/(2 w^2)),  w = m tau + n,
#
# the prime omitting m = n = 0.  The constants a, b are fixed by G(1; tau) = 1
# and G(z + 1; tau) = Gamma(z/tau) G(z; tau).  The companion relation
#
#   G(z + tau; tau) = (2 pi)^((tau - 1)/2) tau^(1/2 - z) Gamma(z) G(z; tau)
#
# then holds automatically and is checked in the tests.

_EM_BERNOULLI = [sps.bernoulli(12)[2 * k] for k in range(1, 7)]


def _row_tail_coeffs(tau: float, M: int, nmax: int) -> np.ndarray:
    """S_n = sum_{m >= M} psi^(n)(m tau) for n = 2..nmax (index n)."""
    W = M * tau
    S = np.zeros(nmax + 1)
    for n in range(2, nmax + 1):
        # g(m) = zeta(n+1, m tau); Euler-Maclaurin in m from M to infinity
        acc = sps.zeta(n, W) / (n * tau) + 0.5 * sps.zeta(n + 1, W)
        poch = 1.0
        for k, B2k in enumerate(_EM_BERNOULLI, start=1):
            r = 2 * k - 1
            # g^(r)(M) = (-tau)^r (n+1)_r zeta(n+1+r, W)
            poch = float(sps.poch(n + 1, r))
            deriv = (-tau) ** r * poch * sps.zeta(n + 1 + r, W)
            acc -= B2k / math.factorial(2 * k) * deriv
        S[n] = (-1) ** (n + 1) * math.factorial(n) * acc
    return S


def _log_product(z: np.ndarray, tau: float) -> np.ndarray:
    """log of (z/tau) * prod'(...) for Re z >= 1, modulo 2 pi i."""
    zmax = float(np.max(np.abs(z))) if z.size else 1.0
    M = int(max(math.ceil(8.0 * zmax / tau) + 1, math.ceil(24.0 / tau), 8))
    out = np.log(z / tau)
    out += -sps.loggamma(1.0 + z) - EULER_GAMMA * z + (math.pi**2 / 12.0) * z * z
    m = np.arange(1, M, dtype=float)
    w = m * tau
    lg_w = sps.gammaln(w)
    dg = sps.digamma(w)
    tg = sps.polygamma(1, w)
    chunk = max(1, 2_000_000 // max(1, M))
    flat = z.ravel()
    acc = np.empty(flat.shape, dtype=complex)
    for i in range(0, flat.size, chunk):
        zz = flat[i : i + chunk, None]
        rows = lg_w[None, :] - sps.loggamma(w[None, :] + zz) + zz * dg[None, :] + 0.5 * zz * zz * tg[None, :]
        acc[i : i + chunk] = rows.sum(axis=1)
    out = out + acc.reshape(z.shape)
    nmax = 40
    S = _row_tail_coeffs(tau, M, nmax)
    tail = np.zeros(z.shape, dtype=complex)
    zp = z * z
    for j in range(3, nmax + 2):
        zp = zp * z
        tail -= zp / math.factorial(j) * S[j - 1]
    return out + tail


@lru_cache(maxsize=256)
def _barnes_constants(tau: float) -> tuple[float, float]:
    F1 = _log_product(np.array([1.0 + 0j]), tau)[0].real
    F2 = _log_product(np.array([2.0 + 0j]), tau)[0].real
    b_over_tau = math.lgamma(1.0 / tau) - F2 + 2.0 * F1
    a_over_tau = -F1 - 0.5 * b_over_tau
    return a_over_tau, b_over_tau


def log_barnes_g(z, c: float):
    """log G(z; tau) (defined modulo 2 pi i); -inf real part at the zeros."""
    if not c > 0:
        raise DomainError("Barnes double gamma needs c > 0")
    tau = float(c)
    za = np.asarray(z, dtype=complex)
    flat = za.ravel().copy()
    shift = np.maximum(0, np.ceil(1.0 - flat.real)).astype(int)
    correction = np.zeros(flat.shape, dtype=complex)
    is_zero = np.zeros(flat.shape, dtype=bool)
    for j in range(int(shift.max()) if shift.size else 0):
        sel = shift > j
        lg, pole = _log_gamma_signed((flat[sel] + j) / tau)
        is_zero[np.flatnonzero(sel)[pole]] = True
        correction[sel] += np.where(pole, 0.0, lg)
    zs = flat + shift
    a_t, b_t = _barnes_constants(tau)
    logg = a_t * zs + 0.5 * b_t * zs * zs + _log_product(zs, tau) - correction
    logg[is_zero] = -np.inf
    logg = logg.reshape(za.shape)
    return logg[()] if logg.ndim == 0 else logg


def barnes_g(z, c: float):
    """Barnes double gamma G(z; tau), normalised by G(1; tau) = 1."""
    lg = np.asarray(log_barnes_g(z, c))
    if np.any(lg.real > _LOG_MAX):
        raise OverflowError("Barnes G overflows double precision")
    with np.errstate(under="ignore"):
        val = np.where(np.isneginf(lg.real), 0.0, np.exp(np.where(np.isneginf(lg.real), 0.0, lg)))
    return val[()] if val.ndim == 0 else val
