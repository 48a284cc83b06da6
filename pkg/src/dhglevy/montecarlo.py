"""Monte Carlo oracle for ricocheted, glued and real-valued stable processes.

Paths are stepped on a grid that is uniform in Lamperti time: from position
y the process advances by real time dt |y|^alpha with a stable increment of
scale |y| dt^(1/alpha).  By self-similarity every step then has the same
relative resolution.  Near |y| = 1 this is the real-time Euler scheme with step
dt, and it neither stalls near the origin nor crawls far away from it.  Real
time is accumulated step by step, so absorption times are real times.

Randomness is counter based.  Step k of path i uses the SplitMix64 outputs at
counters 2k+1 and 2k+2 of the stream keyed by (seed, i).  The n-th coin of
path i comes from a second stream with the same key.  A path is therefore a
pure function of (seed, i), whatever the batching or the number of worker
threads.

Work is done in blocks of BLOCK steps for CHUNK paths at a time.  numpy
evaluates the stable draws for a block in vectorised form, and a numba
kernel does the per-step bookkeeping.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, replace
from typing import NamedTuple

import numba
import numpy as np
from numba import njit, prange
from scipy.special import zeta

from .errors import ParameterError
from .ricochet import GluedParameters, RicochetParameters, _check_stable
from .rssmp import RssmpParameters

if "NUMBA_THREADING_LAYER_PRIORITY" not in os.environ and "NUMBA_THREADING_LAYER" not in os.environ:
    # probe OpenMP before TBB; an old TBB otherwise triggers a warning on every run
    numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
M1 = np.uint64(0xBF58476D1CE4E5B9)
M2 = np.uint64(0x94D049BB133111EB)
COIN_KEY = np.uint64(0xD1B54A32D192ED03)
SEED_ENV = "DHGLEVY_SEED"
DEFAULT_SEED = 20240607
BLOCK = 32
CHUNK = 2048

EV_NONE, EV_SURVIVE, EV_ABSORB, EV_PASS = 0, 1, 2, 3


def default_seed() -> int:
    """Seed from the DHGLEVY_SEED environment variable, else a fixed default."""
    return int(os.environ.get(SEED_ENV, DEFAULT_SEED))


@dataclass(frozen=True)
class SimulationConfig:
    """Monte Carlo settings.

    dt is the Lamperti-time step (the real-time step at |Y| = 1); t_max is a
    real-time horizon and lamperti_max a Lamperti-time horizon.  A path that
    reaches either one unabsorbed is reported as truncated.
    """

    seed: int = DEFAULT_SEED
    n_paths: int = 10_000
    dt: float = 1e-3
    t_max: float = 1e8
    x0: float = 1.0
    lamperti_max: float = 1e3
    workers: int | None = None

    def __post_init__(self):
        if not 0 < self.dt <= 1e-2:
            raise ParameterError("dt must lie in (0, 1e-2]")
        if self.n_paths < 1:
            raise ParameterError("n_paths must be >= 1")
        if not self.x0 > 0:
            raise ParameterError("x0 must be positive")
        if not (self.t_max > 0 and self.lamperti_max > 0):
            raise ParameterError("horizons must be positive")
        if not 0 <= self.seed < 2**64:
            raise ParameterError("seed must be a 64-bit unsigned integer")

    def with_(self, **kw) -> "SimulationConfig":
        return replace(self, **kw)


class PathRecord(NamedTuple):
    absorbed: bool
    t_absorb: float
    t_end: float
    sup: float
    inf: float
    crossings: int
    ricochets: int
    final_sign: int
    lamperti_time: float
    log_abs_final: float
    truncated: bool


@dataclass(frozen=True)
class PathRecords:
    """Per-path outcomes; entry i always belongs to path i of the seeded stream."""

    absorbed: np.ndarray
    t_absorb: np.ndarray  # inf where not absorbed
    t_end: np.ndarray
    sup: np.ndarray
    inf: np.ndarray
    crossings: np.ndarray
    ricochets: np.ndarray
    final_sign: np.ndarray
    lamperti_time: np.ndarray
    log_abs_final: np.ndarray
    truncated: np.ndarray

    def __len__(self) -> int:
        return self.absorbed.size

    def record(self, i: int) -> PathRecord:
        return PathRecord(**{name: getattr(self, name)[i].item() for name in self.__dataclass_fields__})


@dataclass(frozen=True)
class Estimate:
    mean: float
    std_error: float
    n: int
    truncated_fraction: float = 0.0

    def z_score(self, target: float) -> float:
        if self.std_error > 0:
            return (self.mean - target) / self.std_error
        return 0.0 if self.mean == target else math.inf


def estimate(values, truncated_fraction: float = 0.0) -> Estimate:
    """Sample mean and standard error (sample std / sqrt n), pairwise summed."""
    v = np.ascontiguousarray(values, dtype=float)
    n = v.size
    if n == 0:
        return Estimate(float("nan"), float("nan"), 0, truncated_fraction)
    mean = float(np.sum(v) / n)
    se = math.sqrt(float(np.sum((v - mean) ** 2)) / (n - 1) / n) if n > 1 else float("nan")
    return Estimate(mean, se, n, truncated_fraction)


# ---------------------------------------------------------------------------
# random numbers
# ---------------------------------------------------------------------------

@njit(cache=True, inline="always")
def _mix(z):
    z = (z ^ (z >> np.uint64(30))) * M1
    z = (z ^ (z >> np.uint64(27))) * M2
    return z ^ (z >> np.uint64(31))


@njit(cache=True, inline="always")
def _unit(z):
    return (np.float64(z >> np.uint64(11)) + 0.5) * (1.0 / 9007199254740992.0)


@njit(cache=True, inline="always")
def _stream_start(seed, path):
    return _mix(np.uint64(seed) ^ _mix(np.uint64(path) * GOLDEN + GOLDEN))


@njit(cache=True)
def _starts(seed, idx):
    out = np.empty(idx.size, dtype=np.uint64)
    for r in range(idx.size):
        out[r] = _stream_start(seed, idx[r])
    return out


@njit(cache=True)
def _coin_starts(starts):
    out = np.empty(starts.size, dtype=np.uint64)
    for r in range(starts.size):
        out[r] = _mix(starts[r] ^ COIN_KEY)
    return out


@njit(cache=True, inline="always")
def _coin(start, n):
    return _unit(_mix(start + np.uint64(n) * GOLDEN))


@njit(cache=True, parallel=True)
def _fill_uniforms(starts, k0, K, u1, u2):
    for r in prange(starts.size):
        for j in range(K):
            base = starts[r] + (np.uint64(2 * (k0 + j)) + np.uint64(1)) * GOLDEN
            u1[r, j] = _unit(_mix(base))
            u2[r, j] = _unit(_mix(base + GOLDEN))


def _cms(u1: np.ndarray, u2: np.ndarray, alpha: float, bshift: float) -> np.ndarray:
    """Chambers-Mallows-Stuck in tangent form (vectorised).

    With V = pi (u1 - 1/2), W = -log u2, a = alpha (V + B), d = V - a:
        X = sin(a) cos(V)^(-1/alpha) (cos(d) / W)^((1 - alpha) / alpha),
    for the law with E exp(i theta X) = exp(-|theta|^alpha e^{i phi sgn theta}),
    B = -phi / alpha.  |a/2| and |d/2| stay below pi/2 for admissible (alpha, rho).
    """
    v = u1 - 0.5
    v *= math.pi
    tv = np.tan(v)
    if alpha == 1.0:
        return tv
    half_a = v + bshift
    half_a *= 0.5 * alpha
    half_d = 0.5 * v
    half_d -= half_a
    ta = np.tan(half_a)
    td2 = np.tan(half_d)
    td2 *= td2
    w = np.log(u2)
    np.negative(w, out=w)
    # log(cos d / W) with cos d = (1 - td^2) / (1 + td^2)
    expo = 1.0 - td2
    td2 += 1.0
    td2 *= w
    expo /= td2
    np.log(expo, out=expo)
    expo *= (1.0 - alpha) / alpha
    # -log(cos V) / alpha = log(1 + tan^2 V) / (2 alpha)
    tv *= tv
    tv += 1.0
    np.log(tv, out=tv)
    tv *= 0.5 / alpha
    expo += tv
    np.exp(expo, out=expo)
    # sin a = 2 ta / (1 + ta^2)
    out = ta * ta
    out += 1.0
    np.divide(ta, out, out=out)
    out *= 2.0
    out *= expo
    return out


def _bshift(alpha: float, rho: float) -> float:
    return -math.pi * (0.5 - rho)


def _draw_block(starts: np.ndarray, k0: int, K: int, alpha: float, bshift: float) -> np.ndarray:
    m = starts.size
    u1 = np.empty((m, K))
    u2 = np.empty((m, K))
    _fill_uniforms(starts, k0, K, u1, u2)
    return _cms(u1, u2, alpha, bshift)


# ---------------------------------------------------------------------------
# block kernels
# ---------------------------------------------------------------------------

@njit(cache=True, parallel=True)
def _positive_block(X, act, p, glue, coins, y, hi, lo, nc, nr, alive, absorbed, censor, lsteps, xbuf, ev):
    m, K = X.shape
    for r in prange(m):
        i = act[r]
        yi, h, l = y[i], hi[i], lo[i]
        c, q, cen, ls = nc[i], nr[i], censor[i], lsteps[i]
        live = True
        for j in range(K):
            ev[r, j] = EV_NONE
            if not live:
                xbuf[r, j] = 0.0
                continue
            if cen:
                # censored excursion below zero: no clock, no extrema
                xbuf[r, j] = 0.0
                yi = yi - yi * X[r, j]
                if yi > 0.0:
                    cen = False
                    h = max(h, yi)
                    l = min(l, yi)
                continue
            xbuf[r, j] = yi
            ls += 1
            ynew = yi + yi * X[r, j]
            if ynew < 0.0:
                c += 1
                if _coin(coins[r], c) < p:
                    q += 1
                    ev[r, j] = EV_SURVIVE
                    if glue:
                        cen = True
                        yi = ynew
                        continue
                    ynew = -ynew
                else:
                    ev[r, j] = EV_ABSORB
                    live = False
                    continue
            elif ynew == 0.0:
                c += 1
                ev[r, j] = EV_ABSORB
                live = False
                continue
            yi = ynew
            h = max(h, yi)
            l = min(l, yi)
        y[i], hi[i], lo[i] = yi, h, l
        nc[i], nr[i], censor[i], lsteps[i] = c, q, cen, ls
        alive[i] = live
        absorbed[i] = not live


@njit(cache=True, parallel=True)
def _real_block(X, act, p, phat, coins, y, hi, lo, nc, nr, lsteps, xbuf, ev):
    m, K = X.shape
    for r in prange(m):
        i = act[r]
        xi, h, l = y[i], hi[i], lo[i]
        c, q, ls = nc[i], nr[i], lsteps[i]
        for j in range(K):
            ev[r, j] = EV_NONE
            xbuf[r, j] = xi
            ls += 1
            xnew = xi + abs(xi) * X[r, j]
            if xnew == 0.0:
                xnew = math.copysign(5e-324, xi)
            if (xi > 0.0) != (xnew > 0.0):
                c += 1
                prob = p if xi > 0.0 else phat
                if _coin(coins[r], c) < prob:
                    q += 1
                    ev[r, j] = EV_SURVIVE
                    xnew = -xnew
                else:
                    ev[r, j] = EV_PASS
            xi = xnew
            ax = abs(xi)
            h = max(h, ax)
            l = min(l, ax)
        y[i], hi[i], lo[i] = xi, h, l
        nc[i], nr[i], lsteps[i] = c, q, ls


# ---------------------------------------------------------------------------
# drivers
# ---------------------------------------------------------------------------

def _set_workers(workers: int | None) -> None:
    if workers is not None:
        numba.set_num_threads(max(1, min(int(workers), numba.config.NUMBA_NUM_THREADS)))


@dataclass
class _State:
    y: np.ndarray
    hi: np.ndarray
    lo: np.ndarray
    t: np.ndarray
    nc: np.ndarray
    nr: np.ndarray
    alive: np.ndarray
    absorbed: np.ndarray
    censor: np.ndarray
    lsteps: np.ndarray
    truncated: np.ndarray

    @classmethod
    def fresh(cls, m: int, x0: float) -> "_State":
        i64 = lambda: np.zeros(m, dtype=np.int64)  # noqa: E731
        b = lambda v: np.full(m, v, dtype=np.bool_)  # noqa: E731
        return cls(np.full(m, x0), np.full(m, x0), np.full(m, x0), np.zeros(m), i64(), i64(),
                   b(True), b(False), b(False), i64(), b(False))


def _truncate_rows(st: _State, act, rows, pre, xbuf, ev, dt, alpha, t_max):
    """Rewind paths whose real clock passes t_max inside the block to that moment."""
    for r in rows:
        i = act[r]
        t0 = pre["t"][r]
        cum = t0 + dt * np.cumsum(np.abs(xbuf[r]) ** alpha)
        jstar = int(np.argmax(cum > t_max))
        visited = np.abs(xbuf[r, 1:jstar + 1])
        visited = visited[visited > 0]
        st.hi[i] = max(pre["hi"][r], visited.max()) if visited.size else pre["hi"][r]
        st.lo[i] = min(pre["lo"][r], visited.min()) if visited.size else pre["lo"][r]
        e = ev[r, :jstar]
        st.nc[i] = pre["nc"][r] + int(np.count_nonzero(e))
        st.nr[i] = pre["nr"][r] + int(np.count_nonzero(e == EV_SURVIVE))
        st.lsteps[i] = pre["ls"][r] + int(np.count_nonzero(xbuf[r, :jstar]))
        st.t[i] = cum[jstar - 1] if jstar > 0 else t0
        st.y[i] = xbuf[r, jstar]
        st.alive[i] = False
        st.absorbed[i] = False
        st.truncated[i] = True


def _run_chunk(kind: str, alpha: float, bshift: float, probs, cfg: SimulationConfig, idx: np.ndarray) -> _State:
    m = idx.size
    st = _State.fresh(m, cfg.x0)
    starts = _starts(np.uint64(cfg.seed), idx.astype(np.uint64))
    coins_all = _coin_starts(starts)
    max_steps = int(math.ceil(cfg.lamperti_max / cfg.dt))
    scale = cfg.dt ** (1.0 / alpha)
    act = np.arange(m)
    k0 = 0
    while act.size and k0 < max_steps:
        K = min(BLOCK, max_steps - k0)
        X = _draw_block(starts[act], k0, K, alpha, bshift) * scale
        xbuf = np.empty((act.size, K))
        ev = np.empty((act.size, K), dtype=np.int8)
        pre = {"t": st.t[act], "hi": st.hi[act], "lo": st.lo[act], "nc": st.nc[act], "nr": st.nr[act],
               "ls": st.lsteps[act]}
        coins = coins_all[act]
        if kind == "real":
            _real_block(X, act, probs[0], probs[1], coins, st.y, st.hi, st.lo, st.nc, st.nr, st.lsteps, xbuf, ev)
        else:
            _positive_block(X, act, probs[0], kind == "glued", coins, st.y, st.hi, st.lo, st.nc, st.nr,
                            st.alive, st.absorbed, st.censor, st.lsteps, xbuf, ev)
        tnew = pre["t"] + cfg.dt * np.sum(np.abs(xbuf) ** alpha, axis=1)
        st.t[act] = tnew
        over = np.flatnonzero(tnew > cfg.t_max)
        if over.size:
            _truncate_rows(st, act, over, pre, xbuf, ev, cfg.dt, alpha, cfg.t_max)
        k0 += K
        act = act[st.alive[act]]
    st.truncated[act] = True
    st.alive[act] = False
    return st


def _records(kind: str, st: _State, dt: float) -> PathRecords:
    absorbed = st.absorbed & ~st.truncated
    y = st.y
    with np.errstate(divide="ignore"):
        log_final = np.log(np.abs(y))
    if kind != "real":
        log_final = np.where(absorbed, -np.inf, log_final)
    return PathRecords(
        absorbed=absorbed,
        t_absorb=np.where(absorbed, st.t, np.inf),
        t_end=st.t.copy(),
        sup=st.hi,
        inf=st.lo,
        crossings=st.nc,
        ricochets=st.nr,
        final_sign=np.where(y < 0, -1, 1).astype(np.int64),
        lamperti_time=st.lsteps * dt,
        log_abs_final=log_final,
        truncated=st.truncated,
    )


def _simulate(kind: str, alpha: float, rho: float, probs, cfg: SimulationConfig, idx=None) -> PathRecords:
    _set_workers(cfg.workers)
    if idx is None:
        idx = np.arange(cfg.n_paths, dtype=np.int64)
    bshift = _bshift(alpha, rho)
    parts = [_run_chunk(kind, alpha, bshift, probs, cfg, idx[lo:lo + CHUNK]) for lo in range(0, idx.size, CHUNK)]
    merged = _State(*(np.concatenate([getattr(s, f) for s in parts]) for f in _State.__dataclass_fields__))
    return _records(kind, merged, cfg.dt)


# ---------------------------------------------------------------------------
# public API
# ---------------------------------------------------------------------------

class StreamState(NamedTuple):
    start: int
    counter: int


def stream_state(seed: int, path_index: int) -> StreamState:
    return StreamState(int(_stream_start(np.uint64(seed), np.uint64(path_index))), 0)


def sample_stable_increment(alpha: float, rho: float, dt: float, rng_state: StreamState) -> tuple[float, StreamState]:
    """One draw of X_dt for the strictly stable process and the advanced stream state.

    The draw is the one that drives step ``rng_state.counter`` of the path
    simulators on the same stream.
    """
    _check_stable(alpha, rho)
    start = np.array([rng_state.start], dtype=np.uint64)
    x = _draw_block(start, rng_state.counter, 1, alpha, _bshift(alpha, rho))
    return float(x[0, 0]) * dt ** (1.0 / alpha), StreamState(rng_state.start, rng_state.counter + 1)


def sample_stable_increments(alpha: float, rho: float, dt: float, n: int, seed: int = DEFAULT_SEED) -> np.ndarray:
    """n draws of X_dt, taken from counters 0..n-1 of the stream for path 0."""
    _check_stable(alpha, rho)
    start = np.array([stream_state(seed, 0).start], dtype=np.uint64)
    return _draw_block(start, 0, n, alpha, _bshift(alpha, rho))[0] * dt ** (1.0 / alpha)


def simulate_ricochet(rp: RicochetParameters, cfg: SimulationConfig) -> PathRecords:
    """Positive ricocheted paths: at each crossing below 0 reflect w.p. p, else absorb."""
    return _simulate("ricochet", rp.alpha, rp.rho, (rp.p, 0.0), cfg)


def simulate_glued(gp: GluedParameters, cfg: SimulationConfig) -> PathRecords:
    """Symmetric stable paths whose excursions below 0 are excised w.p. q, else absorbed."""
    return _simulate("glued", gp.alpha, 0.5, (gp.q, 0.0), cfg)


def simulate_rssmp(rs: RssmpParameters, cfg: SimulationConfig) -> PathRecords:
    """Real-valued ricocheted paths: crossings + to - reflect w.p. p, - to + w.p. phat."""
    return _simulate("real", rs.alpha, rs.rho, (rs.p, rs.phat), cfg)


def simulate_ricochet_path(rp: RicochetParameters, cfg: SimulationConfig, path_index: int = 0) -> PathRecord:
    """Record of one path; equal to entry ``path_index`` of ``simulate_ricochet``."""
    idx = np.array([path_index], dtype=np.int64)
    return _simulate("ricochet", rp.alpha, rp.rho, (rp.p, 0.0), cfg, idx).record(0)


def simulate_rssmp_path(rs: RssmpParameters, cfg: SimulationConfig, path_index: int = 0) -> PathRecord:
    idx = np.array([path_index], dtype=np.int64)
    return _simulate("real", rs.alpha, rs.rho, (rs.p, rs.phat), cfg, idx).record(0)


def monitoring_bias_constant(alpha: float, rho: float) -> float:
    """beta = -zeta(1 - 1/alpha) E[X_1^+] for the unit stable law (alpha > 1).

    By Spitzer's identity the running maximum of a stable process sampled at
    spacing h falls short of the continuous one by beta h^(1/alpha) in the
    long-horizon limit.  On the Lamperti grid the shortfall is relative, so
    sup_discrete * exp(beta dt^(1/alpha)) removes it to first order.  Use
    rho^ = 1 - rho for the infimum.
    """
    _check_stable(alpha, rho)
    if not alpha > 1.0:
        raise ParameterError("the monitoring constant needs alpha > 1 (finite E[X^+])")
    mean_pos = math.sin(math.pi * rho) * math.gamma(1.0 - 1.0 / alpha) / math.pi
    return -float(zeta(1.0 - 1.0 / alpha)) * mean_pos


def estimate_sup_laplace(records: PathRecords, z: float, x0: float, continuity_correction: float = 0.0) -> Estimate:
    """Mean of (sup / x0)^(-z); ``continuity_correction`` c rescales each sup by e^c."""
    return estimate(np.exp(-z * (np.log(records.sup / x0) + continuity_correction)),
                    float(np.mean(records.truncated)))


def estimate_inf_laplace(records: PathRecords, z: float, x0: float, continuity_correction: float = 0.0) -> Estimate:
    """Mean of (x0 / inf)^(-z); ``continuity_correction`` c rescales each inf by e^-c."""
    return estimate(np.exp(z * (np.log(records.inf / x0) - continuity_correction)),
                    float(np.mean(records.truncated)))


def estimate_survival_rate(records: PathRecords) -> Estimate:
    """Fraction of crossings that survive, with its binomial standard error."""
    n = int(np.sum(records.crossings))
    k = int(np.sum(records.ricochets))
    if n == 0:
        return Estimate(float("nan"), float("nan"), 0)
    f = k / n
    return Estimate(f, math.sqrt(f * (1 - f) / n), n)


def estimate_log_drift(records: PathRecords, x0: float) -> Estimate:
    """Mean of log(|X_end| / x0) / (Lamperti time), an estimate of chi'(0)."""
    return estimate((records.log_abs_final - math.log(x0)) / records.lamperti_time,
                    float(np.mean(records.truncated)))


def estimate_mellin_t0(rp: RicochetParameters, s: float, cfg: SimulationConfig,
                       records: PathRecords | None = None) -> Estimate:
    """Mean of (T0 / x0^alpha)^(s - 1) over absorbed paths, with the truncated fraction."""
    if rp.p == 1.0 and not 0.5 - rp.alpha * rp.rho_hat < 0:
        raise ParameterError("T0 is infinite a.s. for p = 1 unless sigma < 0")
    if records is None:
        records = simulate_ricochet(rp, cfg)
    t = records.t_absorb[records.absorbed] / cfg.x0**rp.alpha
    frac = float(np.mean(records.truncated))
    if s == 1.0:
        return Estimate(1.0, 0.0, int(t.size), frac)
    return estimate(t ** (s - 1.0), frac)


def t0_histogram(records: PathRecords, edges, x0: float, alpha: float):
    """Empirical density of T0 / x0^alpha on ``edges`` with per-bin standard errors.

    Normalised by the total number of paths, so truncated paths lower the mass.
    """
    edges = np.asarray(edges, dtype=float)
    t = records.t_absorb[records.absorbed] / x0**alpha
    counts, _ = np.histogram(t, bins=edges)
    n = len(records)
    frac = counts / n
    width = np.diff(edges)
    return frac / width, np.sqrt(frac * (1 - frac) / n) / width
