"""Acceptance suites shared by the test suite and ``dhglevy selftest``.

Each criterion returns a CriterionResult made of named checks; a criterion
passes when all of its checks pass.  Parameter sets are drawn from seeded
generators, so every run evaluates exactly the same cases.  ``level="quick"``
shrinks sample counts for smoke runs; ``"full"`` uses the stated sizes.
"""
from __future__ import annotations

import json
import math
import subprocess
import sys
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import montecarlo as mc
from .dhgprocess import DhgParameters, growth_index_fit, levy_density_two_sided, two_sided_residue_density
from .doublebeta import (
    Quadruple,
    classify,
    laplace_exponent,
    laplace_of_levy_density,
    laplace_of_potential_density,
    random_interior_quadruple,
    residue_series,
)
from .errors import DhgError
from .expfunctional import MellinSpec, fit_decay_slope, functional_equation_residual, mellin
from .ricochet import (
    Form,
    GluedParameters,
    RicochetParameters,
    factor_gate,
    glued_exponent,
    glued_factors,
    is_pick_on_samples,
    psi_dagger,
    psi_star,
    random_ricochet_parameters,
    sigma_b,
    sup_law_laplace,
    upper_half_plane_samples,
    wiener_hopf_condition,
)
from .rssmp import (
    MatrixForm,
    RssmpParameters,
    chi_prime_zero,
    matrix_exponent,
    perron_eigenvalue,
    random_rssmp_parameters,
)

SEED = 20240607
Z_VALUES = (0.5, 1.0, 2.0, 5.0)
PICK_CONTROL = Quadruple(0.5, 1.8, 0.2, 0.9)
GAUSSIAN_PAIR = (Quadruple(0.5, 1.2, 0.2, 0.5), Quadruple(0.5, 1.3, 0.3, 0.5))
MC_RICOCHET = RicochetParameters(1.5, 0.4, 0.5)
MC_RSSMP = RssmpParameters(1.5, 0.4, 0.3, 0.6)
GLUED_SETS = ((0.8, 0.3), (1.2, 0.5), (1.6, 0.9))


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    limit: float
    passed: bool
    note: str = ""

    def render(self) -> str:
        s = f"{self.name}={_fmt(self.value)} (limit {_fmt(self.limit)})"
        return s + (f" [{self.note}]" if self.note else "")


@dataclass(frozen=True)
class CriterionResult:
    number: int
    title: str
    checks: tuple[Check, ...]
    elapsed: float = field(default=0.0, compare=False)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def line(self, timings: bool = False) -> str:
        head = f"{'PASS' if self.passed else 'FAIL'} [{self.number:2d}] {self.title}"
        body = "; ".join(c.render() for c in self.checks)
        tail = f" ({self.elapsed:.1f} s)" if timings else ""
        return f"{head}: {body}{tail}"

    def as_dict(self, timings: bool = False) -> dict:
        d = {"number": self.number, "title": self.title, "passed": self.passed,
             "checks": [{"name": c.name, "value": c.value, "limit": c.limit, "passed": c.passed, "note": c.note}
                        for c in self.checks]}
        if timings:
            d["elapsed"] = self.elapsed
        return d


def _fmt(x: float) -> str:
    if isinstance(x, bool):
        return str(x)
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{x:.3e}"


def _le(name: str, value: float, limit: float, note: str = "") -> Check:
    return Check(name, float(value), float(limit), bool(value <= limit), note)


def _rng(k: int) -> np.random.Generator:
    return np.random.default_rng([k, SEED])


def _rel(a, b) -> float:
    a, b = np.asarray(a), np.asarray(b)
    return float(np.max(np.abs(a - b) / np.maximum(np.maximum(np.abs(a), np.abs(b)), 1e-300)))


# ---------------------------------------------------------------------------
# shared parameter sets
# ---------------------------------------------------------------------------

def interior_quadruples(n: int = 20) -> list[Quadruple]:
    rng = _rng(2)
    return [random_interior_quadruple(rng) for _ in range(n)]


def interior_pairs(n: int, k: int) -> list[DhgParameters]:
    rng = _rng(k)
    out = []
    while len(out) < n:
        try:
            out.append(DhgParameters(random_interior_quadruple(rng), random_interior_quadruple(rng)))
        except DhgError:
            continue
    return out


def mellin_specs(n: int = 5) -> list[MellinSpec]:
    rng = _rng(6)
    out = []
    while len(out) < n:
        try:
            p = DhgParameters(random_interior_quadruple(rng), random_interior_quadruple(rng))
            out.append(MellinSpec(p, float(rng.uniform(0.5, 3.0))))
        except DhgError:
            continue
    return out


# ---------------------------------------------------------------------------
# criteria
# ---------------------------------------------------------------------------

def criterion_1(level: str = "full") -> CriterionResult:
    n = 200 if level == "full" else 40
    rng = _rng(1)
    th = np.linspace(-10.0, 10.0, 41)
    worst = 0.0
    for _ in range(n):
        rp = random_ricochet_parameters(rng)
        vals = [psi_star(rp, th, f) for f in Form]
        worst = max(worst, _rel(vals[0], vals[1]), _rel(vals[0], vals[2]), _rel(vals[1], vals[2]))
    return CriterionResult(1, "three-form Psi* agreement", (_le("max_rel", worst, 1e-9),))


def criterion_2(level: str = "full") -> CriterionResult:
    qs = interior_quadruples(20 if level == "full" else 5)
    worst = 0.0
    for q in qs:
        for z in Z_VALUES:
            phi = float(np.real(laplace_exponent(q, z)))
            worst = max(worst, abs(laplace_of_levy_density(q, z) - phi) / abs(phi))
    return CriterionResult(2, "subordinator Laplace identity", (_le("max_rel", worst, 1e-6),))


def criterion_3(level: str = "full") -> CriterionResult:
    qs = interior_quadruples(20 if level == "full" else 5)
    worst = 0.0
    for q in qs:
        for z in Z_VALUES:
            target = 1.0 / float(np.real(laplace_exponent(q, z)))
            worst = max(worst, abs(laplace_of_potential_density(q, z) - target) / abs(target))
    return CriterionResult(3, "potential identity", (_le("max_rel", worst, 1e-6),))


def criterion_4(level: str = "full") -> CriterionResult:
    qs = interior_quadruples(20 if level == "full" else 5)
    z = np.array([1.0, 2.0])
    worst_phi = worst_phi_plain = 0.0
    for q in qs:
        series = residue_series(q, 200)
        phi = np.real(laplace_exponent(q, z))
        worst_phi = max(worst_phi, _rel(series.evaluate(z), phi))
        worst_phi_plain = max(worst_phi_plain, _rel(series.evaluate(z, tail=False), phi))
    x = np.array([0.1, 0.5, 1.0, 5.0, -0.1, -0.5, -1.0, -5.0])
    worst_pi = worst_pi_plain = 0.0
    for p in interior_pairs(5 if level == "full" else 2, 4):
        direct = levy_density_two_sided(p, x)
        worst_pi = max(worst_pi, _rel(two_sided_residue_density(p, x, 300), direct))
        worst_pi_plain = max(worst_pi_plain, _rel(two_sided_residue_density(p, x, 300, tail=False), direct))
    return CriterionResult(4, "residue-oracle equivalence", (
        _le("Phi_max_rel", worst_phi, 1e-8, f"200 poles + tail; bare partial sum {worst_phi_plain:.1e}"),
        _le("pi_max_rel", worst_pi, 1e-8, f"300 poles + tail; bare partial sum {worst_pi_plain:.1e}"),
    ))


def criterion_5(level: str = "full") -> CriterionResult:
    rng = _rng(5)
    qs = interior_quadruples(20)
    pts = upper_half_plane_samples(rng, 500)
    n_ok = sum(is_pick_on_samples(q, pts) for q in qs)
    im = np.imag(laplace_exponent(PICK_CONTROL, pts))
    n_neg = int(np.count_nonzero(im < 0))
    return CriterionResult(5, "Pick-property gate", (
        Check("interior_pick", n_ok, len(qs), n_ok == len(qs), "quadruples with Im Phi > 0 at all points"),
        Check("control_negative_points", n_neg, 1, n_neg >= 1, "needs >= 1"),
    ))


def criterion_6(level: str = "full") -> CriterionResult:
    worst_fe = worst_m1 = worst_slope = worst_slope_corr = 0.0
    for spec in mellin_specs(5):
        hi = spec.params.minus.canonical().gamma * spec.c
        s = np.linspace(0.0, hi, 52)[1:-1]
        worst_fe = max(worst_fe, float(np.max(functional_equation_residual(spec, s))))
        worst_m1 = max(worst_m1, abs(float(mellin(spec, 1.0)) - 1.0))
        slope = fit_decay_slope(spec, 0.5 * sum(spec.strip))
        worst_slope = max(worst_slope, abs(slope / spec.decay_rate_stated - 1.0))
        worst_slope_corr = max(worst_slope_corr, abs(slope / spec.decay_rate - 1.0))
    return CriterionResult(6, "Mellin functional equation", (
        _le("functional_eq", worst_fe, 1e-8),
        _le("abs(M(1)-1)", worst_m1, 1e-12),
        _le("slope_vs_-(pi/2)(1+D/2)", worst_slope, 0.05,
            f"vs -(pi/2)(1+D): {worst_slope_corr:.1e}"),
    ))


def criterion_7(level: str = "full") -> CriterionResult:
    rng = _rng(7)
    th = np.linspace(-5.0, 5.0, 41)
    worst_m = worst_chi0 = worst_fd = 0.0
    h = 1e-5
    for _ in range(100):
        rs = random_rssmp_parameters(rng)
        worst_m = max(worst_m, _rel(matrix_exponent(rs, th, MatrixForm.SINE), matrix_exponent(rs, th, MatrixForm.GAMMA)))
        worst_chi0 = max(worst_chi0, abs(perron_eigenvalue(rs, 0.0)))
        fd = (perron_eigenvalue(rs, h) - perron_eigenvalue(rs, -h)) / (2 * h)
        worst_fd = max(worst_fd, abs(fd - chi_prime_zero(rs)))
    worst_id = 0.0
    for _ in range(100):
        base = random_rssmp_parameters(rng)
        rs = RssmpParameters(base.alpha, base.rho, base.p, base.p)
        a = rs.alpha
        lhs = chi_prime_zero(rs) * (math.sin(math.pi * a * rs.rho) + math.sin(math.pi * a * rs.rho_hat))
        rhs = math.gamma(a) * math.sin(math.pi * a)
        worst_id = max(worst_id, abs(lhs - rhs) / max(1.0, abs(rhs)))
    return CriterionResult(7, "MAP suite", (
        _le("sine_vs_gamma", worst_m, 1e-9),
        _le("abs(chi(0))", worst_chi0, 1e-12),
        _le("chi'(0)_fd", worst_fd, 1e-6),
        _le("p=phat_identity", worst_id, 1e-10),
    ))


def criterion_8(level: str = "full") -> CriterionResult:
    n = 10_000 if level == "full" else 2_000
    rng = _rng(8)
    mismatch = 0
    for _ in range(n):
        rp = random_ricochet_parameters(rng)
        w = wiener_hopf_condition(rp)
        if not (w.interval_form == w.sine_form == factor_gate(rp)):
            mismatch += 1
    b0 = max(abs(sigma_b(RicochetParameters(a, r, 0.0)).b - 0.5) for a, r in _stable_grid())
    b1 = max(abs(sigma_b(RicochetParameters(a, r, 1.0)).b - abs(sigma_b(RicochetParameters(a, r, 1.0)).sigma))
             for a, r in _stable_grid())
    return CriterionResult(8, "WH condition", (
        Check("mismatches", mismatch, 0, mismatch == 0, f"{n} samples"),
        Check("p=0:abs(b-1/2)", b0, 0.0, b0 == 0.0),
        _le("p=1:abs(b-abs(sigma))", b1, 1e-14),
    ))


def _stable_grid():
    yield 1.0, 0.5  # the Cauchy case is only admissible when symmetric
    for a in (0.3, 0.7, 1.3, 1.8):
        lo, hi = max(0.0, 1 - 1 / a), min(1.0, 1 / a)
        for r in np.linspace(lo, hi, 7)[1:-1]:
            yield a, float(r)


def criterion_9(level: str = "full") -> CriterionResult:
    th = np.linspace(-10.0, 10.0, 41)
    worst = max(_rel(glued_exponent(GluedParameters(a, 0.0), th), psi_dagger(a, 0.5, th)) for a in (0.5, 0.8, 1.2, 1.6, 1.9))
    n_in = sum(classify(f).in_G for a, q in GLUED_SETS for f in glued_factors(GluedParameters(a, q)))
    return CriterionResult(9, "glued reduction", (
        _le("q=0_max_rel", worst, 1e-10),
        Check("factors_in_G", n_in, 2 * len(GLUED_SETS), n_in == 2 * len(GLUED_SETS)),
    ))


def criterion_10(level: str = "full", workers: int | None = None) -> CriterionResult:
    n = 100_000 if level == "full" else 10_000
    t0 = time.perf_counter()
    cfg = mc.SimulationConfig(seed=SEED, n_paths=n, dt=1e-3, workers=workers)
    rec = mc.simulate_ricochet(MC_RICOCHET, cfg)
    checks = []
    beta = mc.monitoring_bias_constant(MC_RICOCHET.alpha, MC_RICOCHET.rho)
    for z in (0.5, 1.0, 2.0):
        target = float(sup_law_laplace(MC_RICOCHET, z))
        est = mc.estimate_sup_laplace(rec, z, cfg.x0)
        corr = mc.estimate_sup_laplace(rec, z, cfg.x0, continuity_correction=beta * cfg.dt ** (1 / MC_RICOCHET.alpha))
        checks.append(_le(f"sup_z{z:g}_|z|", abs(est.z_score(target)), 4.0,
                          f"bias {est.mean - target:+.2e}; continuity-corrected |z| {abs(corr.z_score(target)):.2f}"))
    surv = mc.estimate_survival_rate(rec)
    checks.append(_le("survival_|z|", abs(surv.z_score(MC_RICOCHET.p)), 3.0))
    rcfg = mc.SimulationConfig(seed=SEED, n_paths=2_000, dt=1e-3, lamperti_max=20.0, workers=workers)
    drift = mc.estimate_log_drift(mc.simulate_rssmp(MC_RSSMP, rcfg), rcfg.x0)
    cp = chi_prime_zero(MC_RSSMP)
    agree = math.copysign(1.0, drift.mean) == math.copysign(1.0, cp) and abs(drift.mean) > 3 * drift.std_error
    checks.append(Check("drift_sign", drift.mean, cp, agree, "estimate vs chi'(0); signs must agree at 3 SE"))
    elapsed = time.perf_counter() - t0
    if level == "full":
        checks.append(_le("runtime_s", elapsed, 300.0))
    return CriterionResult(10, "Monte Carlo cross-validation", tuple(checks))


def criterion_11(level: str = "full") -> CriterionResult:
    pairs = interior_pairs(4, 11) + [DhgParameters(*GAUSSIAN_PAIR)]
    worst = max(abs(growth_index_fit(p) - p.index) for p in pairs)
    gauss = growth_index_fit(pairs[-1])
    return CriterionResult(11, "asymptotic index", (
        _le("max_abs_slope_err", worst, 0.02),
        _le("gaussian_abs(slope-2)", abs(gauss - 2.0), 0.02),
    ))


def criterion_12(level: str = "full") -> CriterionResult:
    sim = ["simulate", "--process", "ricochet", "--alpha", "1.5", "--rho", "0.4", "--p", "0.5",
           "--n-paths", "3000", "--seed", str(SEED), "--z", "0.5,1,2"]
    outs = [_cli(sim + ["--workers", w]) for w in ("1", "2", "1")]
    sim_same = len(set(outs)) == 1
    st = [_cli(["selftest", "--level", "quick", "--only", "1,5,8,9,10", "--workers", w]) for w in ("1", "2")]
    st_same = len(set(st)) == 1
    return CriterionResult(12, "determinism", (
        Check("simulate_identical", float(sim_same), 1.0, sim_same, "3 runs, workers 1/2/1"),
        Check("selftest_identical", float(st_same), 1.0, st_same, "2 runs, workers 1/2"),
    ))


def _cli(args: list[str]) -> bytes:
    proc = subprocess.run([sys.executable, "-m", "dhglevy", *args], capture_output=True, check=False)
    return bytes([proc.returncode]) + proc.stdout


CRITERIA: dict[int, Callable[..., CriterionResult]] = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5, 6: criterion_6,
    7: criterion_7, 8: criterion_8, 9: criterion_9, 10: criterion_10, 11: criterion_11, 12: criterion_12,
}


def run(number: int, level: str = "full", workers: int | None = None) -> CriterionResult:
    fn = CRITERIA[number]
    t0 = time.perf_counter()
    res = fn(level, workers) if number == 10 else fn(level)
    return CriterionResult(res.number, res.title, res.checks, time.perf_counter() - t0)


def run_all(level: str = "full", only=None, workers: int | None = None) -> list[CriterionResult]:
    nums = sorted(only) if only else sorted(CRITERIA)
    return [run(k, level, workers) for k in nums]


def report_json(results: list[CriterionResult], timings: bool = False) -> str:
    return json.dumps({"passed": all(r.passed for r in results),
                       "criteria": [r.as_dict(timings) for r in results]}, indent=2, sort_keys=True)
