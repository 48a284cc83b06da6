import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dhglevy.errors import ParameterError
from dhglevy.expfunctional import density_via_inverse_mellin
from dhglevy.montecarlo import (SEED_ENV, Estimate, SimulationConfig, default_seed, estimate, estimate_inf_laplace,
                                estimate_log_drift, estimate_mellin_t0, estimate_sup_laplace, estimate_survival_rate,
                                monitoring_bias_constant, sample_stable_increment, sample_stable_increments,
                                simulate_glued, simulate_ricochet, simulate_ricochet_path, simulate_rssmp,
                                simulate_rssmp_path, stream_state, t0_histogram)
from dhglevy.ricochet import (GluedParameters, RicochetParameters, glued_inf_law_laplace, glued_sup_law_laplace,
                              sup_law_laplace, t0_mellin, t0_mellin_spec)
from dhglevy.rssmp import RssmpParameters, chi_prime_zero

MC = RicochetParameters(1.5, 0.4, 0.5)
SEED = 20240607


@pytest.fixture(scope="module")
def mc_records():
    return simulate_ricochet(MC, SimulationConfig(seed=SEED, n_paths=8000))


# ---------------------------------------------------------------------------
# the increment sampler
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("alpha,rho", [(1.5, 0.4), (0.7, 0.3), (1.0, 0.5), (1.9, 0.5), (0.4, 0.8)])
def test_sampler_positivity_and_characteristic_function(alpha, rho):
    n = 200_000
    x = sample_stable_increments(alpha, rho, 1.0, n, seed=11)
    pos = np.mean(x >= 0)
    assert abs(pos - rho) < 4 * math.sqrt(rho * (1 - rho) / n)
    for u in (0.3, 1.0, 2.0):
        c = np.exp(1j * u * x)
        target = np.exp(-u**alpha * np.exp(-1j * math.pi * alpha * (rho - 0.5)))
        se = math.sqrt(np.var(c.real) / n) + math.sqrt(np.var(c.imag) / n)
        assert abs(np.mean(c) - target) < 4 * se


def test_sampler_self_similarity():
    a = sample_stable_increments(1.5, 0.4, 1.0, 1000, seed=3)
    b = sample_stable_increments(1.5, 0.4, 1e-3, 1000, seed=3)
    np.testing.assert_allclose(b, a * 1e-3 ** (1 / 1.5), rtol=1e-12)


def test_scalar_sampler_walks_the_stream():
    st0 = stream_state(SEED, 5)
    v1, st1 = sample_stable_increment(1.5, 0.4, 1e-3, st0)
    v2, st2 = sample_stable_increment(1.5, 0.4, 1e-3, st1)
    again, _ = sample_stable_increment(1.5, 0.4, 1e-3, st0)
    assert v1 == again and v1 != v2
    assert st2.counter == st0.counter + 2 and st2.start == st0.start


# ---------------------------------------------------------------------------
# configuration and estimators
# ---------------------------------------------------------------------------

def test_config_validation():
    with pytest.raises(ParameterError):
        SimulationConfig(dt=0.1)
    with pytest.raises(ParameterError):
        SimulationConfig(n_paths=0)
    with pytest.raises(ParameterError):
        SimulationConfig(seed=-1)
    assert SimulationConfig().with_(n_paths=7).n_paths == 7


def test_default_seed_reads_environment(monkeypatch):
    monkeypatch.setenv(SEED_ENV, "99")
    assert default_seed() == 99
    monkeypatch.delenv(SEED_ENV)
    assert default_seed() == SEED


@given(st.lists(st.floats(-1e3, 1e3), min_size=2, max_size=200))
def test_estimate_matches_numpy(xs):
    e = estimate(xs)
    assert e.mean == pytest.approx(np.mean(xs), abs=1e-9)
    assert e.std_error == pytest.approx(np.std(xs, ddof=1) / math.sqrt(len(xs)), abs=1e-9)


def test_estimate_sum_is_order_robust():
    v = np.random.default_rng(0).standard_cauchy(100_001)
    a = estimate(v).mean
    b = estimate(v[::-1]).mean
    assert abs(a - b) <= 64 * np.finfo(float).eps * np.sum(np.abs(v)) / v.size


def test_z_score():
    assert Estimate(1.0, 0.5, 10).z_score(0.0) == 2.0
    assert Estimate(1.0, 0.0, 10).z_score(1.0) == 0.0


# ---------------------------------------------------------------------------
# ricocheted paths
# ---------------------------------------------------------------------------

def test_record_invariants(mc_records):
    r = mc_records
    assert np.all(r.sup >= 1.0) and np.all(r.inf <= 1.0) and np.all(r.inf > 0)
    assert np.all(r.ricochets <= r.crossings)
    # every crossing is either survived or is the absorbing one
    np.testing.assert_array_equal(r.crossings - r.ricochets, r.absorbed.astype(int))
    assert np.all(np.isfinite(r.t_absorb[r.absorbed]))
    assert np.all(np.isinf(r.t_absorb[~r.absorbed]))


def test_survival_rate(mc_records):
    e = estimate_survival_rate(mc_records)
    assert abs(e.z_score(MC.p)) < 3


def test_sup_law_close_to_analytic(mc_records):
    # dt = 1e-3 leaves a monitoring bias near 0.005, well inside 4 SE at this n
    for z in (0.5, 1.0, 2.0):
        e = estimate_sup_laplace(mc_records, z, 1.0)
        assert abs(e.z_score(float(sup_law_laplace(MC, z)))) < 4


def test_p_zero_absorbs_at_first_crossing():
    rec = simulate_ricochet(RicochetParameters(1.5, 0.4, 0.0), SimulationConfig(seed=1, n_paths=500))
    assert np.all(rec.absorbed) and np.all(rec.crossings == 1) and np.all(rec.ricochets == 0)


def test_determinism_across_workers():
    cfg = SimulationConfig(seed=SEED, n_paths=3000)
    a = simulate_ricochet(MC, cfg.with_(workers=1))
    b = simulate_ricochet(MC, cfg.with_(workers=2))
    for name in a.__dataclass_fields__:
        np.testing.assert_array_equal(getattr(a, name), getattr(b, name))


def test_single_path_equals_batch_entry(mc_records):
    cfg = SimulationConfig(seed=SEED, n_paths=8000)
    for i in (0, 17, 4321):
        assert simulate_ricochet_path(MC, cfg, i) == mc_records.record(i)


def test_prefix_stability():
    # path i does not depend on how many other paths are simulated
    a = simulate_ricochet(MC, SimulationConfig(seed=5, n_paths=100))
    b = simulate_ricochet(MC, SimulationConfig(seed=5, n_paths=2500))
    np.testing.assert_array_equal(a.sup, b.sup[:100])


def test_standard_error_scales_like_inverse_root_n():
    small = estimate_sup_laplace(simulate_ricochet(MC, SimulationConfig(seed=2, n_paths=2000)), 1.0, 1.0)
    large = estimate_sup_laplace(simulate_ricochet(MC, SimulationConfig(seed=2, n_paths=8000)), 1.0, 1.0)
    assert small.std_error / large.std_error == pytest.approx(2.0, rel=0.15)


def test_discretisation_bias_shrinks_with_dt():
    target = float(sup_law_laplace(MC, 1.0))
    beta = monitoring_bias_constant(MC.alpha, MC.rho)
    bias = {}
    for dt in (1e-2, 5e-3):
        rec = simulate_ricochet(MC, SimulationConfig(seed=8, n_paths=40_000, dt=dt))
        bias[dt] = estimate_sup_laplace(rec, 1.0, 1.0).mean - target
        # the first-order continuity correction removes most of it
        corrected = estimate_sup_laplace(rec, 1.0, 1.0, beta * dt ** (1 / MC.alpha))
        assert abs(corrected.mean - target) < abs(bias[dt])
    assert bias[1e-2] > bias[5e-3] > 0


def test_monitoring_constant_value():
    # -zeta(1/3) sin(0.4 pi) Gamma(1/3) / pi for (1.5, 0.4)
    assert monitoring_bias_constant(1.5, 0.4) == pytest.approx(0.7894, abs=1e-4)
    with pytest.raises(ParameterError):
        monitoring_bias_constant(0.8, 0.5)


def test_truncation_at_real_time_horizon():
    cfg = SimulationConfig(seed=3, n_paths=400, t_max=0.05)
    rec = simulate_ricochet(MC, cfg)
    assert np.any(rec.truncated)
    assert np.all(rec.t_end <= 0.05 * (1 + 1e-12))
    assert not np.any(rec.truncated & rec.absorbed)
    # a truncated path ends on the last grid time before the horizon
    assert np.all(rec.t_end[rec.truncated] > 0.04)


def test_t0_mellin_moments(mc_records):
    cfg = SimulationConfig(seed=SEED, n_paths=8000)
    assert estimate_mellin_t0(MC, 1.0, cfg, mc_records).mean == 1.0
    e = estimate_mellin_t0(MC, 1.25, cfg, mc_records)
    assert abs(e.z_score(float(t0_mellin(MC, 1.25)))) < 4
    with pytest.raises(ParameterError):
        estimate_mellin_t0(RicochetParameters(0.8, 0.6, 1.0), 1.25, cfg)


def test_t0_histogram_matches_inverse_mellin_density(mc_records):
    edges = np.geomspace(0.02, 20.0, 13)
    dens, se = t0_histogram(mc_records, edges, 1.0, MC.alpha)
    # T0 = 2^-alpha I, so f_T0(t) = 2^alpha p_I(2^alpha t); average p over each bin
    spec = t0_mellin_spec(MC)
    fine = np.geomspace(edges[0], edges[-1], 1201)
    f = 2**MC.alpha * density_via_inverse_mellin(spec, 2**MC.alpha * fine)
    target = np.array([np.trapezoid(f[(fine >= lo) & (fine <= hi)], fine[(fine >= lo) & (fine <= hi)]) / (hi - lo)
                       for lo, hi in zip(edges[:-1], edges[1:])])
    z = (dens - target) / se
    assert np.max(np.abs(z)) < 4.5


# ---------------------------------------------------------------------------
# glued and real-valued processes
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("alpha,q", [(0.8, 0.3), (1.2, 0.5)])
def test_glued_laws(alpha, q):
    gp = GluedParameters(alpha, q)
    rec = simulate_glued(gp, SimulationConfig(seed=4, n_paths=6000))
    assert abs(estimate_survival_rate(rec).z_score(q)) < 3
    for z in (0.5, 2.0):
        assert abs(estimate_sup_laplace(rec, z, 1.0).z_score(float(glued_sup_law_laplace(gp, z)))) < 4
        assert abs(estimate_inf_laplace(rec, z, 1.0).z_score(float(glued_inf_law_laplace(gp, z)))) < 4


def test_rssmp_drift_sign():
    rs = RssmpParameters(1.5, 0.4, 0.3, 0.6)
    rec = simulate_rssmp(rs, SimulationConfig(seed=6, n_paths=1000, lamperti_max=20.0))
    e = estimate_log_drift(rec, 1.0)
    assert np.sign(e.mean) == np.sign(chi_prime_zero(rs)) and abs(e.mean) > 3 * e.std_error
    assert simulate_rssmp_path(rs, SimulationConfig(seed=6, n_paths=1000, lamperti_max=20.0), 9) == rec.record(9)


def test_rssmp_without_reflection_is_the_stable_process():
    # p = phat = 0: X is the unperturbed stable process, so P(X_t > 0) -> rho for t >> 1
    rs = RssmpParameters(0.8, 0.3, 0.0, 0.0)
    n = 10_000
    rec = simulate_rssmp(rs, SimulationConfig(seed=9, n_paths=n, t_max=1e4, lamperti_max=1e6))
    assert not np.any(rec.lamperti_time >= 1e6)
    frac = np.mean(rec.final_sign > 0)
    assert abs(frac - 0.3) < 4 * math.sqrt(0.21 / n)
