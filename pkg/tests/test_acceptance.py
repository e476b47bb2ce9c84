"""Acceptance criteria, one test per criterion (split where a criterion
has independent halves). Each test prints a PASS/FAIL line with the
measured numbers (run with -s to see them live).

Criterion 4's small-chi half is implemented exactly as stated and is
expected to fail: the A/8 ultra-relativistic cooling limit of the
closed-form rate parameter does not describe the collision integral (the
measured rate is ~ 0.44 A; direct quadrature of the equilibrium moment
gives 0.50 A through the energy route for every admissible kernel, and
the mismatch is independent of the rate normalization, which the
large-chi half pins to within a few percent).
"""

import time

import numpy as np
import pytest

from opiniongas.collision import CollisionParams, collide_direct
from opiniongas.diagnostics import measure_flow
from opiniongas.dsmc import (
    EquilibriumInitial,
    SimConfig,
    UniformRanges,
    advance,
    init_ensemble,
    run,
    tail_mean,
    vlasov_step,
)
from opiniongas.equilibrium import MjState, chi_from_energy, energy_density, mj_sample
from opiniongas.presets import build_preset
from opiniongas.theory import (
    SteadyStateSpec,
    find_psi1_peak,
    heating_rate_mj,
    psi1,
    psi1_zero,
    psi2,
    steady_state_pdf,
    transported_mj_pdf,
)

N_FULL = 100_000


def report(criterion: str, ok: bool, detail: str) -> bool:
    print(f"ACCEPTANCE {criterion} {'PASS' if ok else 'FAIL'}: {detail}")
    return ok


def fit_log_rate(summary, chi_cap):
    t = np.array([r.t for r in summary.flow_states])
    chi = np.array([r.chi for r in summary.flow_states])
    w = chi <= chi_cap
    return float(np.polyfit(t[w], np.log(chi[w]), 1)[0])


# --- shared heavy runs ------------------------------------------------------


@pytest.fixture(scope="module")
def run_ac4_small():
    return run(SimConfig(lambda_=0.0, delta_amp=0.0, t_end=10.0,
                         init=EquilibriumInitial(0.05), n_particles=N_FULL,
                         seed=41, output_every=2))


@pytest.fixture(scope="module")
def run_ac4_large():
    return run(SimConfig(lambda_=0.0, delta_amp=0.0, t_end=9.0,
                         init=EquilibriumInitial(25.0), n_particles=N_FULL,
                         seed=42, output_every=2))


@pytest.fixture(scope="module")
def run_c2_weak_kick():
    return run(build_preset("c2"))  # delta_amp 1, horizon 3000


@pytest.fixture(scope="module")
def run_c2_strong_kick():
    return run(build_preset("c2", delta_amp=11.5))  # horizon 150


@pytest.fixture(scope="module")
def run_a4():
    return run(build_preset("a4"))


@pytest.fixture(scope="module")
def run_a1():
    return run(build_preset("a1"))


@pytest.fixture(scope="module")
def dgrid_summaries():
    grid = build_preset("d-grid")
    return {(cfg.delta_amp, cfg.m_party): run(cfg) for _, cfg in grid.members}


# --- criteria ---------------------------------------------------------------


def test_criterion_01_psi1_figure_reproduction():
    start = time.perf_counter()
    chi_pk, val_pk = find_psi1_peak()
    low = psi1(1e-4, 0.0)
    high_ratio = psi1(200.0, 0.0) * np.sqrt(200.0 * np.pi) / 2.0
    elapsed = time.perf_counter() - start
    ok = (
        abs(val_pk - 0.295) <= 0.01 * 0.295
        and abs(chi_pk - 4.14) <= 0.02 * 4.14
        and abs(low - 0.125) < 1e-3
        and abs(high_ratio - 1.0) < 0.05
        and elapsed < 1.0
    )
    assert report("1", ok,
                  f"peak {val_pk:.4f}@{chi_pk:.3f} (0.295@4.14), psi1(1e-4)={low:.5f}, "
                  f"asymptote ratio {high_ratio:.3f}, {elapsed * 1e3:.0f} ms")


def test_criterion_02_psi1_forms_consistent():
    chis = np.geomspace(0.1, 50.0, 500)
    rel = np.abs(psi1(chis, 0.0) - psi1_zero(chis)) / psi1_zero(chis)
    ok = float(np.max(rel)) < 1e-10
    assert report("2", ok, f"max relative difference {np.max(rel):.2e} over 500 points")


def test_criterion_03_psi2_limits():
    vals = {p: psi2(1e-4, p) for p in (0.0, 1.0)}
    high = psi2(1e4, 0.0)
    ok = all(abs(v - 1.0) < 1e-3 for v in vals.values()) and abs(high - 2.0) < 1e-2
    assert report("3", ok,
                  f"psi2(1e-4,0)={vals[0.0]:.6f}, psi2(1e-4,1)={vals[1.0]:.6f}, "
                  f"psi2(1e4,0)={high:.4f}")


def test_criterion_04_collision_cooling_small_chi(run_ac4_small):
    # as specified: chi(t) = chi0 exp(A t/8) for chi -> 0. The measured
    # e-route rate is ~3.5x larger (see module docstring and the ledger);
    # kept as stated rather than loosened.
    rate = fit_log_rate(run_ac4_small, 0.05 * np.e)
    target = 1.0 / 8.0
    ok = abs(rate - target) <= 0.10 * target
    assert report("4 (small chi)", ok, f"fitted rate {rate:.4f} vs A/8 = {target:.4f} +-10%")


def test_criterion_04_collision_cooling_large_chi(run_ac4_large):
    t = np.array([r.t for r in run_ac4_large.flow_states])
    chi = np.array([r.chi for r in run_ac4_large.flow_states])
    w = chi >= 2.0 * 25.0
    slope = float(np.polyfit(t[w], np.sqrt(chi[w]), 1)[0])
    target = 1.0 / np.sqrt(np.pi)
    ok = abs(slope - target) <= 0.10 * target
    assert report("4 (large chi)", ok,
                  f"sqrt(chi) slope {slope:.4f} vs A/sqrt(pi) = {target:.4f} +-10%")


def test_criterion_05_vlasov_cooling_rates():
    small = run(SimConfig(lambda_=1.0, delta_amp=0.0, b_rate=0.1, m_party=0.0,
                          t_end=12.0, init=EquilibriumInitial(0.05),
                          n_particles=N_FULL, seed=43, output_every=2))
    rate_small = fit_log_rate(small, 0.05 * np.e)
    large = run(SimConfig(lambda_=1.0, delta_amp=0.0, b_rate=0.1, m_party=0.0,
                          t_end=6.0, init=EquilibriumInitial(25.0),
                          n_particles=N_FULL, seed=44, output_every=2))
    rate_large = fit_log_rate(large, 25.0 * np.e)
    ok = abs(rate_small - 0.1) <= 0.01 and abs(rate_large - 0.2) <= 0.02
    assert report("5", ok,
                  f"rates {rate_small:.4f} (B=0.1) and {rate_large:.4f} (2B=0.2), +-10%")


def test_criterion_06_vlasov_drift_exact():
    config = SimConfig(lambda_=1.0, delta_amp=0.0, b_rate=0.17, m_party=0.4,
                       t_end=1.0, init=UniformRanges(((-0.95, 0.95, 1.0),)),
                       n_particles=50_000, seed=45)
    state = init_ensemble(config)
    before = state.momenta.copy()
    dt = 0.31
    vlasov_step(state, config, dt)
    pp = config.party_momentum
    lhs = (state.momenta - pp) * np.exp(config.b_rate * dt)
    rel = np.abs(lhs - (before - pp)) / np.maximum(np.abs(before - pp), 1e-30)
    ok = float(np.max(rel)) < 1e-12
    assert report("6", ok, f"max relative defect {np.max(rel):.2e} over {state.n_particles} particles")


def test_criterion_07_conservation_suite():
    # per-exchange momentum conservation
    rng = np.random.default_rng(46)
    p = rng.standard_normal(100_000) * 5
    q = rng.standard_normal(100_000) * 5
    out = collide_direct(p, q, CollisionParams(0.3, 1.0), rng.uniform(-1, 1, p.size))
    per = np.max(np.abs((out.p_out + out.pstar_out) - (p + q))
                 / np.maximum(1.0, np.abs(p) + np.abs(q)))

    # run-total drift with B=0 across > 1e6 exchanges
    config = SimConfig(lambda_=0.5, delta_amp=1.0, t_end=60.0,
                       init=UniformRanges(((-1.0, 1.0, 1.0),)),
                       n_particles=N_FULL, seed=47)
    state = init_ensemble(config)
    total0 = state.momenta.sum()
    scale = np.abs(state.momenta).sum()
    for _ in range(600):
        advance(state, config, 0.1)
    drift = abs(state.momenta.sum() - total0) / scale

    # elastic null test: chi and mbar hold their initial values well inside
    # Monte Carlo bands (the swap dynamics move them only by roundoff)
    null_cfg = SimConfig(lambda_=1.0, delta_amp=0.0, t_end=10.0,
                         init=UniformRanges(((0.2, 0.9, 1.0), (-0.9, -0.2, 1.0))),
                         n_particles=20_000, seed=48)
    null = init_ensemble(null_cfg)
    fs0 = measure_flow(null)
    for _ in range(100):
        advance(null, null_cfg, 0.1)
    fs1 = measure_flow(null)
    band_chi = 3.0 * fs0.chi * np.sqrt(2.0 / null_cfg.n_particles)
    band_m = 3.0 / np.sqrt(null_cfg.n_particles)
    ok = (
        per < 1e-12
        and state.collision_count > 1_000_000
        and drift < 1e-9
        and abs(fs1.chi - fs0.chi) < band_chi
        and abs(fs1.mbar - fs0.mbar) < band_m
    )
    assert report("7", ok,
                  f"per-exchange {per:.1e}, total drift {drift:.1e} over "
                  f"{state.collision_count} exchanges, null |dchi|={abs(fs1.chi - fs0.chi):.2e} "
                  f"(band {band_chi:.2e}), |dmbar|={abs(fs1.mbar - fs0.mbar):.2e}")


def test_criterion_08_heating_positivity_and_scaling():
    ok = True
    worst = 0.0
    for chi in (0.1, 1.0, 10.0, 100.0):
        for delta in (1e-3, 3e-3, 1e-2, -1e-2):
            ok &= heating_rate_mj(chi, delta) >= 0.0
        ratio = heating_rate_mj(chi, 2e-3) / heating_rate_mj(chi, 1e-3)
        worst = max(worst, abs(ratio - 4.0) / 4.0)
        ok &= abs(ratio - 4.0) <= 0.02 * 4.0
    assert report("8", ok, f"all rates >= 0, worst quadratic-scaling deviation {worst:.2e}")


def test_criterion_09_temperature_pipeline():
    chis = np.geomspace(1e-3, 1e3, 200)
    worst = max(abs(chi_from_energy(energy_density(c)) - c) / c for c in chis)
    rng = np.random.default_rng(49)
    p = mj_sample(MjState(1.0, 0.0, 2.0), rng, size=1_000_000)
    fs = measure_flow(p)
    ok = worst < 1e-8 and abs(fs.chi - 2.0) <= 0.01 * 2.0
    assert report("9", ok,
                  f"round-trip worst {worst:.2e}, sampled ensemble chi {fs.chi:.4f} (target 2 +-1%)")


def test_criterion_10_steady_state_equals_equilibrium():
    worst = 0.0
    for lam, mbar in ((1.0, 0.0), (0.5, 0.3)):
        m = np.linspace(-0.9995, 0.9995, 1000)
        lhs = steady_state_pdf(m, SteadyStateSpec("relativistic", lam, mbar))
        rhs = transported_mj_pdf(m, chi=1.0 / lam, mbar=mbar)
        worst = max(worst, float(np.max(np.abs(lhs - rhs) / np.maximum(rhs, 1e-300))))
    ok = worst < 1e-10
    assert report("10", ok, f"pointwise worst relative difference {worst:.2e} on 1000 points")


def test_criterion_11_published_endpoints(run_c2_weak_kick, run_c2_strong_kick, run_a4):
    weak = tail_mean(run_c2_weak_kick.flow_states, 0.2, run_c2_weak_kick.config.t_end)
    strong = tail_mean(run_c2_strong_kick.flow_states, 0.2, run_c2_strong_kick.config.t_end)
    mbar_a4 = run_a4.final.mbar
    ok = (
        abs(weak.chi - 360.0) <= 0.15 * 360.0
        and abs(weak.mbar - 0.98) <= 0.02
        and abs(weak.phi - 5.54) <= 0.10 * 5.54
        and abs(strong.chi - 0.35) <= 0.15 * 0.35
        and abs(strong.mbar - 0.95) <= 0.02
        and abs(strong.phi - 5.58) <= 0.10 * 5.58
        and abs(mbar_a4 - 0.97) <= 0.01
    )
    assert report("11", ok,
                  f"weak kick: chi {weak.chi:.1f} (360+-15%), mbar {weak.mbar:.4f} (0.98), "
                  f"phi {weak.phi:.3f} (5.54); strong kick: chi {strong.chi:.4f} (0.35+-15%), "
                  f"mbar {strong.mbar:.4f} (0.95), phi {strong.phi:.3f} (5.58); "
                  f"party pull mbar {mbar_a4:.4f} (0.97+-0.01)")


def test_criterion_12_qualitative_figures(run_a1, dgrid_summaries):
    pair = run_a1.final_histogram
    tail = np.abs(pair.centers) >= 0.575
    n_tail = int(tail.sum())
    n_over = int(np.sum(pair.f[tail] > pair.f_mj[tail]))
    # one-sided sign test at the 1% level against even odds
    from scipy import stats

    pval = stats.binomtest(n_over, n_tail, 0.5, alternative="greater").pvalue
    tails_ok = pval < 0.01

    peaks_ok = True
    detail = []
    for da in (1.0, 11.5):
        seq = [float(dgrid_summaries[(da, mp)].tail_histogram.f.max()) for mp in (0.0, 0.5, 0.8)]
        peaks_ok &= seq[0] < seq[1] < seq[2]
        detail.append(f"da={da:g}: " + " < ".join(f"{v:.2f}" for v in seq))
    ok = tails_ok and peaks_ok
    assert report("12", ok,
                  f"over-populated tails in {n_over}/{n_tail} bins (p={pval:.1e}); "
                  f"peak growth {'; '.join(detail)}")
