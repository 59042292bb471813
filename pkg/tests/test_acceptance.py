"""Acceptance criteria, one or more tests per criterion.

Run with ``pytest tests/test_acceptance.py``; the terminal summary prints a
PASS/FAIL line per criterion together with the measured quantities.
"""

import math
import time

import numpy as np
import pytest

from helpers import TABLE1, TABLE2, burgers_triple, matches_printed, random_admissible, short_column_triple
from mfmc import draw_pilot, estimate_statistics, select_models
from mfmc.allocation import (
    allocate_modified,
    allocate_naive_rounded,
    pinned_profile,
    predict_mse,
    solve_relaxed,
    variance_ratio,
)
from mfmc.benchmarks.burgers import BurgersROM, burgers_ensemble, rom_advance, snapshot_matrix
from mfmc.benchmarks.published import published_statistics
from mfmc.benchmarks.short_column import short_column_input_spec, short_column_models
from mfmc.config import PILOT_STREAM, TRAINING_STREAM, preset
from mfmc.estimator import run_experiment
from mfmc.harness import run_pipeline
from mfmc.rng import seed_sequence

PUBLISHED_MC_REL_MSE_AT_2 = 25.94e-6


def acceptance(number, title):
    return pytest.mark.acceptance(number, title=title)


# -- 1: selection ---------------------------------------------------------------


@acceptance(1, "model selection reproduces the published subsets")
def test_c01_selection_short_column(record_property):
    start = time.perf_counter()
    sel = select_models(published_statistics("short-column"))
    elapsed = time.perf_counter() - start
    record_property("short_column", ",".join(sel.names))
    assert sel.names == ["f1", "f2", "f5"]
    assert elapsed < 1.0


@acceptance(1, "model selection reproduces the published subsets")
def test_c01_selection_burgers(record_property):
    start = time.perf_counter()
    sel = select_models(published_statistics("burgers"))
    elapsed = time.perf_counter() - start
    record_property("burgers", ",".join(sel.names))
    assert elapsed < 1.0
    assert sel.names == ["f1", "f4", "f2"]


# -- 2, 3: table count columns ----------------------------------------------------


def _check_table(stats, table):
    w1 = stats.costs[0]
    start = time.perf_counter()
    for b, (mod, eff_mod, rnd, eff_rnd) in table.items():
        a = allocate_modified(stats, b * w1)
        r = allocate_naive_rounded(stats, b * w1)
        assert tuple(a.m) == mod, (b, "modified", a.m)
        assert matches_printed(a.realized_cost / w1, eff_mod), (b, "modified", a.realized_cost / w1)
        assert tuple(r.m) == rnd, (b, "rounded", r.m)
        assert matches_printed(r.realized_cost / w1, eff_rnd), (b, "rounded", r.realized_cost / w1)
    return time.perf_counter() - start


@acceptance(2, "short-column table counts and effective budgets")
def test_c02_table1_counts():
    assert _check_table(short_column_triple(), TABLE1) < 1.0


@acceptance(3, "Burgers table counts and effective budgets")
def test_c03_table2_counts():
    assert _check_table(burgers_triple(), TABLE2) < 1.0


# -- 4: short-column variance reduction --------------------------------------------


@pytest.fixture(scope="module")
def short_column_run():
    cfg = preset("short-column")
    assert (cfg.pilot_size, cfg.n_runs, cfg.reference_size) == (1000, 1000, 10_000_000)
    return run_pipeline(cfg)


@acceptance(4, "short-column variance reduction and MC level")
def test_c04_mfmc_beats_mc_by_three(short_column_run, record_property):
    exp = short_column_run.experiment
    ratios = []
    for i, _ in enumerate(short_column_run.config.budgets):
        mc = exp.report(i, "mc").relative_mse
        for method in ("modified", "naive-rounded"):
            ratios.append(mc / exp.report(i, method).relative_mse)
    record_property("min_mc_over_mfmc", f"{min(ratios):.2f}")
    assert min(ratios) >= 3.0


@acceptance(4, "short-column variance reduction and MC level")
def test_c04_mc_level_at_two(short_column_run, record_property):
    mc = short_column_run.experiment.report(0, "mc").relative_mse
    record_property("mc_rel_mse_at_2", f"{mc:.4g}")
    record_property("factor_vs_published", f"{mc / PUBLISHED_MC_REL_MSE_AT_2:.2f}")
    assert short_column_run.config.budgets[0] == 2.0
    assert PUBLISHED_MC_REL_MSE_AT_2 / 2 <= mc <= 2 * PUBLISHED_MC_REL_MSE_AT_2


# -- 5: budget preservation ---------------------------------------------------------


@acceptance(5, "modified allocation never exceeds the budget")
def test_c05_budget_preservation(record_property):
    rng = np.random.default_rng(5)
    start = time.perf_counter()
    violations, n = 0, 1000
    for _ in range(n):
        stats = random_admissible(rng, int(rng.integers(1, 7)))
        budget = math.fsum(stats.costs) * math.exp(rng.uniform(0.0, math.log(1e3)))
        plan = allocate_modified(stats, budget)
        ok = plan.realized_cost <= budget and plan.m[0] >= 1 and np.all(np.diff(plan.m) >= 0)
        violations += not ok
    record_property("instances", n)
    record_property("violations", violations)
    assert violations == 0
    assert time.perf_counter() - start < 10.0


# -- 6: pinning oracle ----------------------------------------------------------------


@acceptance(6, "pinning the first count to one is optimal when the relaxed value is below one")
def test_c06_pinning_oracle(record_property):
    rng = np.random.default_rng(6)
    start = time.perf_counter()
    found = counterexamples = 0
    while found < 200:
        stats = random_admissible(rng, int(rng.integers(2, 4)))
        w = stats.costs
        budget = math.fsum(w) * rng.uniform(1.0, 20.0)
        if solve_relaxed(stats, budget).m_real[0] >= 1.0:
            continue
        # integer values of m1 that leave budget for one sample of every surrogate
        top = int((budget - math.fsum(w[1:])) // w[0])
        if top < 2:
            continue
        found += 1
        profile = pinned_profile(stats, budget, 0, np.arange(1, top + 1))
        counterexamples += not np.all(profile[0] <= profile[1:])
    record_property("instances", found)
    record_property("counterexamples", counterexamples)
    assert counterexamples == 0
    assert time.perf_counter() - start < 30.0


# -- 7: unbiasedness and MSE consistency -----------------------------------------------


@acceptance(7, "estimator is unbiased and its variance matches the prediction")
def test_c07_unbiased_and_consistent(record_property):
    models = short_column_models()
    spec = short_column_input_spec()
    pilot = draw_pilot(models, spec, 100_000, seed_sequence(7, PILOT_STREAM))
    stats = estimate_statistics(pilot, [m.cost for m in models], [m.id for m in models]).subset([0, 1, 4])
    sub = [models[0], models[1], models[4]]
    budget = 16 * stats.costs[0]
    res = run_experiment(sub, stats, spec, budgets=[budget], n_runs=10_000, reference_samples=10_000_000,
                         seed=7, methods=("modified",))
    rep = res.report(0, "modified")
    est = rep.per_run_estimates
    se = math.hypot(est.std(ddof=1) / math.sqrt(est.size), res.reference_stderr)
    bias = est.mean() - res.reference
    predicted = predict_mse(rep.plan, stats)
    var_ratio = est.var(ddof=1) / predicted
    record_property("counts", tuple(int(v) for v in rep.plan.m))
    record_property("bias_over_se", f"{bias / se:.2f}")
    record_property("var_over_predicted", f"{var_ratio:.3f}")
    assert abs(bias) <= 3 * se
    assert abs(var_ratio - 1.0) <= 0.2


# -- 8: closed forms ---------------------------------------------------------------------


@acceptance(8, "closed-form MSE identities at the relaxed optimum")
def test_c08_closed_forms(record_property):
    rng = np.random.default_rng(8)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        stats = random_admissible(rng, int(rng.integers(2, 7)))
        p = math.fsum(stats.costs) * rng.uniform(1.0, 1e3)
        sol = solve_relaxed(stats, p)
        e = predict_mse(sol, stats)
        s1, w1 = stats.sigma[0], stats.costs[0]
        direct = s1**2 * (1 - stats.rho1[1] ** 2) * p / (sol.m_real[0] ** 2 * w1)
        ratio = e / (s1**2 * w1 / p)
        worst = max(worst, abs(e - direct) / direct, abs(variance_ratio(stats) ** 2 - ratio) / ratio)
    record_property("max_rel_err", f"{worst:.2e}")
    assert worst <= 1e-10
    assert time.perf_counter() - start < 1.0


# -- 9: ROM fidelity -----------------------------------------------------------------------


@acceptance(9, "POD-Galerkin ROM fidelity")
def test_c09_rom_fidelity(record_property):
    start = time.perf_counter()
    ens = burgers_ensemble(seed_sequence(0, TRAINING_STREAM), 50)
    fom, pod = ens.fom, ens.pod
    params = ens.input_spec.sample(50, seed_sequence(0, TRAINING_STREAM))

    full_rom = BurgersROM(fom, pod.basis(pod.rank))
    worst = 0.0
    for z in ens.input_spec.sample(5, 99):
        traj, _ = rom_advance(full_rom, z)
        full = fom.solve(z)
        recon = fom.w0[:, None] + full_rom.pod.basis @ traj
        worst = max(worst, np.linalg.norm(recon - full) / np.linalg.norm(full))
    record_property("full_rank_rel_err", f"{worst:.1e}")

    S = snapshot_matrix(fom, params)
    errs = []
    for d in (3, 5, 10, 15):
        U = pod.basis(d).basis
        errs.append(np.linalg.norm(S - U @ (U.T @ S)))

    pilot = draw_pilot(ens.models, ens.input_spec, 100, seed_sequence(0, PILOT_STREAM))
    rho = estimate_statistics(pilot, [m.cost for m in ens.models]).rho1
    record_property("rho_d15", f"{rho[4]:.8f}")

    assert worst <= 1e-8
    assert all(b <= a for a, b in zip(errs, errs[1:]))
    assert rho[4] > 0.9999
    assert time.perf_counter() - start < 120.0


# -- 10: Burgers MSE trend --------------------------------------------------------------------


@acceptance(10, "Burgers MSE decays like 1/p and MFMC beats MC")
def test_c10_burgers_trend(record_property):
    cfg = preset("burgers-paper")
    assert cfg.stats_source == "paper" and cfg.n_runs == 100
    res = run_pipeline(cfg)
    budgets = np.asarray(cfg.budgets)
    mse = {m: np.array([res.experiment.report(i, m).empirical_mse for i in range(budgets.size)])
           for m in ("mc", "modified")}
    slopes = {m: np.polyfit(np.log(budgets), np.log(v), 1)[0] for m, v in mse.items()}
    record_property("slope_mc", f"{slopes['mc']:.2f}")
    record_property("slope_mfmc", f"{slopes['modified']:.2f}")
    record_property("min_mc_over_mfmc", f"{np.min(mse['mc'] / mse['modified']):.2f}")
    assert np.all(mse["modified"] < mse["mc"])
    for slope in slopes.values():
        assert abs(slope + 1.0) <= 0.4


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
