import numpy as np
import pytest

from helpers import short_column_triple
from mfmc import EnsembleStatistics, Model, RandomInputSpec, SamplingPlan, Uniform
from mfmc.allocation import allocate_modified
from mfmc.benchmarks.short_column import short_column_input_spec, short_column_models
from mfmc.errors import MFMCError
from mfmc.estimator import mc_estimate, mfmc_estimate, reference_value, run_experiment
from mfmc.rng import seed_sequence

SPEC = RandomInputSpec((Uniform(0.0, 1.0), Uniform(0.0, 1.0)))


class Recorder:
    """Model evaluator that keeps every input row it sees."""

    def __init__(self, fn):
        self.fn = fn
        self.rows = []

    def __call__(self, z):
        self.rows.append(np.array(z, copy=True))
        return self.fn(z)

    @property
    def seen(self):
        return np.vstack(self.rows) if self.rows else np.empty((0, 2))


def plan_of(m, alpha, ids=None):
    return SamplingPlan(m=m, alpha=alpha, predicted_mse=0.0, realized_cost=0.0, budget=0.0, method="modified",
                        model_ids=ids)


def test_nesting_and_evaluation_counts():
    recs = [Recorder(lambda z: z[:, 0]), Recorder(lambda z: z[:, 0] + z[:, 1]), Recorder(lambda z: z[:, 1])]
    models = [Model(f"f{i}", r, 1.0) for i, r in enumerate(recs)]
    plan = plan_of([3, 7, 20], [0.5, 0.25])
    mfmc_estimate(models, plan, SPEC, seed=5)
    seen = [r.seen for r in recs]
    assert [s.shape[0] for s in seen] == [3, 7, 20]
    np.testing.assert_array_equal(seen[1][:3], seen[0])
    np.testing.assert_array_equal(seen[2][:7], seen[1])


def test_estimator_formula_by_hand():
    f0, f1 = (lambda z: z[:, 0] ** 2), (lambda z: z[:, 0])
    models = [Model("a", f0, 2.0), Model("b", f1, 1.0)]
    plan = plan_of([4, 10], [0.7])
    est = mfmc_estimate(models, plan, SPEC, seed=11)
    z = SPEC.sample(10, 11)
    expected = np.mean(z[:4, 0] ** 2) + 0.7 * (np.mean(z[:, 0]) - np.mean(z[:4, 0]))
    assert est.value == pytest.approx(expected, rel=1e-14)
    assert est.realized_cost == 18.0


def test_single_model_plan_is_mc():
    model = Model("a", lambda z: z[:, 0], 1.0)
    est = mfmc_estimate([model], plan_of([25], []), SPEC, seed=2)
    assert est.value == pytest.approx(mc_estimate(model, 25, SPEC, seed=2), rel=1e-15)


def test_zero_weights_return_high_fidelity_mean():
    models = [Model("a", lambda z: z[:, 0], 1.0), Model("b", lambda z: 100 * z[:, 1], 1.0)]
    est = mfmc_estimate(models, plan_of([5, 50], [0.0]), SPEC, seed=3)
    assert est.value == pytest.approx(np.mean(SPEC.sample(50, 3)[:5, 0]), rel=1e-15)


def test_constant_models():
    models = [Model(f"c{i}", (lambda c: lambda z: np.full(z.shape[0], c))(c), 1.0) for i, c in enumerate((2.5, -1.0, 7.0))]
    est = mfmc_estimate(models, plan_of([2, 5, 9], [1.3, -0.4]), SPEC, seed=0)
    assert est.value == 2.5


def test_mc_estimate_cases():
    const = Model("c", lambda z: np.full(z.shape[0], 4.0), 1.0)
    assert mc_estimate(const, 10, SPEC, seed=0) == 4.0
    lin = Model("x", lambda z: z[:, 0], 1.0)
    assert mc_estimate(lin, 1, SPEC, seed=9) == SPEC.sample(1, 9)[0, 0]
    with pytest.raises(ValueError):
        mc_estimate(lin, 0, SPEC, seed=0)


def test_mc_variance_matches_sigma2_over_n():
    lin = Model("x", lambda z: z[:, 0], 1.0)
    n, reps = 8, 10_000
    values = np.array([mc_estimate(lin, n, SPEC, seed=seed_sequence(0, j)) for j in range(reps)])
    sample_var = np.var(SPEC.sample(200_000, 1)[:, 0], ddof=1)
    # chi-square standard error of a variance estimate from `reps` draws
    assert np.var(values, ddof=1) == pytest.approx(sample_var / n, rel=4 * np.sqrt(2 / reps))


def test_plan_model_mismatch():
    models = [Model("a", lambda z: z[:, 0], 1.0)]
    with pytest.raises(MFMCError):
        mfmc_estimate(models, plan_of([1, 2], [1.0]), SPEC, seed=0)
    with pytest.raises(MFMCError):
        mfmc_estimate(models, plan_of([2], [], ids=["zz"]), SPEC, seed=0)
    two = models + [Model("b", lambda z: z[:, 1], 1.0)]
    with pytest.raises(MFMCError):
        mfmc_estimate(two, plan_of([5, 2], [1.0]), SPEC, seed=0)


def test_reference_value_is_reproducible_for_fixed_chunk():
    lin = Model("x", lambda z: z[:, 0], 1.0)
    a = reference_value(lin, SPEC, 1000, seed=4, chunk=1000)
    b = reference_value(lin, SPEC, 1000, seed=4, chunk=1000)
    assert a == b
    mean, se = reference_value(lin, SPEC, 100_000, seed=4, chunk=30_000)
    assert abs(mean - 0.5) < 4 * se


def _short_column_setup():
    models = short_column_models()
    sub = [models[0], models[1], models[4]]
    stats = short_column_triple(sigma=[0.0135, 0.0130, 0.0040])
    return sub, stats, short_column_input_spec()


def test_run_experiment_single_run_and_infeasible_rows():
    models, stats, spec = _short_column_setup()
    res = run_experiment(models, stats, spec, budgets=[100.0, 800.0], n_runs=1, reference_samples=1000, seed=1)
    assert not res.complete
    bad = res.report(0, "modified")
    assert bad.status == "infeasible" and bad.n_runs == 0
    ok = res.report(1, "modified")
    assert ok.n_runs == 1
    assert ok.empirical_mse == pytest.approx((ok.per_run_estimates[0] - res.reference) ** 2)
    assert ok.relative_mse == ok.empirical_mse / res.reference**2
    assert res.report(0, "mc").status == "ok"
    assert [(r.budget_index, r.method) for r in res.reports] == [
        (0, "mc"), (0, "modified"), (0, "naive-rounded"), (1, "mc"), (1, "modified"), (1, "naive-rounded")
    ]


def test_run_experiment_deterministic_and_thread_independent():
    models, stats, spec = _short_column_setup()
    kw = dict(budgets=[400.0, 1600.0], n_runs=20, reference_samples=5000, seed=42)
    a = run_experiment(models, stats, spec, **kw)
    b = run_experiment(models, stats, spec, max_workers=4, **kw)
    for ra, rb in zip(a.reports, b.reports):
        np.testing.assert_array_equal(ra.per_run_estimates, rb.per_run_estimates)
    # methods draw from independent substreams
    assert a.report(1, "modified").per_run_estimates[0] != a.report(1, "naive-rounded").per_run_estimates[0]


def test_run_experiment_model_order_checked():
    models, stats, spec = _short_column_setup()
    with pytest.raises(MFMCError):
        run_experiment(models[::-1], stats, spec, budgets=[800.0], n_runs=1, reference_samples=10, seed=0)


def test_mc_empirical_mse_within_three_standard_errors():
    models, stats, spec = _short_column_setup()
    pilot_sigma = np.std(models[0].evaluate(spec.sample(400_000, 77)), ddof=1)
    res = run_experiment(models, stats, spec, budgets=[800.0], n_runs=2000, reference_samples=2_000_000,
                         seed=3, methods=("mc",))
    rep = res.report(0, "mc")
    sq = (rep.per_run_estimates - res.reference) ** 2
    expected = pilot_sigma**2 * 100.0 / 800.0
    assert abs(rep.empirical_mse - expected) <= 3 * sq.std(ddof=1) / np.sqrt(sq.size)


def test_modified_rows_never_exceed_budget():
    models, stats, spec = _short_column_setup()
    res = run_experiment(models, stats, spec, budgets=[200.0, 400.0, 3200.0], n_runs=2, reference_samples=100,
                         seed=0, methods=("modified",))
    for rep in res.reports:
        assert rep.realized_cost_per_run <= rep.budget
        np.testing.assert_array_equal(rep.plan.m, allocate_modified(stats, rep.budget).m)
