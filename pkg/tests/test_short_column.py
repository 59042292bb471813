import numpy as np
import pytest

from mfmc import draw_pilot, estimate_statistics
from mfmc.benchmarks.published import SHORT_COLUMN_RHO1
from mfmc.benchmarks.short_column import COSTS, short_column_eval, short_column_input_spec, short_column_models
from mfmc.rng import seed_sequence
from mfmc.config import PILOT_STREAM


def test_f1_hand_value():
    assert short_column_eval(1, [10, 20, 5, 2000, 500]) == pytest.approx(0.35, rel=1e-14)


def test_zero_load_gives_one():
    for i in range(1, 6):
        assert short_column_eval(i, [7.0, 18.0, 150.0, 0.0, 0.0]) == 1.0


def test_f5_minus_f1():
    z = short_column_input_spec().sample(100, 3)
    diff = short_column_eval(5, z) - short_column_eval(1, z)
    np.testing.assert_allclose(diff, 3 * z[:, 3] / (z[:, 0] * z[:, 1] ** 2 * z[:, 2]), rtol=1e-10)


def test_f1_bounded_by_one():
    z = short_column_input_spec().sample(10_000, 4)
    assert np.all(short_column_eval(1, z) <= 1.0)


def test_zero_division_and_bad_index():
    with pytest.raises(ZeroDivisionError):
        short_column_eval(1, [0.0, 20, 5, 2000, 500])
    with pytest.raises(ValueError):
        short_column_eval(6, [10, 20, 5, 2000, 500])
    with pytest.raises(ValueError):
        short_column_eval(1, [10, 20, 5])


def test_models_and_costs():
    models = short_column_models()
    assert [m.id for m in models] == ["f1", "f2", "f3", "f4", "f5"]
    assert tuple(m.cost for m in models) == COSTS == (100.0, 50.0, 20.0, 10.0, 5.0)
    z = np.array([[10.0, 20.0, 150.0, 2000.0, 500.0]])
    for i, m in enumerate(models, start=1):
        assert m.evaluate(z)[0] == short_column_eval(i, z[0])


def test_input_distribution_moments():
    z = short_column_input_spec().sample(400_000, 0)
    assert z[:, 0].mean() == pytest.approx(10.0, rel=5e-3)
    assert z[:, 1].mean() == pytest.approx(20.0, rel=5e-3)
    assert np.log(z[:, 2]).mean() == pytest.approx(5.0, rel=1e-3)
    assert np.log(z[:, 2]).std() == pytest.approx(0.5, rel=1e-2)
    assert z[:, 3].mean() == pytest.approx(2000.0, rel=2e-3)
    assert z[:, 4].std() == pytest.approx(100.0, rel=1e-2)


def pilot_rho(seed=0):
    models = short_column_models()
    pilot = draw_pilot(models, short_column_input_spec(), 1000, seed_sequence(seed, PILOT_STREAM))
    return estimate_statistics(pilot, COSTS).rho1


@pytest.mark.parametrize("i,tol", [(1, 0.02), (2, 0.1), (4, 0.02)])
def test_pilot_correlations_close_to_published(i, tol):
    assert abs(pilot_rho()[i] - SHORT_COLUMN_RHO1[i]) <= tol


@pytest.mark.xfail(strict=True, reason="f4 correlation under the underlying-normal lognormal is about 0.86; see ledger")
def test_pilot_correlation_f4_close_to_published():
    assert abs(pilot_rho()[3] - SHORT_COLUMN_RHO1[3]) <= 0.02
