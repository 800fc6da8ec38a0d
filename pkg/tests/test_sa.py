import math

import numpy as np
import pytest

from kinopt.diagnostics.entropy import entropy_trace, gibbs_density, histogram_density, kl_divergence
from kinopt.diagnostics.measures import uniform_grid
from kinopt.sa.annealing import (SAState, acceptance_probability, estimate_transition_operator,
                                 metropolis_sweep, run_sa_chain, run_sa_ensemble, sa_step)
from kinopt.sa.langevin import langevin_step, run_langevin_ensemble
from kinopt.sa.scaling import sa_diffusion_scaling
from kinopt.shared.ensemble import Ensemble
from kinopt.shared.errors import DivergenceError, UnsupportedComparisonError
from kinopt.shared.objective import Objective, constant_objective, make_benchmark
from kinopt.shared.rng import RngStream
from kinopt.shared.schedule import Schedule


def test_acceptance_of_better_proposal():

    assert acceptance_probability(2.0, 1.0, 0.3) == 1.0
    assert acceptance_probability(1.0, 1.0, 0.3) == 1.0


def test_acceptance_of_worse_proposal():

    assert acceptance_probability(0.0, 0.7, 0.7) == pytest.approx(math.exp(-1.0), abs=1e-15)
    assert acceptance_probability(0.0, 1.0, 1e-6) == 0.0


@pytest.mark.parametrize("T", [0.0, -1.0])
def test_acceptance_needs_positive_temperature(T):

    with pytest.raises(ValueError):
        acceptance_probability(0.0, 1.0, T)


@pytest.mark.parametrize("E_x,E_y,T", [(0.0, 0.4, 1.0), (1.3, 0.2, 0.5), (-2.0, 3.0, 7.0)])
def test_detailed_balance_ratio(E_x, E_y, T):

    ratio = acceptance_probability(E_x, E_y, T) / acceptance_probability(E_y, E_x, T)
    assert ratio == pytest.approx(math.exp(-(E_y - E_x) / T), rel=1e-12)


def test_acceptance_frequency_matches_probability():

    # from x = 0 half the proposals go uphill by exactly 1
    step = Objective("step", 1, lambda X: (X[:, 0] > 0.0).astype(float))
    n, T = 100_000, 1.0
    X = np.zeros((n, 1))
    _, _, accept = metropolis_sweep(X, step.eval(X), T, 1.0, step, RngStream(8))
    p = 0.5 * (1.0 + math.exp(-1.0 / T))
    assert abs(accept.mean() - p) < 3.0 * math.sqrt(p * (1.0 - p) / n)


def test_rejected_steps_do_not_move():

    obj = make_benchmark("rastrigin", 2)
    schedule = Schedule.constant(0.5)
    state = SAState.start([1.0, -2.0], obj, schedule)
    for k in range(300):
        new = sa_step(state, obj, schedule, RngStream(k))
        if new.accepted:
            assert not np.array_equal(new.x, state.x)
        else:
            np.testing.assert_array_equal(new.x, state.x)
            assert new.energy == state.energy
        assert new.k == state.k + 1
        state = new


def test_cold_chain_only_descends():

    obj = make_benchmark("rastrigin", 1)
    schedule = Schedule.constant(1e-12)
    state = SAState.start([2.3], obj, schedule, proposal_factor=1e6)
    for k in range(300):
        new = sa_step(state, obj, schedule, RngStream(k), proposal_factor=1e6)
        assert new.energy <= state.energy
        state = new


def test_transition_operator_preserves_constants():

    value, _ = estimate_transition_operator(lambda X: np.ones(len(X)), [0.4], 0.5, 1.0, 17,
                                            RngStream(0), make_benchmark("quadratic", 1))
    assert value == 1.0


def test_transition_operator_on_constant_objective():

    value, stderr = estimate_transition_operator(lambda X: X[:, 0]**2, [1.0], 0.5, 1.0, 200_000,
                                                 RngStream(1), constant_objective(1))
    assert abs(value - 1.25) < 4.0 * stderr


def test_transition_operator_drifts_downhill():

    value, stderr = estimate_transition_operator(lambda X: X[:, 0], [1.0], 0.1, 1.0, 100_000,
                                                 RngStream(2), make_benchmark("quadratic", 1))
    assert value + 3.0 * stderr < 1.0


def test_chain_trace():

    obj = make_benchmark("quadratic", 2)
    state, trace = run_sa_chain([2.0, 2.0], 500, obj, Schedule.logarithmic(1.0), RngStream(3))
    assert len(trace) == 501
    assert trace.steps == list(range(501))
    assert state.energy == obj(state.x)
    columns = trace.to_columns()
    assert set(columns) == {"step", "temperature", "energy", "accepted", "x0", "x1"}
    moved = np.any(np.diff(np.asarray(trace.positions), axis=0) != 0.0, axis=1)
    np.testing.assert_array_equal(moved, np.asarray(trace.accepted[1:]))


def test_single_chain_ensemble_is_the_chain():

    obj = make_benchmark("doublewell1d", 1)
    schedule = Schedule.logarithmic(2.0)
    state, _ = run_sa_chain([0.3], 400, obj, schedule, RngStream(9))
    trajectory = run_sa_ensemble(1, 400, obj, schedule, RngStream(9), initial=Ensemble([[0.3]]))
    np.testing.assert_array_equal(trajectory.final.positions[0], state.x)


def test_ensemble_divergence_reports_last_finite_step():

    obj = make_benchmark("quadratic", 1)
    with np.errstate(over="ignore"):
        with pytest.raises(DivergenceError) as err:
            run_sa_ensemble(10, 20, obj, Schedule.constant(1.0), RngStream(0),
                            proposal_factor=1.0e+200)
    assert err.value.last_valid_step == 0


def test_ensemble_is_deterministic():

    obj = make_benchmark("quadratic", 1)
    first = run_sa_ensemble(50, 100, obj, Schedule.constant(1.0), RngStream(5))
    second = run_sa_ensemble(50, 100, obj, Schedule.constant(1.0), RngStream(5))
    np.testing.assert_array_equal(first.final.positions, second.final.positions)
    assert first.rows == second.rows


def test_fixed_temperature_reaches_gibbs_variance():

    obj = make_benchmark("quadratic", 1)
    trajectory = run_sa_ensemble(2000, 2000, obj, Schedule.constant(0.5), RngStream(6))
    assert trajectory.final.variance() == pytest.approx(0.5, rel=0.1)


def test_update_probability_slows_the_clock():

    obj = make_benchmark("quadratic", 1)
    trajectory = run_sa_ensemble(100, 10, obj, Schedule.constant(1.0), RngStream(0),
                                 update_probability=0.25)
    assert trajectory.times[-1] == pytest.approx(2.5)
    assert max(row["acceptance"] for row in trajectory.rows) <= 0.6


def test_entropy_decreases_on_doublewell():

    obj = make_benchmark("doublewell1d", 1)
    nodes = uniform_grid(-2.5, 2.5, 256)
    trajectory = run_sa_ensemble(10_000, 100, obj, Schedule.constant(0.5), RngStream(4),
                                 initial=Ensemble(np.full((10_000, 1), -2.0)),
                                 snapshot_steps=[1, 100])
    kl_early, kl_late = entropy_trace(trajectory.snapshots, obj, 0.5, nodes)
    assert kl_late < kl_early


@pytest.mark.slow
def test_gibbs_equilibration_acceptance():

    obj = make_benchmark("quadratic", 1)
    trajectory = run_sa_ensemble(10_000, 5000, obj, Schedule.constant(0.5), RngStream(1))
    X = trajectory.final.positions[:, 0]
    assert X.var() == pytest.approx(0.5, rel=0.05)
    nodes = uniform_grid(-4.0, 4.0, 256)
    assert kl_divergence(histogram_density(X, nodes), gibbs_density(obj, 0.5, nodes)) < 0.02


def test_langevin_zero_temperature_is_gradient_descent():

    obj = make_benchmark("doublewell1d", 1)
    x = np.array([0.4])
    np.testing.assert_array_equal(langevin_step(x, obj, 0.0, 0.01, RngStream(0)),
                                  x - 0.01 * obj.grad(x))


def test_langevin_mean_decay():

    obj = make_benchmark("quadratic", 1)
    trajectory = run_langevin_ensemble(Ensemble(np.full((5, 1), 2.0)), 1.0, 0.01, obj, 0.0,
                                       RngStream(0))
    np.testing.assert_allclose(trajectory.final.positions, 2.0 * 0.99**100, rtol=1e-12)


def test_langevin_stationary_variance():

    obj = make_benchmark("quadratic", 1)
    trajectory = run_langevin_ensemble(Ensemble.gaussian(4000, 1, RngStream(1)), 10.0, 0.01,
                                       obj, 0.3, RngStream(2))
    assert trajectory.final.variance() == pytest.approx(0.3, rel=0.1)


def test_langevin_rejects_negative_temperature():

    with pytest.raises(ValueError):
        langevin_step([0.0], make_benchmark("quadratic", 1), -1.0, 0.1, RngStream(0))


def test_diffusion_scaling_needs_1d():

    with pytest.raises(UnsupportedComparisonError):
        sa_diffusion_scaling([0.5], make_benchmark("quadratic", 2), 1.0, 0.1, 100, RngStream(0))


def test_diffusion_scaling_is_deterministic():

    obj = make_benchmark("doublewell1d", 1)
    first = sa_diffusion_scaling([0.5, 0.1], obj, 1.0, 1.0, 200, RngStream(3))
    second = sa_diffusion_scaling([0.5, 0.1], obj, 1.0, 1.0, 200, RngStream(3))
    assert first == second
    assert [row.scale for row in first] == [0.5, 0.1]
    assert all(row.distance >= 0.0 for row in first)


@pytest.mark.slow
def test_diffusion_scaling_distance_decreases():

    obj = make_benchmark("doublewell1d", 1)
    rows = sa_diffusion_scaling([0.5, 0.1, 0.02], obj, 1.0, 1.0, 10_000, RngStream(0))
    distances = [row.distance for row in rows]
    assert distances[0] > distances[1] > distances[2]
