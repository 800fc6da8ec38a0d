import numpy as np
import pytest

from kinopt.diagnostics.measures import EmpiricalMeasure
from kinopt.ga.cbo import cbo_step, run_cbo
from kinopt.ga.contraction import ga_contraction_check
from kinopt.ga.genetic import GAParams, crossover_mutation, ga_step, run_ga
from kinopt.ga.kinetic import kinetic_ga_step
from kinopt.ga.scaling import ga_quasi_invariant_experiment, quasi_invariant_ga_step
from kinopt.ga.selection import ParentMeasure, SelectionKind, selection_weights
from kinopt.shared.ensemble import Ensemble
from kinopt.shared.errors import DivergenceError, PreconditionError, UnsupportedComparisonError
from kinopt.shared.objective import Objective, make_benchmark
from kinopt.shared.rng import RngStream


def test_gibbs_selection_without_strength_is_uniform():

    w = selection_weights([4.0, 0.0, 1.0, 9.0], SelectionKind.boltzmann_gibbs(0.0))
    np.testing.assert_allclose(w, np.full(4, 0.25))


def test_gibbs_selection_prefers_low_energy():

    w = selection_weights([0.0, 1.0], SelectionKind.boltzmann_gibbs(50.0))
    assert w[0] > 1.0 - 1e-15
    assert w[1] == pytest.approx(np.exp(-50.0), rel=1e-12)


def test_random_wheel():

    w = selection_weights([0.0, 1.0, 3.0], SelectionKind.random_wheel())
    np.testing.assert_allclose(w, [0.6, 0.4, 0.0])


def test_random_wheel_with_equal_energies():

    w = selection_weights([2.0, 2.0, 2.0, 2.0], SelectionKind.random_wheel())
    np.testing.assert_allclose(w, np.full(4, 0.25))


@pytest.mark.parametrize("energies,expected", [([3.0, 1.0, 2.0], [1.0 / 6.0, 0.5, 1.0 / 3.0]),
                                               ([1.0, 1.0, 2.0], [3.0 / 7.0, 3.0 / 7.0, 1.0 / 7.0])])
def test_rank_selection(energies, expected):

    np.testing.assert_allclose(selection_weights(energies, SelectionKind.rank_based()), expected)


def test_unknown_selection():

    with pytest.raises(ValueError):
        SelectionKind("tournament")
    with pytest.raises(ValueError):
        SelectionKind.boltzmann_gibbs(-1.0)


def test_parent_measure_reweights_support():

    parents = ParentMeasure.from_points([[0.0], [1.0]], [0.0, 1.0], SelectionKind.random_wheel())
    np.testing.assert_allclose(parents.weights, [1.0, 0.0])
    np.testing.assert_allclose(parents.mean(), [0.0])


def test_crossover_endpoints():

    x, y = np.array([1.0, 2.0]), np.array([-3.0, 5.0])
    zero = np.zeros(2)
    np.testing.assert_array_equal(crossover_mutation(x, y, zero, 0.3, zero), x)
    np.testing.assert_array_equal(crossover_mutation(x, y, np.ones(2), 0.0, np.ones(2)), y)
    np.testing.assert_allclose(crossover_mutation(x, y, [0.5, 0.5], 0.1, [1.0, -1.0]),
                               [-0.9, 3.4])


def test_crossover_vector_outside_unit_cube():

    with pytest.raises(ValueError):
        crossover_mutation([0.0], [1.0], [1.5], 0.1, [0.0])


@pytest.mark.parametrize("N,nu,expected", [(10, 0.3, 3), (10, 0.7, 7), (10, 0.29, 2),
                                           (10, 1.0, 10), (7, 0.0, 0)])
def test_number_of_children(N, nu, expected):

    assert GAParams(N=N, nu=nu).n_children == expected


@pytest.mark.parametrize("kwargs", [dict(N=1), dict(nu=1.5), dict(sigma=-0.1)])
def test_invalid_params(kwargs):

    with pytest.raises(ValueError):
        GAParams(**kwargs)


def test_step_keeps_population_size():

    obj = make_benchmark("rastrigin", 3)
    ensemble = Ensemble.gaussian(40, 3, RngStream(0))
    new = ga_step(ensemble, GAParams(N=40, nu=0.25), obj, RngStream(1))
    assert new.positions.shape == (40, 3)


def test_step_without_children_resamples():

    obj = make_benchmark("quadratic", 2)
    ensemble = Ensemble.gaussian(20, 2, RngStream(0))
    new = ga_step(ensemble, GAParams(N=20, nu=0.0), obj, RngStream(1))
    old_rows = {tuple(x) for x in ensemble.positions}
    assert all(tuple(x) in old_rows for x in new.positions)


def test_consensus_without_mutation_is_fixed():

    obj = make_benchmark("ackley", 2)
    ensemble = Ensemble.consensus([0.3, -1.2], 30)
    new = ga_step(ensemble, GAParams(N=30, sigma=0.0, nu=0.5), obj, RngStream(4))
    np.testing.assert_allclose(new.positions, ensemble.positions, rtol=1e-15, atol=1e-15)


def test_run_ga_improves():

    obj = make_benchmark("quadratic", 2)
    ensemble = Ensemble.gaussian(100, 2, RngStream(0), 2.0, 1.0)
    best, best_energy, trajectory = run_ga(ensemble, GAParams(N=100, sigma=0.05), obj, 50,
                                           RngStream(1))
    assert len(trajectory.rows) == 50
    assert best_energy == obj(best)
    assert best_energy < obj.eval(ensemble.positions).min()
    assert trajectory.rows[-1]["mean_error"] < trajectory.rows[0]["mean_error"]


def test_run_ga_is_deterministic():

    obj = make_benchmark("rastrigin", 2)
    ensemble = Ensemble.gaussian(50, 2, RngStream(0))
    params = GAParams(N=50, sigma=0.2)
    first = run_ga(ensemble, params, obj, 20, RngStream(3))
    second = run_ga(ensemble, params, obj, 20, RngStream(3))
    np.testing.assert_array_equal(first[0], second[0])
    assert first[2].rows == second[2].rows


def test_run_ga_checks_population_size():

    with pytest.raises(ValueError):
        run_ga(Ensemble.gaussian(10, 1, RngStream(0)), GAParams(N=20),
               make_benchmark("quadratic", 1), 5, RngStream(0))


def test_kinetic_step_without_children_draws_parents():

    obj = make_benchmark("quadratic", 1)
    measure = EmpiricalMeasure(np.array([[0.0], [1.0], [2.0]]))
    new = kinetic_ga_step(measure, GAParams(N=3, nu=0.0), obj, RngStream(0))
    assert set(new.support[:, 0]) <= {0.0, 1.0, 2.0}


def test_kinetic_step_keeps_consensus():

    obj = make_benchmark("quadratic", 2)
    measure = EmpiricalMeasure(np.tile([0.5, 0.5], (50, 1)))
    new = kinetic_ga_step(measure, GAParams(N=50, sigma=0.0), obj, RngStream(0), dt=0.5)
    np.testing.assert_allclose(new.support, measure.support, rtol=1e-15, atol=1e-15)


@pytest.mark.parametrize("dt", [0.0, 1.5])
def test_kinetic_step_time_step(dt):

    measure = EmpiricalMeasure(np.array([[0.0], [1.0]]))
    with pytest.raises(ValueError):
        kinetic_ga_step(measure, GAParams(N=2), make_benchmark("quadratic", 1), RngStream(0), dt)


def test_kinetic_step_moves_towards_minimum():

    obj = make_benchmark("quadratic", 1)
    measure = EmpiricalMeasure.from_ensemble(Ensemble.gaussian(5000, 1, RngStream(0), mean=2.0))
    params = GAParams(N=5000, sigma=0.01, selection=SelectionKind.boltzmann_gibbs(5.0))
    new = kinetic_ga_step(measure, params, obj, RngStream(1)).to_ensemble()
    assert new.N == 5000
    assert abs(new.mean()[0]) < abs(measure.mean()[0]) - 0.3


def test_contraction_needs_known_minimizer():

    obj = Objective("linear", 1, lambda X: X[:, 0])
    with pytest.raises(PreconditionError):
        ga_contraction_check(obj, 0.5, 0.1, 10.0, 100, 10, RngStream(0))


def test_contraction_on_quadratic():

    obj = make_benchmark("quadratic", 1)
    report = ga_contraction_check(obj, nu=0.5, sigma=0.05, alpha=30.0, N=2000, steps=50,
                                  rng=RngStream(0))
    assert report.accuracy_step is not None
    assert report.passed
    assert report.errors[-1] < report.accuracy
    assert len(report.errors) == len(report.envelopes) == report.accuracy_step + 1


@pytest.mark.slow
def test_contraction_on_quadratic_2d():

    obj = make_benchmark("quadratic", 2)
    report = ga_contraction_check(obj, nu=0.5, sigma=0.01, alpha=50.0, N=10_000, steps=200,
                                  rng=RngStream(0))
    assert report.accuracy_step is not None
    assert report.passed


@pytest.mark.slow
def test_ga_and_kinetic_steps_agree_in_moments():

    N = 10_000
    obj = make_benchmark("quadratic", 1)
    params = GAParams(N=N, sigma=0.1, nu=0.5, selection=SelectionKind.boltzmann_gibbs(1.0))
    ensemble = Ensemble.gaussian(N, 1, RngStream(0), mean=2.0)

    def moments(x):
        mean, var = x.mean(), x.var()
        return mean, var, var / N, (np.mean((x - mean)**4) - var**2) / N

    for k in range(20):
        ga = ga_step(ensemble, params, obj, RngStream(100 + k)).positions[:, 0]
        kinetic = kinetic_ga_step(EmpiricalMeasure.from_ensemble(ensemble), params, obj,
                                  RngStream(200 + k)).support[:, 0]
        mean_a, var_a, se_mean_a, se_var_a = moments(ga)
        mean_b, var_b, se_mean_b, se_var_b = moments(kinetic)
        assert abs(mean_a - mean_b) < 3.0 * np.sqrt(se_mean_a + se_mean_b)
        assert abs(var_a - var_b) < 3.0 * np.sqrt(se_var_a + se_var_b)
        ensemble = Ensemble(ga[:, None])


def test_run_cbo_divergence_reports_last_finite_step():

    obj = make_benchmark("quadratic", 1)
    with np.errstate(over="ignore", invalid="ignore"):
        with pytest.raises(DivergenceError) as err:
            run_cbo(Ensemble.gaussian(50, 1, RngStream(0)), 1.0, 0.1, 10.0, 5.0, 1000, obj,
                    RngStream(1))
    assert 0 < err.value.last_valid_step < 1000
    assert err.value.last_valid_time == pytest.approx(5.0 * err.value.last_valid_step)


def test_run_ga_divergence_reports_last_finite_step():

    obj = make_benchmark("quadratic", 1)
    params = GAParams(N=20, sigma=1.0e+200)
    with np.errstate(over="ignore", invalid="ignore"):
        with pytest.raises(DivergenceError) as err:
            run_ga(Ensemble.gaussian(20, 1, RngStream(0)), params, obj, 10, RngStream(1))
    assert err.value.last_valid_step == 0
    assert err.value.last_valid_time == 0.0


def test_cbo_consensus_without_noise_is_fixed():

    obj = make_benchmark("rastrigin", 2)
    ensemble = Ensemble.consensus([1.0, 0.5], 10)
    new = cbo_step(ensemble, 1.0, 0.0, 10.0, 0.1, obj, RngStream(0))
    np.testing.assert_array_equal(new.positions, ensemble.positions)


def test_cbo_drift():

    obj = make_benchmark("quadratic", 1)
    ensemble = Ensemble(np.array([[0.0], [2.0]]))
    new = cbo_step(ensemble, 0.5, 0.0, 0.0, 0.1, obj, RngStream(0))
    np.testing.assert_allclose(new.positions, [[0.05], [1.95]])


def test_cbo_finds_minimum():

    obj = make_benchmark("quadratic", 2)
    ensemble = Ensemble.gaussian(200, 2, RngStream(0), 1.0, 1.0)
    consensus, trajectory = run_cbo(ensemble, 1.0, 0.1, 30.0, 0.01, 500, obj, RngStream(1))
    assert np.linalg.norm(consensus) < 0.1
    assert trajectory.rows[-1]["consensus_error"] < 0.1


def test_quasi_invariant_step_bounds():

    obj = make_benchmark("quadratic", 1)
    with pytest.raises(ValueError):
        quasi_invariant_ga_step(np.zeros((5, 1)), 0.5, 3.0, 0.1, 1.0, obj, RngStream(0))


def test_quasi_invariant_step_without_noise_stays_in_hull():

    obj = make_benchmark("quadratic", 1)
    X = np.array([[-1.0], [0.0], [3.0]])
    new = quasi_invariant_ga_step(X, 0.5, 1.0, 0.0, 1.0, obj, RngStream(2))
    assert new.min() >= -1.0 and new.max() <= 3.0


def test_quasi_invariant_step_keeps_each_particle_as_first_parent():

    # selection puts all weight on the minimizer at 0
    obj = make_benchmark("quadratic", 1)
    X = np.array([[0.0], [2.0], [4.0]])
    new = quasi_invariant_ga_step(X, 0.5, 1.0, 0.0, 1000.0, obj, RngStream(0))
    np.testing.assert_allclose(new, [[0.0], [1.0], [2.0]])


def test_quasi_invariant_experiment_needs_1d():

    with pytest.raises(UnsupportedComparisonError):
        ga_quasi_invariant_experiment([0.1], GAParams(), make_benchmark("quadratic", 2), 0.1,
                                      100, RngStream(0))


def test_quasi_invariant_experiment_rows():

    obj = make_benchmark("quadratic", 1)
    params = GAParams(sigma=0.3, selection=SelectionKind.boltzmann_gibbs(1.0))
    rows = ga_quasi_invariant_experiment([0.5, 0.1], params, obj, 0.5, 200, RngStream(7))
    assert [row.scale for row in rows] == [0.5, 0.1]
    assert rows == ga_quasi_invariant_experiment([0.5, 0.1], params, obj, 0.5, 200,
                                                 RngStream(7))


@pytest.mark.slow
def test_quasi_invariant_limit():

    obj = make_benchmark("quadratic", 1)
    params = GAParams(sigma=0.5, selection=SelectionKind.boltzmann_gibbs(1.0))
    rows = ga_quasi_invariant_experiment([0.5, 0.1], params, obj, 1.0, 10_000, RngStream(0),
                                         initial_mean=2.0)
    assert rows[1].distance < rows[0].distance


@pytest.mark.slow
def test_quasi_invariant_limit_at_small_eps():

    obj = make_benchmark("quadratic", 1)
    params = GAParams(sigma=0.5, selection=SelectionKind.boltzmann_gibbs(1.0))
    distances = np.mean([[row.distance for row in
                          ga_quasi_invariant_experiment([0.1, 0.005], params, obj, 1.0, 10_000,
                                                        RngStream(seed), lam=5.0,
                                                        initial_mean=2.0)]
                         for seed in range(3)], axis=0)
    assert distances[1] <= distances[0]
