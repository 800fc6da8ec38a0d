import numpy as np
import pytest

from kinopt.diagnostics.measures import EmpiricalMeasure
from kinopt.enkf.collapse import (CollapseRow, affine_hull_residual, collapse_slope,
                                  convex_hull_member, enkf_collapse_experiment)
from kinopt.enkf.problem import InverseProblem, make_inverse_problem
from kinopt.enkf.stats import ensemble_stats, moment_fields, spread_matrix
from kinopt.enkf.update import (eki_integrate, eki_rhs, enkf_update, gradient_flow_rhs,
                                modified_eki_step, run_enkf, run_modified_eki)
from kinopt.shared.ensemble import Ensemble
from kinopt.shared.errors import DivergenceError
from kinopt.shared.objective import numerical_gradient
from kinopt.shared.rng import RngStream


@pytest.fixture
def identity_1d():
    return InverseProblem(y=[5.0], Gamma=[[1.0]], matrix=[[1.0]], x_star=[5.0])


def test_problem_needs_spd_noise():

    with pytest.raises(ValueError):
        InverseProblem(y=[0.0, 0.0], Gamma=[[1.0, 2.0], [2.0, 1.0]], matrix=np.eye(2))
    with pytest.raises(ValueError):
        InverseProblem(y=[0.0, 0.0], Gamma=[[1.0, 0.5], [0.0, 1.0]], matrix=np.eye(2))


def test_problem_needs_a_forward_map():

    with pytest.raises(ValueError):
        InverseProblem(y=[0.0], Gamma=[[1.0]])
    with pytest.raises(ValueError):
        InverseProblem(y=[0.0, 1.0], Gamma=np.eye(2), matrix=np.eye(3))


@pytest.mark.parametrize("kind", ["identity", "random", "tanh"])
def test_generated_problems_have_exact_data(kind):

    problem = make_inverse_problem(kind, 3, RngStream(0), m=4)
    assert problem.misfit(problem.x_star) == pytest.approx(0.0, abs=1e-24)
    objective = problem.as_objective()
    np.testing.assert_array_equal(objective.minimizer, problem.x_star)
    assert objective.min_energy == 0.0


def test_unknown_problem_kind():

    with pytest.raises(ValueError):
        make_inverse_problem("heat", 2, RngStream(0))


def test_misfit_weighting():

    problem = InverseProblem(y=[1.0, 2.0], Gamma=np.diag([4.0, 1.0]), matrix=np.eye(2))
    assert problem.misfit([0.0, 0.0]) == pytest.approx(0.5 * (1.0 / 4.0 + 4.0))
    np.testing.assert_allclose(problem.misfit(np.zeros((3, 2))), np.full(3, 2.125))


@pytest.mark.parametrize("kind", ["random", "tanh"])
def test_misfit_gradient_against_finite_differences(kind):

    problem = make_inverse_problem(kind, 3, RngStream(1), m=5)
    X = RngStream(2).normal((4, 3))
    np.testing.assert_allclose(problem.misfit_gradient(X), numerical_gradient(problem.misfit, X),
                               rtol=1e-6, atol=1e-8)


def test_stats_of_two_members(identity_1d):

    stats = ensemble_stats(Ensemble([[0.0], [2.0]]), identity_1d)
    np.testing.assert_array_equal(stats.x_bar, [1.0])
    np.testing.assert_array_equal(stats.C, [[1.0]])
    np.testing.assert_array_equal(stats.D, [[1.0]])


def test_stats_at_consensus():

    problem = make_inverse_problem("tanh", 2, RngStream(0), m=3)
    stats = ensemble_stats(Ensemble.consensus([0.4, -0.2], 5), problem)
    np.testing.assert_array_equal(stats.C, np.zeros((2, 3)))
    np.testing.assert_array_equal(stats.D, np.zeros((3, 3)))


def test_identity_stats_agree():

    problem = make_inverse_problem("identity", 3, RngStream(0))
    stats = ensemble_stats(Ensemble.gaussian(20, 3, RngStream(1)), problem)
    np.testing.assert_allclose(stats.C, stats.D, rtol=1e-14)
    assert np.linalg.eigvalsh(stats.D).min() >= -1e-14


def test_kalman_gain_one_half(identity_1d):

    new = enkf_update(Ensemble([[0.0], [2.0]]), identity_1d, 1.0)
    np.testing.assert_allclose(new.positions, [[2.5], [3.5]])


@pytest.mark.parametrize("kind", ["identity", "random", "tanh"])
def test_consensus_is_kalman_fixed_point(kind):

    problem = make_inverse_problem(kind, 2, RngStream(3), m=3)
    ensemble = Ensemble.consensus([1.0, -0.5], 6)
    np.testing.assert_array_equal(enkf_update(ensemble, problem, 0.5).positions,
                                  ensemble.positions)
    np.testing.assert_array_equal(eki_rhs(ensemble, problem), 0.0)


def test_update_needs_positive_step(identity_1d):

    with pytest.raises(ValueError):
        enkf_update(Ensemble([[0.0], [1.0]]), identity_1d, 0.0)


def test_discrete_updates_stay_in_affine_hull():

    problem = make_inverse_problem("random", 5, RngStream(0), m=5)
    initial = Ensemble.gaussian(3, 5, RngStream(1))
    ensemble = initial
    for _ in range(1000):
        ensemble = enkf_update(ensemble, problem, 1.0)
        assert affine_hull_residual(ensemble.positions, initial.positions).max() < 1e-10


def test_run_enkf_moves_mean_towards_solution():

    problem = make_inverse_problem("identity", 2, RngStream(0), x_star=[1.0, -1.0])
    mean, trajectory = run_enkf(Ensemble.gaussian(50, 2, RngStream(1)), problem, 0.5, 100)
    assert len(trajectory.rows) == 100
    assert trajectory.rows[-1]["mean_error"] < trajectory.rows[0]["mean_error"]
    assert np.linalg.norm(mean - problem.x_star) < trajectory.rows[0]["mean_error"]


@pytest.mark.parametrize("trial", range(100))
def test_flow_is_preconditioned_gradient_descent(trial):

    rng = RngStream(trial)
    problem = make_inverse_problem("random", 4, rng.substream(0), m=3)
    ensemble = Ensemble.gaussian(6, 4, rng.substream(1))
    rhs = eki_rhs(ensemble, problem)
    X = ensemble.positions
    centred = X - X.mean(axis=0)
    preconditioned = problem.misfit_gradient(X) @ (centred.T @ centred / X.shape[0])
    assert np.linalg.norm(rhs + preconditioned) <= 1e-8 * np.linalg.norm(rhs)
    np.testing.assert_allclose(gradient_flow_rhs(ensemble, problem), rhs, rtol=1e-8, atol=1e-12)


def test_exact_member_has_no_residual_term():

    problem = make_inverse_problem("identity", 1, RngStream(0), x_star=[2.0])
    rhs = eki_rhs(Ensemble([[2.0], [0.0], [4.0]]), problem)
    assert rhs[0, 0] == 0.0


def test_flow_needs_two_members(identity_1d):

    with pytest.raises(ValueError):
        eki_rhs(Ensemble([[1.0]]), identity_1d)


def test_integrate_consensus_is_constant():

    problem = make_inverse_problem("random", 2, RngStream(0), m=2)
    ensemble = Ensemble.consensus([0.3, 0.3], 4)
    trajectory = eki_integrate(ensemble, problem, 1.0, 0.1, method="rk4")
    np.testing.assert_array_equal(trajectory.final.positions, ensemble.positions)


@pytest.mark.parametrize("method,low,high", [("euler", 1.6, 2.5), ("rk4", 10.0, 22.0)])
def test_integration_order(method, low, high):

    problem = make_inverse_problem("random", 2, RngStream(0), m=2)
    ensemble = Ensemble.gaussian(4, 2, RngStream(1))
    reference = eki_integrate(ensemble, problem, 1.0, 1e-3, method="rk4").final.positions

    def error(h):
        final = eki_integrate(ensemble, problem, 1.0, h, method=method).final.positions
        return np.abs(final - reference).max()

    assert low < error(0.1) / error(0.05) < high


def test_integrate_snapshots(identity_1d):

    trajectory = eki_integrate(Ensemble([[0.0], [1.0]]), identity_1d, 1.0, 0.1,
                               snapshot_times=[0.5])
    assert trajectory.times == pytest.approx([0.0, 0.5, 1.0])
    assert len(trajectory.rows) == 10
    assert trajectory.rows[-1]["time"] == pytest.approx(1.0)


def test_integrate_rejects_unknown_method(identity_1d):

    with pytest.raises(ValueError):
        eki_integrate(Ensemble([[0.0], [1.0]]), identity_1d, 1.0, 0.1, method="midpoint")


def test_misfit_of_mean_decreases(identity_1d):

    trajectory = eki_integrate(Ensemble.gaussian(10, 1, RngStream(0)), identity_1d, 5.0, 0.01)
    misfits = [row["misfit_at_mean"] for row in trajectory.rows]
    assert all(b <= a for a, b in zip(misfits, misfits[1:]))


def test_non_finite_forward_map_diverges():

    problem = InverseProblem(y=[1.0], Gamma=[[1.0]], forward=lambda X: np.sqrt(X), d=1)
    with np.errstate(invalid="ignore"):
        with pytest.raises(DivergenceError) as err:
            eki_integrate(Ensemble([[-1.0], [1.0]]), problem, 1.0, 0.1)
    assert err.value.last_valid_step == 0
    assert err.value.last_valid_time == 0.0


def test_enkf_divergence_reports_last_finite_step():

    problem = InverseProblem(y=[1.0], Gamma=[[1.0]], forward=lambda X: np.sqrt(X), d=1)
    with np.errstate(invalid="ignore"):
        with pytest.raises(DivergenceError) as err:
            run_enkf(Ensemble([[-1.0], [1.0], [2.0]]), problem, 0.1, 5)
    assert err.value.last_valid_step == 0
    assert err.value.last_valid_time == 0.0


def test_modified_step_reduces_to_gradient_flow():

    problem = make_inverse_problem("random", 3, RngStream(0), m=3)
    ensemble = Ensemble.gaussian(5, 3, RngStream(1))
    new = modified_eki_step(ensemble, problem, 1.0, 0.0, 0.01)
    np.testing.assert_array_equal(new.positions, ensemble.positions
                                  + 0.01 * gradient_flow_rhs(ensemble, problem))


def test_modified_consensus_is_fixed():

    problem = make_inverse_problem("tanh", 2, RngStream(0), m=2)
    ensemble = Ensemble.consensus([0.5, 0.5], 4)
    np.testing.assert_array_equal(modified_eki_step(ensemble, problem, 1.0, 0.0, 0.1).positions,
                                  ensemble.positions)


def test_modified_flow_reaches_minimizer():

    problem = make_inverse_problem("identity", 1, RngStream(0), x_star=[1.0])
    trajectory = run_modified_eki(Ensemble.gaussian(10, 1, RngStream(1)), problem, 0.5, -1.0,
                                  0.01, 6000)
    residuals = (trajectory.final.positions[:, 0] - 1.0)**2
    assert residuals.max() < 1e-8
    assert trajectory.rows[-1]["mean_error"] < 1e-4


def test_modified_flow_with_full_shift_keeps_affine_hull():

    problem = make_inverse_problem("random", 4, RngStream(0), m=4)
    initial = Ensemble.gaussian(3, 4, RngStream(1))
    trajectory = run_modified_eki(initial, problem, 1.0, -1.0, 0.01, 200)
    assert affine_hull_residual(trajectory.final.positions, initial.positions).max() < 1e-10


def test_modified_step_needs_positive_step(identity_1d):

    with pytest.raises(ValueError):
        modified_eki_step(Ensemble([[0.0], [1.0]]), identity_1d, 1.0, 0.0, -0.1)


def test_spread_at_consensus():

    problem = make_inverse_problem("random", 2, RngStream(0), m=3)
    spread = spread_matrix(Ensemble.consensus([1.0, 2.0], 5), problem)
    np.testing.assert_array_equal(spread.matrix, np.zeros((5, 5)))
    assert spread.norm == 0.0


def test_spread_rank_and_symmetry():

    problem = make_inverse_problem("random", 2, RngStream(0), m=3)
    spread = spread_matrix(Ensemble.gaussian(6, 2, RngStream(1)), problem)
    np.testing.assert_allclose(spread.matrix, spread.matrix.T, rtol=1e-12, atol=1e-12)
    assert np.linalg.matrix_rank(spread.matrix) <= 2


def test_spread_of_duplicated_ensemble():

    problem = make_inverse_problem("random", 3, RngStream(0), m=2)
    X = RngStream(1).normal((4, 3))
    spread = spread_matrix(Ensemble(X), problem).matrix
    doubled = spread_matrix(Ensemble(np.concatenate([X, X])), problem).matrix
    np.testing.assert_allclose(doubled, np.tile(spread, (2, 2)), rtol=1e-12, atol=1e-12)


def test_spread_with_inverse_weighting():

    problem = InverseProblem(y=[0.0], Gamma=[[4.0]], matrix=[[1.0]])
    ensemble = Ensemble([[0.0], [2.0]])
    np.testing.assert_allclose(spread_matrix(ensemble, problem).matrix,
                               [[4.0, -4.0], [-4.0, 4.0]])
    np.testing.assert_allclose(spread_matrix(ensemble, problem, use_inverse=True).matrix,
                               [[0.25, -0.25], [-0.25, 0.25]])


def test_moments_of_dirac():

    problem = make_inverse_problem("random", 2, RngStream(0), m=3)
    fields = moment_fields(EmpiricalMeasure.dirac([1.0, -2.0]), problem)
    np.testing.assert_array_equal(fields.mean, [1.0, -2.0])
    np.testing.assert_array_equal(fields.second_moment, [[1.0, -2.0], [-2.0, 4.0]])
    np.testing.assert_array_equal(fields.cross_covariance, np.zeros((2, 3)))


def test_moments_of_two_points(identity_1d):

    fields = moment_fields(EmpiricalMeasure([[0.0], [2.0]]), identity_1d)
    np.testing.assert_allclose(fields.mean, [1.0])
    np.testing.assert_allclose(fields.second_moment, [[2.0]])
    np.testing.assert_allclose(fields.cross_covariance, [[1.0]])


def test_moment_cross_covariance_matches_stats():

    problem = make_inverse_problem("tanh", 3, RngStream(0), m=2)
    X = RngStream(1).normal((8, 3))
    fields = moment_fields(EmpiricalMeasure(X), problem)
    np.testing.assert_allclose(fields.cross_covariance, ensemble_stats(Ensemble(X), problem).C,
                               rtol=1e-12, atol=1e-12)


def test_convex_hull_membership():

    hull = np.array([[0.0, 0.0], [2.0, 0.0], [0.0, 2.0]])
    assert convex_hull_member([0.5, 0.5], hull)
    assert convex_hull_member([2.0, 0.0], hull)
    assert not convex_hull_member([2.0, 2.0], hull)
    assert not convex_hull_member([-0.5, 0.5], hull)


def test_affine_hull_residual():

    line = np.array([[0.0, 0.0], [1.0, 1.0]])
    np.testing.assert_allclose(affine_hull_residual([[3.0, 3.0], [1.0, 0.0]], line),
                               [0.0, np.sqrt(0.5)], atol=1e-12)
    np.testing.assert_allclose(affine_hull_residual([[3.0, 4.0]], [[0.0, 0.0]]), [5.0])


def test_collapse_slope_of_power_law():

    t = np.linspace(0.1, 100.0, 1000)
    assert collapse_slope(t, 5.0 / t) == pytest.approx(-1.0, rel=1e-10)
    with pytest.raises(ValueError):
        collapse_slope([1.0], [1.0])


def test_collapse_experiment_rows(identity_1d):

    rows = enkf_collapse_experiment([0.5, 0.25], identity_1d, 10, 20.0, RngStream(0))
    assert [row.scale for row in rows] == [0.5, 0.25]
    assert all(isinstance(row, CollapseRow) and row.slope < 0.0 for row in rows)


@pytest.mark.slow
def test_collapse_rate():

    problem = make_inverse_problem("identity", 1, RngStream(0))
    rows = enkf_collapse_experiment([0.1], problem, 10, 1000.0, RngStream(1))
    assert -1.2 <= rows[0].slope <= -0.8
