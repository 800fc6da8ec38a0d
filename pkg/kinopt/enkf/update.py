import logging
from typing import Optional, Sequence

import numpy as np
import numpy.typing as npt
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from kinopt.enkf.problem import InverseProblem
from kinopt.enkf.stats import ensemble_stats, spread_matrix, stats_from_positions
from kinopt.shared.ensemble import Ensemble, Trajectory
from kinopt.shared.errors import NumericError, require_finite, step_guard


logger = logging.getLogger(__name__)

EKI_METHODS = ("euler", "rk4")


def enkf_update(ensemble: Ensemble, problem: InverseProblem, dt: float) -> Ensemble:
    """
    One Kalman update x' = x + C (D + Gamma^{-1}/dt)^{-1} (y - F(x)), the
    statistics taken once from the pre-step ensemble.
    """
    if not dt > 0.0:
        raise ValueError(f"time step must be positive, got {dt}")

    stats = ensemble_stats(ensemble, problem)
    system = stats.D + problem.gamma_inverse() / dt
    try:
        factor = cho_factor(system)
    except (LinAlgError, ValueError) as err:
        raise NumericError(f"Kalman gain system is not positive definite: {err}") from err

    innovations = cho_solve(factor, (problem.y - stats.images).T)
    X_new = ensemble.positions + (stats.C @ innovations).T
    require_finite("Kalman update", X_new)
    return Ensemble(X_new)


def _eki_velocity(X: npt.NDArray, problem: InverseProblem) -> npt.NDArray:
    stats = stats_from_positions(X, problem)
    return problem.gamma_solve(problem.y - stats.images) @ stats.C.T


def eki_rhs(ensemble: Ensemble, problem: InverseProblem) -> npt.NDArray:
    """Velocity C(x) Gamma^{-1} (y - F(x^j)) of every member under the continuous-time flow."""

    if ensemble.N < 2:
        raise ValueError("the ensemble flow needs at least two members")
    return _eki_velocity(ensemble.positions, problem)


def _modified_velocity(X: npt.NDArray, problem: InverseProblem, kappa: float,
                       beta: float) -> npt.NDArray:
    x_bar = X[0] if np.all(X == X[0]) else X.mean(axis=0)
    shifted = X - kappa * x_bar
    covariance = shifted.T @ shifted / X.shape[0]
    return -(problem.misfit_gradient(X) + beta * (x_bar - X)) @ covariance


def gradient_flow_rhs(ensemble: Ensemble, problem: InverseProblem) -> npt.NDArray:
    """Preconditioned gradient descent -C(x) grad E(x^j) with the state covariance C."""
    return _modified_velocity(ensemble.positions, problem, 1.0, 0.0)


def modified_eki_step(ensemble: Ensemble, problem: InverseProblem, kappa: float,
                      beta: float, h: float) -> Ensemble:
    """
    Explicit Euler step of -C(x; kappa) (grad E(x^j) + beta (x_bar - x^j)),
    C(x; kappa) the average of (x^i - kappa x_bar) outer products.
    """
    if not h > 0.0:
        raise ValueError(f"step size must be positive, got {h}")
    X = ensemble.positions
    X_new = X + h * _modified_velocity(X, problem, kappa, beta)
    require_finite("modified EKI step", X_new)
    return Ensemble(X_new)


def enkf_row(step: int, time: float, ensemble: Ensemble, problem: InverseProblem) -> dict:
    x_bar = ensemble.mean()
    row = dict(step=step, time=time,
               misfit_at_mean=float(problem.misfit(x_bar)),
               spread_norm=spread_matrix(ensemble, problem).norm,
               variance=ensemble.variance())
    if problem.x_star is not None:
        row["mean_error"] = float(np.linalg.norm(x_bar - problem.x_star))
    return row


def _rk4(X: npt.NDArray, h: float, problem: InverseProblem) -> npt.NDArray:
    k1 = _eki_velocity(X, problem)
    k2 = _eki_velocity(X + 0.5 * h * k1, problem)
    k3 = _eki_velocity(X + 0.5 * h * k2, problem)
    k4 = _eki_velocity(X + h * k3, problem)
    return X + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def eki_integrate(ensemble: Ensemble, problem: InverseProblem, horizon: float, h: float,
                  method: str = "euler",
                  snapshot_times: Optional[Sequence[float]] = None) -> Trajectory:
    """
    Integrates the ensemble flow up to the horizon with explicit Euler or
    classical Runge-Kutta. One diagnostics row per step; snapshots at the
    requested times (start and end always).
    """
    if not h > 0.0:
        raise ValueError(f"step size must be positive, got {h}")
    if method not in EKI_METHODS:
        raise ValueError(f"unknown integration method '{method}', expected one of {EKI_METHODS}")
    if ensemble.N < 2:
        raise ValueError("the ensemble flow needs at least two members")

    steps = int(round(horizon / h))
    snapshot_steps = {int(round(t / h)) for t in (snapshot_times or [])}
    snapshot_steps.discard(0)
    snapshot_steps.discard(steps)

    trajectory = Trajectory()
    trajectory.record(0.0, ensemble)
    X = ensemble.positions
    for k in range(steps):
        with step_guard(f"EKI {method} on {problem.name}", k, k * h):
            if method == "euler":
                X_new = X + h * _eki_velocity(X, problem)
            else:
                X_new = _rk4(X, h, problem)
            require_finite("ensemble", X_new)
        X = X_new
        current = Ensemble(X)
        trajectory.rows.append(enkf_row(k + 1, (k + 1) * h, current, problem))
        if k + 1 in snapshot_steps:
            trajectory.record((k + 1) * h, current)
    trajectory.record(steps * h, Ensemble(X))

    logger.debug(f"EKI {method} on {problem.name}: {steps} steps of h={h}")
    return trajectory


def run_modified_eki(ensemble: Ensemble, problem: InverseProblem, kappa: float, beta: float,
                     h: float, steps: int) -> Trajectory:

    trajectory = Trajectory()
    trajectory.record(0.0, ensemble)
    for k in range(steps):
        with step_guard(f"modified EKI on {problem.name}", k, k * h):
            ensemble = modified_eki_step(ensemble, problem, kappa, beta, h)
        trajectory.rows.append(enkf_row(k + 1, (k + 1) * h, ensemble, problem))
    trajectory.record(steps * h, ensemble)
    return trajectory


def run_enkf(ensemble: Ensemble, problem: InverseProblem, dt: float,
             steps: int) -> tuple[npt.NDArray, Trajectory]:
    """Iterates the discrete Kalman update and returns the final ensemble mean."""

    trajectory = Trajectory()
    trajectory.record(0.0, ensemble)
    for k in range(steps):
        with step_guard(f"EnKF on {problem.name}", k, k * dt):
            ensemble = enkf_update(ensemble, problem, dt)
        trajectory.rows.append(enkf_row(k + 1, (k + 1) * dt, ensemble, problem))
    trajectory.record(steps * dt, ensemble)

    logger.info(f"EnKF on {problem.name}: N={ensemble.N}, {steps} steps, "
                f"misfit at mean {problem.misfit(ensemble.mean()):.6g}")
    return ensemble.mean(), trajectory
