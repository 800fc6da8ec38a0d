import dataclasses
import logging
from typing import Callable, Optional, Sequence

import numpy as np
import numpy.typing as npt

from kinopt.shared.ensemble import Ensemble, Trajectory
from kinopt.shared.errors import NumericError, step_guard
from kinopt.shared.objective import Objective
from kinopt.shared.rng import INIT_STREAM, STEP_STREAM, RngStream
from kinopt.shared.schedule import Schedule


logger = logging.getLogger(__name__)


def default_proposal_scale(T: float, factor: float = 1.0) -> float:
    """sigma_k = factor * sqrt(2 T_k)."""
    return factor * float(np.sqrt(2.0 * T))


"""
SAState:

One annealing chain at step k: position x, temperature T and proposal
scale sigma. energy caches E(x); accepted records whether the step that
produced this state moved the chain.
"""
@dataclasses.dataclass
class SAState:
    x: npt.NDArray
    k: int = 0
    T: float = 1.0
    sigma: float = None
    energy: Optional[float] = None
    accepted: bool = False

    def __post_init__(self):
        self.x = np.atleast_1d(np.asarray(self.x, dtype=np.float64))
        if not self.T > 0.0:
            raise ValueError(f"SA temperature must be positive, got {self.T}")
        if self.sigma is None:
            self.sigma = default_proposal_scale(self.T)
        if not self.sigma > 0.0:
            raise ValueError(f"SA proposal scale must be positive, got {self.sigma}")

    @classmethod
    def start(cls, x0: npt.ArrayLike, obj: Objective, schedule: Schedule,
              proposal_factor: float = 1.0) -> "SAState":
        T0 = schedule.value_at(0)
        x0 = np.atleast_1d(np.asarray(x0, dtype=np.float64))
        return cls(x0, 0, T0, default_proposal_scale(T0, proposal_factor), obj.eval(x0))


"""
SATrace:

Chronological per-step records (step, temperature, energy, accepted, x).
"""
@dataclasses.dataclass
class SATrace:
    steps: list = dataclasses.field(default_factory=list)
    temperatures: list = dataclasses.field(default_factory=list)
    energies: list = dataclasses.field(default_factory=list)
    accepted: list = dataclasses.field(default_factory=list)
    positions: list = dataclasses.field(default_factory=list)

    def append(self, state: SAState):
        self.steps.append(state.k)
        self.temperatures.append(state.T)
        self.energies.append(state.energy)
        self.accepted.append(state.accepted)
        self.positions.append(state.x.copy())

    def __len__(self) -> int:
        return len(self.steps)

    def to_columns(self) -> dict:
        columns = dict(step=np.asarray(self.steps, dtype=np.int64),
                       temperature=np.asarray(self.temperatures),
                       energy=np.asarray(self.energies),
                       accepted=np.asarray(self.accepted, dtype=np.int64))
        positions = np.asarray(self.positions)
        for i in range(positions.shape[1]):
            columns[f"x{i}"] = positions[:, i]
        return columns


def acceptance_probability(E_x, E_y, T: float):
    """Metropolis acceptance min{1, exp(-(E_y - E_x)/T)}."""

    if not T > 0.0:
        raise ValueError(f"acceptance needs a positive temperature, got {T}")
    E_x = np.asarray(E_x, dtype=np.float64)
    E_y = np.asarray(E_y, dtype=np.float64)
    if not (np.all(np.isfinite(E_x)) and np.all(np.isfinite(E_y))):
        raise NumericError("non-finite energy in acceptance probability")
    prob = np.exp(-np.maximum(E_y - E_x, 0.0) / T)
    return float(prob) if prob.ndim == 0 else prob


def sa_step(state: SAState, obj: Objective, schedule: Schedule, rng: RngStream,
            proposal_factor: float = 1.0) -> SAState:

    E_x = obj.eval(state.x) if state.energy is None else state.energy
    y = state.x + state.sigma * rng.normal(state.x.shape)
    E_y = obj.eval(y)
    accepted = bool(rng.uniform() < acceptance_probability(E_x, E_y, state.T))

    T_next = schedule.value_at(state.k + 1)
    return SAState(x=y if accepted else state.x,
                   k=state.k + 1,
                   T=T_next,
                   sigma=default_proposal_scale(T_next, proposal_factor),
                   energy=E_y if accepted else E_x,
                   accepted=accepted)


def run_sa_chain(x0: npt.ArrayLike, steps: int, obj: Objective, schedule: Schedule,
                 rng: RngStream, proposal_factor: float = 1.0) -> tuple[SAState, SATrace]:
    """Anneals a single solution; returns the last iterate and its trace."""

    if steps < 0:
        raise ValueError("steps must be nonnegative")
    state = SAState.start(x0, obj, schedule, proposal_factor)
    trace = SATrace()
    trace.append(state)
    step_streams = rng.substream(STEP_STREAM)
    for k in range(steps):
        with step_guard(f"SA chain on {obj.name}", k, float(k)):
            state = sa_step(state, obj, schedule, step_streams.substream(k), proposal_factor)
        trace.append(state)
    logger.info(f"SA chain on {obj.name}: {steps} steps, final energy {state.energy:.6g}, "
                f"acceptance rate {np.mean(trace.accepted[1:]) if steps else 0.0:.3f}")
    return state, trace


def estimate_transition_operator(phi: Callable[[npt.NDArray], npt.NDArray],
                                 x: npt.ArrayLike, sigma: float, T: float, n: int,
                                 rng: RngStream, obj: Objective) -> tuple[float, float]:
    """
    Monte Carlo value of the SA transition operator applied to phi at x,

        Q phi(x) = E[beta(x, x + sigma xi) (phi(x + sigma xi) - phi(x))] + phi(x),

    returned with its standard error. phi maps an (n, d) batch to n values.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if not sigma > 0.0:
        raise ValueError(f"proposal scale must be positive, got {sigma}")

    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    Y = x + sigma * rng.normal((n, x.size))
    beta = acceptance_probability(obj.eval(x), obj.eval(Y), T)
    phi_x = float(np.asarray(phi(x.reshape(1, -1)), dtype=np.float64)[0])
    terms = beta * (np.asarray(phi(Y), dtype=np.float64) - phi_x)
    stderr = float(terms.std(ddof=1) / np.sqrt(n)) if n > 1 else float("inf")
    return float(terms.mean()) + phi_x, stderr


def metropolis_sweep(X: npt.NDArray, E: npt.NDArray, T: float, sigma: float,
                     obj: Objective, stream: RngStream,
                     update_probability: float = 1.0) -> tuple[npt.NDArray, npt.NDArray, npt.NDArray]:
    """
    One Metropolis step for every chain of an (N, d) ensemble. With
    update_probability < 1 each chain attempts a move only with that
    probability (one Poisson-clock tick of length update_probability).
    """
    N = X.shape[0]
    Y = X + sigma * stream.normal(X.shape)
    u = stream.uniform(N)
    E_Y = obj.eval(Y)
    accept = u < acceptance_probability(E, E_Y, T)
    if update_probability < 1.0:
        accept &= stream.uniform(N) < update_probability
    X_new = np.where(accept[:, None], Y, X)
    E_new = np.where(accept, E_Y, E)
    return X_new, E_new, accept


def run_sa_ensemble(N: int, steps: int, obj: Objective, schedule: Schedule,
                    rng: RngStream,
                    initial: Optional[Ensemble] = None,
                    snapshot_steps: Optional[Sequence[int]] = None,
                    update_probability: float = 1.0,
                    proposal_factor: float = 1.0) -> Trajectory:
    """
    N independent annealing chains, a particle realisation of the linear
    kinetic SA model. Snapshot times are steps * update_probability.
    """
    if N < 1:
        raise ValueError("run_sa_ensemble needs N >= 1")
    if steps < 0:
        raise ValueError("steps must be nonnegative")
    if not 0.0 < update_probability <= 1.0:
        raise ValueError(f"update_probability must lie in (0, 1], got {update_probability}")

    if initial is None:
        initial = Ensemble.gaussian(N, obj.d, rng.substream(INIT_STREAM))
    elif initial.N != N or initial.d != obj.d:
        raise ValueError(f"initial ensemble has shape ({initial.N}, {initial.d}), "
                         f"expected ({N}, {obj.d})")
    record = set(snapshot_steps) if snapshot_steps is not None else {0, steps}

    X = initial.positions.copy()
    E = obj.eval(X)
    trajectory = Trajectory()
    if 0 in record:
        trajectory.record(0.0, Ensemble(X.copy()))
    step_streams = rng.substream(STEP_STREAM)
    for k in range(steps):
        T = schedule.value_at(k)
        with step_guard(f"SA ensemble on {obj.name}", k, k * update_probability):
            X, E, accept = metropolis_sweep(X, E, T, default_proposal_scale(T, proposal_factor),
                                            obj, step_streams.substream(k), update_probability)
        trajectory.rows.append(dict(step=k + 1,
                                    time=(k + 1) * update_probability,
                                    temperature=T,
                                    best_energy=float(E.min()),
                                    mean_energy=float(E.mean()),
                                    acceptance=float(accept.mean()),
                                    variance=float(np.sum(X.var(axis=0)))))
        if k + 1 in record:
            trajectory.record((k + 1) * update_probability, Ensemble(X.copy()))
        logger.debug(f"SA ensemble step {k + 1}: T={T:.4g} acceptance={accept.mean():.3f}")

    logger.info(f"SA ensemble on {obj.name}: N={N}, {steps} steps, "
                f"final mean energy {E.mean():.6g}")
    return trajectory
