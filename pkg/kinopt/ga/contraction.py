import dataclasses
import logging
from typing import Optional

import numpy as np

from kinopt.ga.genetic import GAParams, ga_step
from kinopt.ga.selection import SelectionKind
from kinopt.shared.ensemble import Ensemble
from kinopt.shared.errors import PreconditionError
from kinopt.shared.objective import Objective
from kinopt.shared.rng import INIT_STREAM, STEP_STREAM, RngStream


logger = logging.getLogger(__name__)


@dataclasses.dataclass
class ContractionReport:
    """
    Distance |mean_k - x*| per generation against the envelope
    exp(-k nu) |mean_0 - x*| plus three standard errors.
    """
    errors: list
    envelopes: list
    stderrs: list
    accuracy: float
    violation_step: Optional[int]
    accuracy_step: Optional[int]

    @property
    def passed(self) -> bool:
        # the envelope only has to hold before the accuracy is reached
        if self.accuracy_step is None:
            return False
        return self.violation_step is None or self.violation_step >= self.accuracy_step

    def to_dict(self) -> dict:
        return dict(errors=self.errors, envelopes=self.envelopes, stderrs=self.stderrs,
                    accuracy=self.accuracy, violation_step=self.violation_step,
                    accuracy_step=self.accuracy_step, passed=self.passed)


def ga_contraction_check(obj: Objective, nu: float, sigma: float, alpha: float, N: int,
                         steps: int, rng: RngStream, accuracy: float = 0.05,
                         initial_mean: float = 1.0, initial_std: float = 1.0) -> ContractionReport:
    """
    Runs the GA without elitism (Gibbs-selected children, survivors drawn
    uniformly from the current generation) and checks the exponential
    contraction of the ensemble mean towards the known minimizer.
    """
    if obj.known_min is None:
        raise PreconditionError(f"{obj.name}: the contraction check needs a known minimizer")
    if not 0.0 < nu <= 1.0:
        raise ValueError(f"nu must lie in (0, 1] for the contraction check, got {nu}")

    params = GAParams(N=N, sigma=sigma, nu=nu,
                      selection=SelectionKind.boltzmann_gibbs(alpha),
                      weighted_retention=False)
    ensemble = Ensemble.gaussian(N, obj.d, rng.substream(INIT_STREAM), initial_mean, initial_std)
    xstar = obj.minimizer

    def measure(ens: Ensemble) -> tuple[float, float]:
        error = float(np.linalg.norm(ens.mean() - xstar))
        return error, float(np.sqrt(ens.variance() / ens.N))

    error0, stderr0 = measure(ensemble)
    errors, envelopes, stderrs = [error0], [error0], [stderr0]
    violation_step, accuracy_step = None, (0 if error0 < accuracy else None)

    step_streams = rng.substream(STEP_STREAM)
    for k in range(1, steps + 1):
        if accuracy_step is not None:
            break
        ensemble = ga_step(ensemble, params, obj, step_streams.substream(k - 1))
        error, stderr = measure(ensemble)
        envelope = float(np.exp(-k * nu) * error0)
        errors.append(error)
        envelopes.append(envelope)
        stderrs.append(stderr)
        if error < accuracy:
            accuracy_step = k
        elif violation_step is None and error > envelope + 3.0 * stderr:
            violation_step = k

    report = ContractionReport(errors, envelopes, stderrs, accuracy, violation_step, accuracy_step)
    logger.info(f"GA contraction on {obj.name}: violation at {violation_step}, "
                f"accuracy {accuracy} reached at {accuracy_step}")
    return report
