from .consensus import gibbs_mean, gibbs_weights
from .ensemble import Ensemble, Trajectory
from .errors import (CorpusError, DivergenceError, NumericError, PreconditionError,
                     UnsupportedComparisonError)
from .growth import GrowthConstants, GrowthReport, verify_growth_conditions
from .objective import Objective, constant_objective, make_benchmark
from .rng import RngStream
from .schedule import Schedule
