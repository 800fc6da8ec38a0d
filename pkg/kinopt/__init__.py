from .shared.ensemble import Ensemble
from .shared.objective import Objective, make_benchmark
from .shared.rng import RngStream
from .enkf.problem import InverseProblem
from .scaling_lab.experiment import ExperimentSpec, run_experiment
