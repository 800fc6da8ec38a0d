from .classic import pso_classic_step, run_pso_classic
from .lyapunov import lyapunov_functional, well_preparedness
from .memory import cbo_memory_step, run_cbo_memory
from .scaling import zero_inertia_experiment
from .sde import pso_sde_step, run_pso_sde, smooth_heaviside
from .swarm import PSOParams, SwarmState
