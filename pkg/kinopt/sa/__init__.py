from .annealing import (SAState, acceptance_probability, estimate_transition_operator,
                        run_sa_chain, run_sa_ensemble, sa_step)
from .langevin import langevin_step, run_langevin_ensemble
from .scaling import sa_diffusion_scaling
