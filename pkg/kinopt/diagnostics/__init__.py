from .entropy import (dissipation_functional, gibbs_density, histogram_density,
                      kl_divergence, laplace_functional)
from .measures import EmpiricalMeasure, GridDensity1D
from .wasserstein import sliced_w2, wasserstein2_1d
