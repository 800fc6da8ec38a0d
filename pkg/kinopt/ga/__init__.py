from .cbo import cbo_step, run_cbo
from .contraction import ga_contraction_check
from .genetic import GAParams, crossover_mutation, ga_step, run_ga
from .kinetic import kinetic_ga_step
from .scaling import ga_quasi_invariant_experiment
from .selection import ParentMeasure, SelectionKind, selection_weights
