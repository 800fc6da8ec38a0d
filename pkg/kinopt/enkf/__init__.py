from .collapse import affine_hull_residual, collapse_slope, convex_hull_member
from .problem import InverseProblem, make_inverse_problem
from .stats import ensemble_stats, moment_fields, spread_matrix
from .update import eki_integrate, eki_rhs, enkf_update, modified_eki_step, run_enkf
