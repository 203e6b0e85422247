"""Optimal leader selection and demotion in leader-follower consensus networks."""
from .errors import LeaderSelError
from .graph import (
    GraphMatrices,
    WeightedGraph,
    build_graph,
    derive_matrices,
    generate_graph,
    load_graph,
)
from .kernels import BACKEND
from .metrics import (
    H2Report,
    h2_error_quadrature_oracle,
    h2_error_sq,
    h2_norm_sq,
    h2_report,
    relative_error,
    structural_h2_formula,
)
from .relaxation import SubspacePoint, gradient, hessian_apply, objective, solve_relaxed
from .selection import (
    DemotionReport,
    SelectionReport,
    select_bruteforce,
    select_closed_form,
    demotion_costs,
)
from .simulate import InputSignal, group_disagreement, integrate, check_output_bound
from .system import (
    LeaderAssignment,
    assignment_from_sets,
    build_input_matrix,
    gramian_spectral_oracle,
    observability_gramian,
    transfer_eval,
)

__version__ = "0.1.0"
