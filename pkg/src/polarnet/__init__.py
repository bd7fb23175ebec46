"""Polarization and disagreement in opinion dynamics on weighted graphs.

Steady states of the leader-driven (French-DeGroot) and stubborn-agent
(Friedkin-Johnsen) models, their polarization/disagreement indices, and
design routines that pick leaders, graphs, edge weights or preference
flips to keep the combined index small.
"""

__version__ = "0.1.0"

from ._kernels import USE_NUMBA
from .design_fd import (
    LeaderChoice,
    RobustDesign,
    SpectralCertificate,
    Twin,
    check_spectral_approx,
    design_robust_graph,
    detect_twins,
    pair_polarization_sweep,
    select_leader,
)
from .design_fj import (
    FlipObjective,
    FlipPlan,
    WeightDesign,
    exhaustive_flip_oracle,
    flip_preferences_budget,
    flip_preferences_l1,
    lambda_grid,
    optimize_weights,
    random_flip_baseline,
    weight_objective,
)
from .dynamics import (
    FdModel,
    FjModel,
    Trajectory,
    convergence_horizon,
    fd_steady_state,
    fd_steady_state_closed,
    fj_steady_state,
    simulate_trajectory,
)
from .errors import (
    GraphError,
    InsufficientEdgeBudget,
    ModelError,
    NumericalError,
    ParameterError,
    PolarnetError,
    SolverError,
)
from .experiment import ExperimentReport, run_flip_experiment
from .graph import (
    LaplacianKit,
    WeightedGraph,
    biharmonic_distance,
    build_graph,
    complete_graph,
    laplacian_kit,
    largest_connected_component,
    random_connected_graph,
    resistance_distance,
    scale_weights,
)
from .indices import (
    IndexReport,
    disagreement,
    fd_disagreement_closed,
    fd_polarization_closed,
    fd_report,
    fj_index,
    fj_index_closed,
    fj_report,
    pd_index,
    polarization,
    weighted_polarization,
)
from .io import read_edge_list, read_node_attributes, write_edge_list
