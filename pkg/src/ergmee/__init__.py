"""Fast maximum-likelihood estimation of exponential random graph models
on large undirected networks.

The package provides a mutable sparse graph, incremental change statistics
for the common ERGM terms, Metropolis-Hastings simulation, an
equilibrium-expectation estimator seeded by one-step contrastive
divergence, exact enumeration oracles for tiny graphs, and a CLI.
"""

from .graph import (
    AttributeTable,
    Dyad,
    Graph,
    ToggleDirection,
    isolate_count,
    make_dyad,
    shared_partner_count,
    toggle_edge,
)
from .model import ModelSpec, Term, parse_model, parse_term
from .changestats import (
    ChangeComputer,
    change_alt_star,
    change_alt_triangle,
    change_alt_two_path,
    change_attribute_term,
    change_edge,
    change_isolates,
    change_vector,
    full_statistics,
)
from .sampler import (
    BasicProposal,
    IfdProposal,
    RngStream,
    SimulationConfig,
    SimulationResult,
    acceptance_log_prob,
    derive_seed,
    mh_sweep,
    propose,
    simulate,
)
from .estimator import (
    ConvergenceReport,
    DegeneracyError,
    EEConfig,
    EstimateReport,
    EstimationDivergedError,
    EstimationTrace,
    GainVector,
    batch_means_se,
    calibrate_gains,
    cd1_initialize,
    ee_estimate,
    post_estimation_check,
    proposal_drift,
    random_graph,
    refine_gains,
    standard_errors,
    tau_ratios,
)
from .oracle import (
    ExactDistribution,
    MleDoesNotExistError,
    exact_expectations,
    exact_mle,
)

__version__ = "0.1.0"

__all__ = [
    "AttributeTable",
    "BasicProposal",
    "ChangeComputer",
    "ConvergenceReport",
    "DegeneracyError",
    "Dyad",
    "EEConfig",
    "EstimateReport",
    "EstimationDivergedError",
    "EstimationTrace",
    "ExactDistribution",
    "GainVector",
    "Graph",
    "IfdProposal",
    "MleDoesNotExistError",
    "ModelSpec",
    "RngStream",
    "SimulationConfig",
    "SimulationResult",
    "Term",
    "ToggleDirection",
    "acceptance_log_prob",
    "batch_means_se",
    "calibrate_gains",
    "cd1_initialize",
    "change_alt_star",
    "change_alt_triangle",
    "change_alt_two_path",
    "change_attribute_term",
    "change_edge",
    "change_isolates",
    "change_vector",
    "derive_seed",
    "ee_estimate",
    "exact_expectations",
    "exact_mle",
    "full_statistics",
    "isolate_count",
    "make_dyad",
    "mh_sweep",
    "parse_model",
    "parse_term",
    "post_estimation_check",
    "proposal_drift",
    "propose",
    "random_graph",
    "refine_gains",
    "shared_partner_count",
    "simulate",
    "standard_errors",
    "tau_ratios",
    "toggle_edge",
]
