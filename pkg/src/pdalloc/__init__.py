"""Optimal multi-round resource allocation for product-development processes."""

from .costs import CostModel, CostSpec, RoundCost, element_cost, round_cost, total_cost
from .posy import (
    Monomial,
    Posynomial,
    log_domain_eval,
    log_domain_grad,
    poly_add,
    poly_mul,
    poly_scale,
    symbolic_remaining_work,
)
from .solver import (
    InfeasibleError,
    LogPoint,
    SolutionReport,
    SolverConfig,
    SolverDiagnostics,
    barrier_minimize,
    objective_and_gradient_budget,
    solve_budget,
    solve_performance,
)
from .wtm import (
    DecisionVariables,
    ProductArchitecture,
    RoundBounds,
    WorkTrajectory,
    build_wtm,
    completion_rate,
    completion_rate_series,
    performance,
    propagate,
    total_remaining,
)

__version__ = "0.1.0"
