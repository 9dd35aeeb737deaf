//! Time-expanded traffic flow models, exact integral min-cost flow, and the
//! impact-versus-noticeability frontier of signal tampering.
//!
//! The pipeline is: describe a [`RoadNetwork`], [`expand`] it over a horizon
//! into a [`SuperGraph`], solve the travel-time optimum with
//! [`optimal_control`], then enumerate the supported frontier with
//! [`pareto_frontier`] and summarize it with [`VulnerabilityReport`].

pub mod adversary;
pub mod control;
pub mod export;
pub mod flow;
pub mod network;
pub mod oracle;
pub mod scenarios;
pub mod supergraph;
pub mod vulnerability;

pub use adversary::{
    brute_force_frontier, encode_objectives, evaluate_attack, frontier_audit, pareto_frontier,
    pareto_frontier_with, recheck_weighted_support, AdversaryError, AuditIssue, AuditReport,
    BruteForceFrontier, FrontierOptions, ObjectiveEncoding, ParetoFrontier, ParetoPoint,
    ProvenanceEntry, Witness,
};
pub use control::{
    baseline, infer_signal_schedule, minimize_switches, optimal_control, travel_time_costs,
    ControlError, GroupSchedule, OptimalSolution, SignalSchedule,
};
pub use flow::{
    check_feasible, lexicographic_costs, solve_lexicographic, solve_min_cost, verify_optimality,
    ArcList, CostVector, FeasibilityError, FlowGraph, FlowSolver, IntegralFlow, SolverError,
};
pub use network::{
    build_conflict_gadget, degree_statistics, validate, Cell, CellKind, ConflictGroup, Connector,
    DegreeSummary, Link, Movement, NetworkError, NodeKind, RoadNetwork, TransshipmentNode,
    ValidationReport, Violation,
};
pub use scenarios::{
    demand_profile, generate_irregular, generate_regular_grid, summarize, DemandSpec, GridKind,
    Instance, NetworkSpec, NetworkSummary, ScenarioConfig, ScenarioError,
};
pub use supergraph::{
    expand, incidence_check, to_dag_order, ArcClass, ArcKey, DemandProfile, ExpandError, Horizon,
    SinkCapacityPolicy, SuperGraph,
};
pub use vulnerability::{
    compare, concavity_index, normalize, shape_distance, slope_at_origin, Axis, CompareError,
    ComparisonRow, ComparisonTable, NormPoint, RunSettings, VulnerabilityReport,
};
