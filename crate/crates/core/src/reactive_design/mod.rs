//! Reactive task assignment: chains, their steady states and values, and
//! the designer-optimal chains for observable and unobservable good games.

pub mod chain;
pub mod design;
pub mod linalg;
pub mod sweep;

pub use chain::{
    constant_mix, cooperation_labels, full_cooperation_feasible, solve_values, steady_state, Arrivals,
    AssignmentChain, ChainModel, ChainSolution, ChainState, Feasibility, Labels, Slack, Task,
};
pub use design::{
    check_premises, cycle_chain, design_observable, design_unobservable, minimal_dwell, strict_improvement_check,
    OptimalReactive, ReactiveKind, ReactiveStructure,
};
pub use sweep::{period_environment, period_sweep, PeriodReport};
