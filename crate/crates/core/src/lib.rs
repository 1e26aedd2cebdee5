pub mod equilibrium;
pub mod error;
pub mod scalar;
pub mod stage_games;
pub mod reshuffle_design;
pub mod static_assignment;
pub mod reactive_design;
pub mod simulator;
pub mod compstat;
pub mod cli;
