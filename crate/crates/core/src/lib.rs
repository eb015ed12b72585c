//! Simulation engine for autonomous task allocation in a stylized
//! organization.
//!
//! Agents own parts of an NK decision problem ([`landscape`]), hillclimb
//! under a linear incentive scheme ([`organization`]), learn which
//! decisions interact ([`learning`]) and periodically trade decisions in
//! second-price auctions ([`auction`]). [`simulation`] runs replications,
//! experiments and scenario grids; [`scenario`] and [`output`] handle
//! configuration and result files.

pub mod auction;
pub mod error;
pub mod landscape;
pub mod learning;
pub mod oracle;
pub mod organization;
pub mod output;
pub mod scenario;
pub mod seeds;
pub mod simulation;

pub use auction::{AuctionStrategy, Bid, Offer, TradeRecord};
pub use error::{Error, InvariantViolation, Result};
pub use landscape::{Configuration, InteractionMatrix, Landscape, Optimum, StructureKind};
pub use learning::BeliefCounters;
pub use organization::{AgentState, Allocation, IncentiveScheme};
pub use scenario::{GridAxes, ScenarioConfig, ScenarioFile, Strategy, Structure};
pub use simulation::{
    run_experiment, run_grid, run_replication, ExperimentResult, PeriodRecord, ReplicationOutcome, RunOptions,
};
