//! Max-Haf solvers.
//!
//! Every stochastic solver draws its randomness from an [`Explorer`] (for
//! starting points) and, for annealing, a [`Tweaker`] (for local moves), so
//! the same code path runs with GBS or uniform randomness. Objective queries
//! go through an [`ObjectiveOracle`], whose query counter is the x-axis of
//! every trajectory.
//!
//! [`Explorer`]: crate::gbs::Explorer
//! [`Tweaker`]: crate::gbs::Tweaker

mod annealing;
mod brute;
mod clique;
mod greedy;
mod oracle;
mod random_search;
mod run;

pub use annealing::{simulated_annealing, simulated_annealing_observed, AnnealSchedule, AnnealStep};
pub use brute::{brute_force_from_distribution, brute_force_maxhaf, BruteForceResult};
pub use clique::{max_clique_via_maxhaf, ADJACENCY_TOLERANCE};
pub use greedy::{greedy, greedy_evaluations};
pub use oracle::ObjectiveOracle;
pub use random_search::random_search;
pub use run::{Algorithm, OptimizerRun};
