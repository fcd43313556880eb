//! Hafnians, post-selected Gaussian boson sampling (GBS), and GBS-enhanced
//! stochastic optimizers for the Max-Haf problem: given a complex symmetric
//! matrix `B` and an even `k`, find the `k x k` row/column selection `B_S`
//! with the largest `|Haf(B_S)|`.
//!
//! The crate is organized bottom-up:
//!
//! - [`linalg`]: complex matrices, Haar unitaries, COE and Gaussian ensembles.
//! - [`pattern`]: photon patterns (row/column selectors) and their enumeration.
//! - [`hafnian`]: exact Hafnians, perfect matchings, moment identities.
//! - [`gbs`]: the exact conditional GBS law, explore and tweak samplers.
//! - [`analysis`]: closed-form proportional-sampling theory.
//! - [`optimize`]: brute force, random search, simulated annealing, greedy,
//!   and the max-clique reduction.
//! - [`experiment`]: configuration-driven runs and figure datasets.
//!
//! ```
//! use maxhaf::{hafnian::hafnian, linalg::ComplexMatrix};
//!
//! // K4: three perfect matchings, each contributing 1
//! let k4 = ComplexMatrix::adjacency(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
//! assert_eq!(hafnian(&k4).unwrap().re, 3.0);
//! ```

pub mod analysis;
pub mod error;
pub mod experiment;
pub mod gbs;
pub mod hafnian;
pub mod linalg;
pub mod optimize;
pub mod pattern;
pub mod rng;

pub use error::{Error, Result};
pub use linalg::ComplexMatrix;
pub use pattern::PhotonPattern;
pub use rng::RandomStream;
