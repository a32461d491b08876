//! Exact and variational inference for sigmoid belief networks: directed
//! acyclic graphs of binary units whose conditional activation
//! probabilities are logistic functions of weighted parent sums.
//!
//! The crate provides
//!
//! - the network model itself with ancestral sampling ([`network`]),
//! - brute-force enumeration oracles for likelihoods, posteriors, and KL
//!   divergences on small hidden sets ([`exact`]),
//! - a factorized variational approximation with a per-node ξ-parameterized
//!   lower bound on the log-likelihood and an alternating fixed-point
//!   solver ([`mean_field`]),
//! - gradient-ascent learning on the bound and max-bound classification
//!   ([`learning`]),
//! - line-based text formats and seeded random network generation ([`io`]).
//!
//! The `sbn` binary wraps all of this for batch use.

pub mod error;
pub mod exact;
pub mod io;
pub mod learning;
pub mod math;
pub mod mean_field;
pub mod network;
pub mod rng;

pub use error::{Error, Result};
pub use io::BitmapDataset;
pub use math::{sigmoid, softplus};
pub use mean_field::{BoundBreakdown, MeanFieldState, Solution, SolveOptions};
pub use network::{Edge, Evidence, FullConfiguration, SigmoidBeliefNetwork};
pub use rng::Rng64;
