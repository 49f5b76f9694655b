//! Limits on noisy quantum optimizers.
//!
//! The crate combines relative-entropy contraction under noise with classical
//! Gibbs-state machinery:
//!
//! - [`instances`]: Ising problem instances and their energy utilities.
//! - [`bounds`]: closed-form entropy budgets, depth ceilings and thresholds.
//! - [`partition`]: exact partition functions and the variational lower bound
//!   on the energy a noisy device can reach.
//! - [`sampler`]: heat-bath Glauber dynamics with the rapid-mixing certificate.
//! - [`baselines`]: simulated annealing and a low-rank SDP relaxation.
//! - [`annealer`]: continuous-time bounds for noisy quantum annealers.
//!
//! Entropies are reported in bits unless a name says otherwise; everything
//! that goes through a partition function is computed in nats internally.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod annealer;
pub mod baselines;
pub mod bounds;
mod error;
pub mod instances;
pub mod partition;
pub mod rng;
pub mod sampler;

pub use error::{Error, Result};
