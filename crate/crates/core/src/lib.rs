//! Aggregation of noisy subjective rank ballots and inference of latent
//! emotion distributions.
//!
//! Two pipelines share this crate:
//!
//! - **Ballot aggregation**: top-1/top-3 ballots from many evaluators are
//!   fused either by simple voting consensus or by the exact Kemeny-optimal
//!   ranking of the induced weighted tournament (minimum feedback arc set).
//! - **Emotion inference**: observed expressed-emotion probabilities are
//!   inverted through a column-stochastic likelihood matrix by solving a
//!   least-squares problem constrained to the probability simplex, with KKT
//!   certificates reported alongside the solution.
//!
//! A Mallows-model sampler generates synthetic evaluator populations so the
//! two aggregation methods can be compared reproducibly, and `cli_io` ties
//! everything to deterministic file formats and a CLI.

pub mod error;
pub mod inference;
pub mod io;
pub mod kemeny;
pub mod mallows;
pub mod model;
pub mod tournament;
pub mod voting;

pub use error::{Error, Result};
