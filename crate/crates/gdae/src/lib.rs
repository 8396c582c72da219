//! Generalized denoising autoencoders as generative models.
//!
//! Train a conditional reconstruction distribution `P(X | X~)` under a
//! pluggable corruption process `C(X~ | X)`, then generate data by
//! alternating the two kernels in a Markov chain. On finite state spaces
//! the chain's transition operator can be built exactly, so the library
//! also ships an oracle that computes the stationary distribution by power
//! iteration and checks it against the data-generating distribution.
//!
//! The pieces:
//!
//! - [`distributions`] — probability vectors, deterministic random streams,
//!   total variation, log-sum-exp.
//! - [`corruption`] — discrete flip, salt-and-pepper, and isotropic
//!   Gaussian corruption kernels with exact log-densities.
//! - [`models`] — the three reconstruction families: counting table,
//!   conditional Parzen mixture, and a Bernoulli-output MLP.
//! - [`chain`] — the alternating sampler plus the exact transition-matrix
//!   and stationary-distribution oracle for discrete state spaces.
//! - [`training`] — minibatch SGD for the MLP, one-shot fitting for the
//!   non-parametric families, and walkback corruption rollouts.
//! - [`eval`] — chain-based log-likelihood lower bound, anchored relative
//!   energies, and histogram / binned total-variation comparisons.
//! - [`data`], [`io`], [`config`], [`cli`] — datasets and generators, IDX /
//!   CSV / PGM formats, experiment config files, and the `gdae` command.
//!
//! # Runnable examples
//!
//! Each major capability has a runnable example:
//!
//! ```text
//! cargo run --release -p gdae --example stationary_oracle
//! cargo run --release -p gdae --example discrete_counting
//! cargo run --release -p gdae --example continuous_parzen
//! cargo run --release -p gdae --example walkback_discrete
//! cargo run --release -p gdae --example energy_landscape
//! cargo run --release -p gdae --example image_dae
//! ```
//!
//! # Quick start
//!
//! ```
//! use gdae::chain::{build_transition_matrix, build_true_conditional, stationary_distribution};
//! use gdae::corruption::CorruptionProcess;
//! use gdae::distributions::{total_variation, ProbVector};
//! use gdae::models::ConditionalModel;
//!
//! // A target distribution over 5 states and a strictly positive corruption.
//! let target = ProbVector::new(vec![0.4, 0.1, 0.2, 0.05, 0.25]).unwrap();
//! let corruption = CorruptionProcess::discrete_flip(5, 0.5).unwrap();
//!
//! // The exact reconstruction conditional makes the chain's stationary
//! // distribution reproduce the target.
//! let table = build_true_conditional(&target, &corruption).unwrap();
//! let t = build_transition_matrix(&ConditionalModel::Multinomial(table), &corruption, 5).unwrap();
//! let pi = stationary_distribution(&t).unwrap();
//! assert!(total_variation(&pi, &target).unwrap() <= 1e-9);
//! ```

pub mod chain;
pub mod cli;
pub mod config;
pub mod corruption;
pub mod data;
pub mod distributions;
pub mod error;
pub mod eval;
pub mod io;
pub mod models;
pub mod training;

pub use error::{Error, Result};
