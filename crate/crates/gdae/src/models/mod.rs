//! Trainable reconstruction conditionals `P(X | X~)`.
//!
//! Three families share one operation surface (log-probability, sampling):
//! a Laplace-smoothed counting table for discrete states, a conditional
//! Parzen mixture for real vectors, and a Bernoulli-output MLP for bit
//! vectors. [`ConditionalModel`] is the tagged union the chain and
//! evaluation code works against.

mod mlp;
mod multinomial;
mod parzen;
mod persist;

pub use mlp::{mlp_grad, BernoulliMlp, MlpGradient};
pub use multinomial::{fit_multinomial, MultinomialTable};
pub use parzen::ParzenConditional;
pub use persist::{load_model, read_model, save_model, write_model, MODEL_MAGIC};

use crate::distributions::{RngStream, Sample};
use crate::error::{Error, Result};

/// A reconstruction conditional from one of the three supported families.
#[derive(Debug, Clone, PartialEq)]
pub enum ConditionalModel {
    Multinomial(MultinomialTable),
    Parzen(ParzenConditional),
    BernoulliMlp(BernoulliMlp),
}

impl ConditionalModel {
    /// The sample variant this model reconstructs.
    pub fn expected_variant(&self) -> &'static str {
        match self {
            Self::Multinomial(_) => "discrete",
            Self::Parzen(_) => "real",
            Self::BernoulliMlp(_) => "binary",
        }
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            Self::Multinomial(_) => "table",
            Self::Parzen(_) => "parzen",
            Self::BernoulliMlp(_) => "mlp",
        }
    }

    /// Exact `log P(x | x_tilde)`.
    pub fn log_prob(&self, x: &Sample, x_tilde: &Sample) -> Result<f64> {
        match self {
            Self::Multinomial(t) => {
                t.log_prob(x.as_discrete()?, x_tilde.as_discrete()?)
            }
            Self::Parzen(p) => p.log_prob(x.as_real()?, x_tilde.as_real()?),
            Self::BernoulliMlp(m) => m.log_prob(x.as_binary()?, x_tilde.as_binary()?),
        }
    }

    /// Exact draw `X ~ P(. | x_tilde)`.
    pub fn sample(&self, x_tilde: &Sample, rng: &mut RngStream) -> Result<Sample> {
        match self {
            Self::Multinomial(t) => {
                Ok(Sample::Discrete(t.sample(x_tilde.as_discrete()?, rng)?))
            }
            Self::Parzen(p) => Ok(Sample::Real(p.sample(x_tilde.as_real()?, rng)?)),
            Self::BernoulliMlp(m) => {
                Ok(Sample::Binary(m.sample(x_tilde.as_binary()?, rng)?))
            }
        }
    }

    pub fn as_multinomial(&self) -> Result<&MultinomialTable> {
        match self {
            Self::Multinomial(t) => Ok(t),
            other => Err(Error::VariantMismatch {
                expected: "discrete",
                got: other.expected_variant(),
            }),
        }
    }
}
