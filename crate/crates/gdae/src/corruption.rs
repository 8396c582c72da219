//! Corruption kernels `C(X~ | X)`: sampling plus exact log-densities.
//!
//! All three families expose the same two operations so the chain, the
//! energy estimator, and the exact transition oracle can treat them
//! uniformly. Strict positivity of the kernel is what makes the sampling
//! chain ergodic; it is not enforced at construction (degenerate settings
//! are useful for exercising the ergodicity checks) but is diagnosed by
//! [`crate::chain::check_ergodicity`].

use crate::distributions::{RngStream, Sample};
use crate::error::{Error, Result};

const LN_2PI: f64 = 1.8378770664093453; // ln(2*pi)

/// A fixed conditional distribution that stochastically perturbs a sample.
#[derive(Debug, Clone, PartialEq)]
pub enum CorruptionProcess {
    /// With probability `1 - eps` keep the state, otherwise draw uniformly
    /// over all `k` states (including the current one).
    DiscreteFlip { k: usize, eps: f64 },
    /// Independently per bit: with probability `corrupt_prob` replace the
    /// bit by a fair coin (so a corrupted bit keeps its value half the
    /// time).
    SaltPepper { d: usize, corrupt_prob: f64 },
    /// Add `N(0, sigma^2 I)` noise coordinate-wise.
    IsotropicGaussian { d: usize, sigma: f64 },
}

impl CorruptionProcess {
    pub fn discrete_flip(k: usize, eps: f64) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidParameter(format!(
                "discrete_flip needs k >= 2, got {k}"
            )));
        }
        if !(0.0..=1.0).contains(&eps) || !eps.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "discrete_flip eps must lie in [0, 1], got {eps}"
            )));
        }
        Ok(Self::DiscreteFlip { k, eps })
    }

    pub fn salt_pepper(d: usize, corrupt_prob: f64) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParameter(
                "salt_pepper needs d >= 1".to_string(),
            ));
        }
        if !(0.0..=1.0).contains(&corrupt_prob) || !corrupt_prob.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "salt_pepper corrupt_prob must lie in [0, 1], got {corrupt_prob}"
            )));
        }
        Ok(Self::SaltPepper { d, corrupt_prob })
    }

    pub fn isotropic_gaussian(d: usize, sigma: f64) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParameter(
                "isotropic_gaussian needs d >= 1".to_string(),
            ));
        }
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "isotropic_gaussian sigma must be positive, got {sigma}"
            )));
        }
        Ok(Self::IsotropicGaussian { d, sigma })
    }

    /// The sample variant this process corrupts.
    pub fn expected_variant(&self) -> &'static str {
        match self {
            Self::DiscreteFlip { .. } => "discrete",
            Self::SaltPepper { .. } => "binary",
            Self::IsotropicGaussian { .. } => "real",
        }
    }

    fn check_dims(&self, x: &Sample) -> Result<()> {
        match (self, x) {
            (Self::DiscreteFlip { k, .. }, Sample::Discrete(s)) => {
                if *s >= *k {
                    return Err(Error::InvalidParameter(format!(
                        "state {s} out of range for k={k}"
                    )));
                }
                Ok(())
            }
            (Self::SaltPepper { d, .. }, Sample::Binary(bits)) => {
                if bits.len() != *d {
                    return Err(Error::DimensionMismatch {
                        expected: *d,
                        got: bits.len(),
                    });
                }
                Ok(())
            }
            (Self::IsotropicGaussian { d, .. }, Sample::Real(xs)) => {
                if xs.len() != *d {
                    return Err(Error::DimensionMismatch {
                        expected: *d,
                        got: xs.len(),
                    });
                }
                Ok(())
            }
            _ => Err(Error::VariantMismatch {
                expected: self.expected_variant(),
                got: x.variant_name(),
            }),
        }
    }

    /// Draw one corrupted sample `X~ ~ C(. | x)`.
    pub fn corrupt(&self, x: &Sample, rng: &mut RngStream) -> Result<Sample> {
        self.check_dims(x)?;
        match (self, x) {
            (Self::DiscreteFlip { k, eps }, Sample::Discrete(s)) => {
                if rng.next_bool(*eps) {
                    Ok(Sample::Discrete(rng.next_index(*k)))
                } else {
                    Ok(Sample::Discrete(*s))
                }
            }
            (Self::SaltPepper { corrupt_prob, .. }, Sample::Binary(bits)) => {
                let out = bits
                    .iter()
                    .map(|&b| {
                        if rng.next_bool(*corrupt_prob) {
                            u8::from(rng.next_bool(0.5))
                        } else {
                            b
                        }
                    })
                    .collect();
                Ok(Sample::Binary(out))
            }
            (Self::IsotropicGaussian { sigma, .. }, Sample::Real(xs)) => {
                let out = xs.iter().map(|&v| v + sigma * rng.next_gaussian()).collect();
                Ok(Sample::Real(out))
            }
            _ => unreachable!("check_dims guards the variant pairing"),
        }
    }

    /// Exact `log C(x_tilde | x)`.
    ///
    /// Returns `-inf` for zero-probability transitions of the discrete
    /// families; the Gaussian density is finite everywhere.
    pub fn log_density(&self, x_tilde: &Sample, x: &Sample) -> Result<f64> {
        self.check_dims(x)?;
        self.check_dims(x_tilde)?;
        match (self, x_tilde, x) {
            (Self::DiscreteFlip { k, eps }, Sample::Discrete(t), Sample::Discrete(s)) => {
                let move_prob = eps / *k as f64;
                let p = if t == s { (1.0 - eps) + move_prob } else { move_prob };
                Ok(p.ln())
            }
            (Self::SaltPepper { corrupt_prob, .. }, Sample::Binary(t), Sample::Binary(s)) => {
                let keep = 1.0 - corrupt_prob / 2.0;
                let flip = corrupt_prob / 2.0;
                let mut lp = 0.0;
                for (a, b) in t.iter().zip(s.iter()) {
                    lp += if a == b { keep.ln() } else { flip.ln() };
                }
                Ok(lp)
            }
            (Self::IsotropicGaussian { sigma, .. }, Sample::Real(t), Sample::Real(s)) => {
                let var = sigma * sigma;
                let mut lp = 0.0;
                for (a, b) in t.iter().zip(s.iter()) {
                    let diff = a - b;
                    lp += -0.5 * (LN_2PI + var.ln()) - diff * diff / (2.0 * var);
                }
                Ok(lp)
            }
            _ => unreachable!("check_dims guards the variant pairing"),
        }
    }
}
