//! Counting-table conditional for discrete state spaces.

use crate::distributions::{ProbVector, RngStream};
use crate::error::{Error, Result};

/// Conditional `P(x | x_tilde)` stored as raw pair counts plus a Laplace
/// pseudo-count `alpha` applied at query time.
///
/// `alpha > 0` keeps every conditional entry strictly positive (the
/// ergodicity requirement for sampling chains); `alpha = 0` gives the raw
/// maximum-likelihood counting estimate, which is also how the exact Bayes
/// conditional is represented by [`crate::chain::build_true_conditional`].
#[derive(Debug, Clone, PartialEq)]
pub struct MultinomialTable {
    /// Flattened `K x K` counts, `counts[x_tilde * k + x]`.
    counts: Vec<f64>,
    k: usize,
    alpha: f64,
}

impl MultinomialTable {
    pub fn new(k: usize, alpha: f64) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidParameter(format!(
                "multinomial table needs k >= 2, got {k}"
            )));
        }
        if !alpha.is_finite() || alpha < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "alpha must be a non-negative real, got {alpha}"
            )));
        }
        Ok(Self {
            counts: vec![0.0; k * k],
            k,
            alpha,
        })
    }

    pub fn from_counts(counts: Vec<f64>, k: usize, alpha: f64) -> Result<Self> {
        let mut table = Self::new(k, alpha)?;
        if counts.len() != k * k {
            return Err(Error::LengthMismatch(counts.len(), k * k));
        }
        for (i, &c) in counts.iter().enumerate() {
            if !c.is_finite() || c < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "count {i} is {c}, expected a non-negative finite value"
                )));
            }
        }
        table.counts = counts;
        Ok(table)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn counts(&self) -> &[f64] {
        &self.counts
    }

    pub fn count(&self, x_tilde: usize, x: usize) -> f64 {
        self.counts[x_tilde * self.k + x]
    }

    pub fn add_pair(&mut self, x: usize, x_tilde: usize) -> Result<()> {
        if x >= self.k || x_tilde >= self.k {
            return Err(Error::InvalidParameter(format!(
                "pair ({x}, {x_tilde}) out of range for k={}",
                self.k
            )));
        }
        self.counts[x_tilde * self.k + x] += 1.0;
        Ok(())
    }

    fn row_total(&self, x_tilde: usize) -> f64 {
        self.counts[x_tilde * self.k..(x_tilde + 1) * self.k]
            .iter()
            .sum()
    }

    /// Smoothed conditional row `P(. | x_tilde)`.
    ///
    /// With `alpha = 0` and an x_tilde value that was never observed the
    /// conditional is undefined; that situation is reported as an
    /// ergodicity error because it is exactly the degenerate case the
    /// positivity checks exist to catch.
    pub fn conditional_row(&self, x_tilde: usize) -> Result<ProbVector> {
        if x_tilde >= self.k {
            return Err(Error::InvalidParameter(format!(
                "state {x_tilde} out of range for k={}",
                self.k
            )));
        }
        let denom = self.row_total(x_tilde) + self.k as f64 * self.alpha;
        if denom <= 0.0 {
            return Err(Error::Ergodicity(format!(
                "conditional row for x_tilde={x_tilde} has no mass (alpha=0 and no observations)"
            )));
        }
        let probs: Vec<f64> = (0..self.k)
            .map(|x| (self.count(x_tilde, x) + self.alpha) / denom)
            .collect();
        ProbVector::new(probs)
    }

    /// `log P(x | x_tilde)`; `-inf` when the smoothed count is zero.
    pub fn log_prob(&self, x: usize, x_tilde: usize) -> Result<f64> {
        if x >= self.k || x_tilde >= self.k {
            return Err(Error::InvalidParameter(format!(
                "pair ({x}, {x_tilde}) out of range for k={}",
                self.k
            )));
        }
        let denom = self.row_total(x_tilde) + self.k as f64 * self.alpha;
        if denom <= 0.0 {
            return Err(Error::Ergodicity(format!(
                "conditional row for x_tilde={x_tilde} has no mass (alpha=0 and no observations)"
            )));
        }
        Ok(((self.count(x_tilde, x) + self.alpha) / denom).ln())
    }

    pub fn sample(&self, x_tilde: usize, rng: &mut RngStream) -> Result<usize> {
        Ok(self.conditional_row(x_tilde)?.sample(rng))
    }
}

/// Maximum-likelihood counting fit: `counts[x_tilde][x]` is the number of
/// occurrences of the pair. Smoothing by `alpha` happens at query time.
pub fn fit_multinomial(pairs: &[(usize, usize)], k: usize, alpha: f64) -> Result<MultinomialTable> {
    let mut table = MultinomialTable::new(k, alpha)?;
    for &(x, x_tilde) in pairs {
        table.add_pair(x, x_tilde)?;
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_counted_conditional() {
        // Pairs are (x, x_tilde).
        let t = fit_multinomial(&[(0, 1), (1, 1), (0, 1)], 2, 0.0).unwrap();
        let row = t.conditional_row(1).unwrap();
        assert!((row.get(0) - 2.0 / 3.0).abs() < 1e-15);
        assert!((t.log_prob(0, 1).unwrap() - (2.0f64 / 3.0).ln()).abs() < 1e-15);
    }

    #[test]
    fn smoothing_only_gives_uniform_rows() {
        let t = fit_multinomial(&[], 3, 0.1).unwrap();
        for xt in 0..3 {
            let row = t.conditional_row(xt).unwrap();
            for x in 0..3 {
                assert!((row.get(x) - 1.0 / 3.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn single_observation_is_a_point_mass() {
        let t = fit_multinomial(&[(2, 0)], 3, 0.0).unwrap();
        assert_eq!(t.conditional_row(0).unwrap().get(2), 1.0);
    }

    #[test]
    fn unsmoothed_unseen_row_is_an_ergodicity_error() {
        let t = fit_multinomial(&[(2, 0)], 3, 0.0).unwrap();
        assert!(matches!(t.conditional_row(1), Err(Error::Ergodicity(_))));
        assert!(matches!(t.log_prob(0, 1), Err(Error::Ergodicity(_))));
    }

    #[test]
    fn rows_normalize_with_smoothing() {
        let t = fit_multinomial(&[(0, 0), (1, 0), (1, 0), (2, 2)], 3, 0.25).unwrap();
        for xt in 0..3 {
            let total: f64 = (0..3).map(|x| t.log_prob(x, xt).unwrap().exp()).sum();
            assert!((total - 1.0).abs() < 1e-9, "row {xt}: {total}");
        }
    }

    #[test]
    fn out_of_range_pairs_are_rejected() {
        assert!(fit_multinomial(&[(3, 0)], 3, 0.0).is_err());
        assert!(fit_multinomial(&[(0, 5)], 3, 0.0).is_err());
    }

    #[test]
    fn degenerate_row_always_samples_its_mass() {
        let t = MultinomialTable::from_counts(
            vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0],
            3,
            0.0,
        )
        .unwrap();
        let mut rng = RngStream::new(1, 0);
        for _ in 0..20 {
            assert_eq!(t.sample(0, &mut rng).unwrap(), 0);
        }
    }
}
