//! Conditional Parzen mixture for real-valued data.

use crate::distributions::{log_sum_exp, RngStream};
use crate::error::{Error, Result};

const LN_2PI: f64 = 1.8378770664093453;

/// Non-parametric conditional built from training pairs `(x_i, x~_i)`:
///
/// `P(x | x~) = sum_i w_i(x~) N(x; x_i, sigma_x^2 I)` with mixture weights
/// `w_i(x~) proportional to exp(-||x~ - x~_i||^2 / (2 sigma_c^2))`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParzenConditional {
    anchors_x: Vec<Vec<f64>>,
    anchors_xt: Vec<Vec<f64>>,
    sigma_x: f64,
    sigma_c: f64,
    dim: usize,
}

impl ParzenConditional {
    pub fn new(
        anchors_x: Vec<Vec<f64>>,
        anchors_xt: Vec<Vec<f64>>,
        sigma_x: f64,
        sigma_c: f64,
    ) -> Result<Self> {
        if anchors_x.is_empty() {
            return Err(Error::EmptyInput("parzen anchors"));
        }
        if anchors_x.len() != anchors_xt.len() {
            return Err(Error::LengthMismatch(anchors_x.len(), anchors_xt.len()));
        }
        if !(sigma_x > 0.0) || !(sigma_c > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "parzen bandwidths must be positive, got sigma_x={sigma_x} sigma_c={sigma_c}"
            )));
        }
        let dim = anchors_x[0].len();
        if dim == 0 {
            return Err(Error::EmptyInput("parzen anchor dimension"));
        }
        for (i, (x, xt)) in anchors_x.iter().zip(&anchors_xt).enumerate() {
            if x.len() != dim || xt.len() != dim {
                return Err(Error::Data(format!(
                    "anchor {i} has dimension {}/{} but expected {dim}",
                    x.len(),
                    xt.len()
                )));
            }
        }
        Ok(Self {
            anchors_x,
            anchors_xt,
            sigma_x,
            sigma_c,
            dim,
        })
    }

    /// Build from pairs with the median-distance bandwidth defaults:
    /// `sigma_c` is the median pairwise distance among the corrupted
    /// anchors and `sigma_x = 0.5 * sigma_c`. Either can be overridden.
    pub fn fit(
        pairs: &[(Vec<f64>, Vec<f64>)],
        sigma_x: Option<f64>,
        sigma_c: Option<f64>,
    ) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::EmptyInput("parzen training pairs"));
        }
        let anchors_x: Vec<Vec<f64>> = pairs.iter().map(|(x, _)| x.clone()).collect();
        let anchors_xt: Vec<Vec<f64>> = pairs.iter().map(|(_, xt)| xt.clone()).collect();
        let sigma_c = match sigma_c {
            Some(s) => s,
            None => {
                let med = median_pairwise_distance(&anchors_xt)?;
                if med <= 0.0 {
                    return Err(Error::InvalidParameter(
                        "median anchor distance is zero; pass bandwidths explicitly".to_string(),
                    ));
                }
                med
            }
        };
        let sigma_x = sigma_x.unwrap_or(0.5 * sigma_c);
        Self::new(anchors_x, anchors_xt, sigma_x, sigma_c)
    }

    pub fn len(&self) -> usize {
        self.anchors_x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.anchors_x.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sigma_x(&self) -> f64 {
        self.sigma_x
    }

    pub fn sigma_c(&self) -> f64 {
        self.sigma_c
    }

    pub fn anchors(&self) -> impl Iterator<Item = (&[f64], &[f64])> {
        self.anchors_x
            .iter()
            .zip(&self.anchors_xt)
            .map(|(x, xt)| (x.as_slice(), xt.as_slice()))
    }

    fn check_dim(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: v.len(),
            });
        }
        Ok(())
    }

    /// Normalized log mixture weights `log w_i(x_tilde)`.
    fn log_weights(&self, x_tilde: &[f64]) -> Vec<f64> {
        let inv = 1.0 / (2.0 * self.sigma_c * self.sigma_c);
        let mut lw: Vec<f64> = self
            .anchors_xt
            .iter()
            .map(|a| -sq_dist(a, x_tilde) * inv)
            .collect();
        let norm = log_sum_exp(&lw).expect("at least one anchor");
        for w in &mut lw {
            *w -= norm;
        }
        lw
    }

    pub fn log_prob(&self, x: &[f64], x_tilde: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        self.check_dim(x_tilde)?;
        let lw = self.log_weights(x_tilde);
        let var = self.sigma_x * self.sigma_x;
        let log_norm = -0.5 * self.dim as f64 * (LN_2PI + var.ln());
        let terms: Vec<f64> = self
            .anchors_x
            .iter()
            .zip(&lw)
            .map(|(a, w)| w + log_norm - sq_dist(a, x) / (2.0 * var))
            .collect();
        log_sum_exp(&terms)
    }

    /// Mixture draw: pick a component by its weight, then add isotropic
    /// Gaussian noise of scale `sigma_x` around its x anchor.
    pub fn sample(&self, x_tilde: &[f64], rng: &mut RngStream) -> Result<Vec<f64>> {
        self.check_dim(x_tilde)?;
        let lw = self.log_weights(x_tilde);
        let u = rng.next_f64();
        let mut cum = 0.0;
        let mut idx = lw.len() - 1;
        for (i, w) in lw.iter().enumerate() {
            cum += w.exp();
            if u < cum {
                idx = i;
                break;
            }
        }
        Ok(self.anchors_x[idx]
            .iter()
            .map(|&m| m + self.sigma_x * rng.next_gaussian())
            .collect())
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum()
}

/// Median of all pairwise Euclidean distances.
fn median_pairwise_distance(points: &[Vec<f64>]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::InvalidParameter(
            "median bandwidth needs at least two anchors".to_string(),
        ));
    }
    let mut dists = Vec::with_capacity(points.len() * (points.len() - 1) / 2);
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            dists.push(sq_dist(&points[i], &points[j]).sqrt());
        }
    }
    dists.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = dists.len();
    Ok(if n % 2 == 1 {
        dists[n / 2]
    } else {
        0.5 * (dists[n / 2 - 1] + dists[n / 2])
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_anchor_ignores_conditioning() {
        let p = ParzenConditional::new(
            vec![vec![0.5, -0.25]],
            vec![vec![10.0, 10.0]],
            0.8,
            1.0,
        )
        .unwrap();
        let x = [0.1, 0.2];
        let lp_far = p.log_prob(&x, &[100.0, -40.0]).unwrap();
        let lp_near = p.log_prob(&x, &[0.0, 0.0]).unwrap();
        assert!((lp_far - lp_near).abs() < 1e-12);

        // And it equals the plain Gaussian log-density around the anchor.
        let var: f64 = 0.8 * 0.8;
        let expected = -0.5 * 2.0 * (LN_2PI + var.ln())
            - ((0.1f64 - 0.5).powi(2) + (0.2f64 + 0.25).powi(2)) / (2.0 * var);
        assert!((lp_far - expected).abs() < 1e-12);
    }

    #[test]
    fn vanishing_bandwidth_concentrates_samples() {
        let p = ParzenConditional::new(vec![vec![1.5, -2.0]], vec![vec![0.0, 0.0]], 1e-8, 1.0)
            .unwrap();
        let mut rng = RngStream::new(6, 0);
        let s = p.sample(&[3.0, 3.0], &mut rng).unwrap();
        assert!((s[0] - 1.5).abs() < 1e-6);
        assert!((s[1] + 2.0).abs() < 1e-6);
    }

    #[test]
    fn weights_follow_conditioning_distance() {
        let p = ParzenConditional::new(
            vec![vec![0.0], vec![5.0]],
            vec![vec![0.0], vec![5.0]],
            0.5,
            0.5,
        )
        .unwrap();
        // Conditioning right on the first anchor: its weight dominates, so
        // samples cluster near its x anchor.
        let mut rng = RngStream::new(8, 1);
        let mut near_first = 0;
        for _ in 0..200 {
            let s = p.sample(&[0.0], &mut rng).unwrap();
            if s[0].abs() < 2.5 {
                near_first += 1;
            }
        }
        assert!(near_first >= 199, "near_first {near_first}");
    }

    #[test]
    fn median_bandwidth_default() {
        let pairs = vec![
            (vec![0.0], vec![0.0]),
            (vec![1.0], vec![1.0]),
            (vec![2.0], vec![2.0]),
        ];
        let p = ParzenConditional::fit(&pairs, None, None).unwrap();
        // Pairwise distances among x~ anchors: 1, 1, 2 -> median 1.
        assert!((p.sigma_c() - 1.0).abs() < 1e-15);
        assert!((p.sigma_x() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn identical_anchors_without_bandwidths_is_an_error() {
        let pairs = vec![(vec![0.0], vec![1.0]), (vec![0.0], vec![1.0])];
        assert!(ParzenConditional::fit(&pairs, None, None).is_err());
        assert!(ParzenConditional::fit(&pairs, Some(0.5), Some(0.5)).is_ok());
    }

    #[test]
    fn density_integrates_to_one_in_1d() {
        let p = ParzenConditional::new(
            vec![vec![-1.0], vec![2.0]],
            vec![vec![-1.0], vec![2.0]],
            0.6,
            1.0,
        )
        .unwrap();
        let (lo, hi) = (-9.0, 10.0);
        let n = 4000;
        let h = (hi - lo) / n as f64;
        let f = |t: f64| p.log_prob(&[t], &[0.5]).unwrap().exp();
        let mut integral = f(lo) + f(hi);
        for i in 1..n {
            integral += if i % 2 == 1 { 4.0 } else { 2.0 } * f(lo + i as f64 * h);
        }
        integral *= h / 3.0;
        assert!((integral - 1.0).abs() < 1e-6, "integral {integral}");
    }
}
