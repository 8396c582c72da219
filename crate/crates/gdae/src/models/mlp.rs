//! Bernoulli-output MLP: tanh hidden layer, logistic output per bit.

use crate::distributions::{RngStream, Sample};
use crate::error::{Error, Result};

/// Logistic outputs are clamped into `[CLAMP, 1 - CLAMP]` before logs so
/// losses stay finite and every bit pattern keeps strictly positive mass.
pub const CLAMP: f64 = 1e-7;

/// One-hidden-layer network parameterizing a factorized Bernoulli
/// reconstruction: `hidden = tanh(W1 x~ + b1)`, `p = logistic(W2 hidden + b2)`,
/// `P(x | x~) = prod_j p_j^{x_j} (1 - p_j)^{1 - x_j}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BernoulliMlp {
    /// `h x d`, row-major.
    w1: Vec<f64>,
    b1: Vec<f64>,
    /// `d x h`, row-major.
    w2: Vec<f64>,
    b2: Vec<f64>,
    d: usize,
    h: usize,
}

/// Gradient of the negative log-likelihood, same shapes as the parameters.
#[derive(Debug, Clone)]
pub struct MlpGradient {
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
    pub d: usize,
    pub h: usize,
}

impl MlpGradient {
    pub fn zeros(d: usize, h: usize) -> Self {
        Self {
            w1: vec![0.0; h * d],
            b1: vec![0.0; h],
            w2: vec![0.0; d * h],
            b2: vec![0.0; d],
            d,
            h,
        }
    }

    pub fn scale(&mut self, s: f64) {
        for v in self
            .w1
            .iter_mut()
            .chain(&mut self.b1)
            .chain(&mut self.w2)
            .chain(&mut self.b2)
        {
            *v *= s;
        }
    }

    pub fn add(&mut self, other: &MlpGradient) {
        debug_assert_eq!((self.d, self.h), (other.d, other.h));
        for (a, b) in self.w1.iter_mut().zip(&other.w1) {
            *a += b;
        }
        for (a, b) in self.b1.iter_mut().zip(&other.b1) {
            *a += b;
        }
        for (a, b) in self.w2.iter_mut().zip(&other.w2) {
            *a += b;
        }
        for (a, b) in self.b2.iter_mut().zip(&other.b2) {
            *a += b;
        }
    }
}

fn logistic(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Dot product with four interleaved accumulators. The summation order is
/// fixed (lanes then combine), just not the naive left-to-right one.
fn dot4(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let chunks = a.len() / 4;
    let (mut s0, mut s1, mut s2, mut s3) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..chunks {
        let k = i * 4;
        s0 += a[k] * b[k];
        s1 += a[k + 1] * b[k + 1];
        s2 += a[k + 2] * b[k + 2];
        s3 += a[k + 3] * b[k + 3];
    }
    let mut tail = 0.0;
    for k in chunks * 4..a.len() {
        tail += a[k] * b[k];
    }
    (s0 + s1) + (s2 + s3) + tail
}

/// `row += s * other` over contiguous slices.
fn axpy(row: &mut [f64], s: f64, other: &[f64]) {
    for (r, &o) in row.iter_mut().zip(other) {
        *r += s * o;
    }
}

impl BernoulliMlp {
    /// Fresh network: weights uniform in `[-1/sqrt(fan_in), 1/sqrt(fan_in)]`,
    /// zero biases.
    pub fn new(d: usize, h: usize, rng: &mut RngStream) -> Result<Self> {
        if d == 0 || h == 0 {
            return Err(Error::InvalidParameter(format!(
                "mlp needs d >= 1 and h >= 1, got d={d} h={h}"
            )));
        }
        let lim1 = 1.0 / (d as f64).sqrt();
        let lim2 = 1.0 / (h as f64).sqrt();
        let w1 = (0..h * d)
            .map(|_| (2.0 * rng.next_f64() - 1.0) * lim1)
            .collect();
        let w2 = (0..d * h)
            .map(|_| (2.0 * rng.next_f64() - 1.0) * lim2)
            .collect();
        Ok(Self {
            w1,
            b1: vec![0.0; h],
            w2,
            b2: vec![0.0; d],
            d,
            h,
        })
    }

    pub fn zeros(d: usize, h: usize) -> Self {
        Self {
            w1: vec![0.0; h * d],
            b1: vec![0.0; h],
            w2: vec![0.0; d * h],
            b2: vec![0.0; d],
            d,
            h,
        }
    }

    pub fn from_parts(
        w1: Vec<f64>,
        b1: Vec<f64>,
        w2: Vec<f64>,
        b2: Vec<f64>,
        d: usize,
        h: usize,
    ) -> Result<Self> {
        if w1.len() != h * d || b1.len() != h || w2.len() != d * h || b2.len() != d {
            return Err(Error::Data(format!(
                "mlp parameter shapes do not match d={d} h={h}"
            )));
        }
        Ok(Self { w1, b1, w2, b2, d, h })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.d, self.h)
    }

    pub fn params(&self) -> (&[f64], &[f64], &[f64], &[f64]) {
        (&self.w1, &self.b1, &self.w2, &self.b2)
    }

    fn check_dim(&self, bits: &[u8]) -> Result<()> {
        if bits.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: bits.len(),
            });
        }
        Ok(())
    }

    /// Forward pass: returns `(hidden, probs)` with unclamped probabilities.
    pub fn forward(&self, x_tilde: &[u8]) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check_dim(x_tilde)?;
        let mut hidden = vec![0.0; self.h];
        for i in 0..self.h {
            let row = &self.w1[i * self.d..(i + 1) * self.d];
            let mut z = self.b1[i];
            for (w, &b) in row.iter().zip(x_tilde) {
                if b != 0 {
                    z += w;
                }
            }
            hidden[i] = z.tanh();
        }
        let mut probs = vec![0.0; self.d];
        for j in 0..self.d {
            let row = &self.w2[j * self.h..(j + 1) * self.h];
            let mut z = self.b2[j];
            for (w, hid) in row.iter().zip(&hidden) {
                z += w * hid;
            }
            probs[j] = logistic(z);
        }
        Ok((hidden, probs))
    }

    /// Clamp one output probability into `[CLAMP, 1 - CLAMP]`.
    pub fn clamp_prob(p: f64) -> f64 {
        p.clamp(CLAMP, 1.0 - CLAMP)
    }

    /// `log P(x | x_tilde)` with output clamping.
    pub fn log_prob(&self, x: &[u8], x_tilde: &[u8]) -> Result<f64> {
        self.check_dim(x)?;
        let (_, probs) = self.forward(x_tilde)?;
        let mut lp = 0.0;
        for (&p, &b) in probs.iter().zip(x) {
            let p = Self::clamp_prob(p);
            lp += if b != 0 { p.ln() } else { (1.0 - p).ln() };
        }
        Ok(lp)
    }

    /// Independent per-bit Bernoulli draw from the reconstruction.
    pub fn sample(&self, x_tilde: &[u8], rng: &mut RngStream) -> Result<Vec<u8>> {
        let (_, probs) = self.forward(x_tilde)?;
        Ok(probs.iter().map(|&p| u8::from(rng.next_bool(p))).collect())
    }

    /// Exact gradient of `-log P(x | x_tilde)` by backpropagation.
    pub fn grad(&self, x: &[u8], x_tilde: &[u8]) -> Result<MlpGradient> {
        let mut g = MlpGradient::zeros(self.d, self.h);
        self.accumulate_grad(x, x_tilde, &mut g)?;
        Ok(g)
    }

    /// Add the gradient for one `(x, x_tilde)` pair into `g`. Returns the
    /// pair's negative log-likelihood so training can account the loss with
    /// no extra forward pass.
    pub fn accumulate_grad(&self, x: &[u8], x_tilde: &[u8], g: &mut MlpGradient) -> Result<f64> {
        self.check_dim(x)?;
        let (hidden, probs) = self.forward(x_tilde)?;

        // Output layer: d(-log P)/dz2_j = p_j - x_j for the logistic
        // cross-entropy pairing.
        let mut delta2 = vec![0.0; self.d];
        let mut loss = 0.0;
        for j in 0..self.d {
            let target = f64::from(x[j]);
            delta2[j] = probs[j] - target;
            let p = probs[j].clamp(CLAMP, 1.0 - CLAMP);
            loss -= if x[j] != 0 { p.ln() } else { (1.0 - p).ln() };
        }

        for j in 0..self.d {
            let row = &mut g.w2[j * self.h..(j + 1) * self.h];
            let dj = delta2[j];
            for (gw, hid) in row.iter_mut().zip(&hidden) {
                *gw += dj * hid;
            }
            g.b2[j] += dj;
        }

        // Hidden layer: delta1 = (W2^T delta2) .* (1 - hidden^2).
        let mut delta1 = vec![0.0; self.h];
        for j in 0..self.d {
            let row = &self.w2[j * self.h..(j + 1) * self.h];
            let dj = delta2[j];
            for (d1, w) in delta1.iter_mut().zip(row) {
                *d1 += dj * w;
            }
        }
        for (d1, hid) in delta1.iter_mut().zip(&hidden) {
            *d1 *= 1.0 - hid * hid;
        }

        for i in 0..self.h {
            let row = &mut g.w1[i * self.d..(i + 1) * self.d];
            let di = delta1[i];
            for (gw, &b) in row.iter_mut().zip(x_tilde) {
                if b != 0 {
                    *gw += di;
                }
            }
            g.b1[i] += di;
        }

        Ok(loss)
    }

    /// Gradient of the summed negative log-likelihood over many pairs,
    /// computed batch-wise so each weight matrix is streamed once per call
    /// instead of once per pair. Returns the summed loss.
    ///
    /// The result matches the sum of per-pair [`Self::accumulate_grad`]
    /// calls up to floating-point reassociation (the reduction order is
    /// fixed, so repeated calls are bit-identical).
    pub fn accumulate_grad_batch(
        &self,
        pairs: &[(&[u8], &[u8])],
        g: &mut MlpGradient,
    ) -> Result<f64> {
        let n = pairs.len();
        if n == 0 {
            return Ok(0.0);
        }
        let (d, h) = (self.d, self.h);
        for (x, xt) in pairs {
            self.check_dim(x)?;
            self.check_dim(xt)?;
        }
        // Inputs as dense reals; adding the zero terms is exact.
        let mut xtf = vec![0.0; n * d];
        for (i, (_, xt)) in pairs.iter().enumerate() {
            for (v, &b) in xtf[i * d..(i + 1) * d].iter_mut().zip(*xt) {
                *v = f64::from(b);
            }
        }

        // hidden[i][j] = tanh(b1[j] + w1_j . xt_i)
        let mut hidden = vec![0.0; n * h];
        for j in 0..h {
            let row = &self.w1[j * d..(j + 1) * d];
            for i in 0..n {
                hidden[i * h + j] = (self.b1[j] + dot4(row, &xtf[i * d..(i + 1) * d])).tanh();
            }
        }

        // delta2[i][j] = p - x, and the per-pair loss.
        let mut delta2 = vec![0.0; n * d];
        let mut loss = 0.0;
        for j in 0..d {
            let row = &self.w2[j * h..(j + 1) * h];
            for (i, (x, _)) in pairs.iter().enumerate() {
                let p = logistic(self.b2[j] + dot4(row, &hidden[i * h..(i + 1) * h]));
                delta2[i * d + j] = p - f64::from(x[j]);
                let pc = Self::clamp_prob(p);
                loss -= if x[j] != 0 { pc.ln() } else { (1.0 - pc).ln() };
            }
        }

        // Output-layer gradients; w2 and its gradient stream once.
        for j in 0..d {
            let grow = &mut g.w2[j * h..(j + 1) * h];
            for i in 0..n {
                let dj = delta2[i * d + j];
                axpy(grow, dj, &hidden[i * h..(i + 1) * h]);
                g.b2[j] += dj;
            }
        }

        // delta1 = (delta2 W2) .* (1 - hidden^2)
        let mut delta1 = vec![0.0; n * h];
        for j in 0..d {
            let row = &self.w2[j * h..(j + 1) * h];
            for i in 0..n {
                axpy(&mut delta1[i * h..(i + 1) * h], delta2[i * d + j], row);
            }
        }
        for i in 0..n {
            for j in 0..h {
                let hv = hidden[i * h + j];
                delta1[i * h + j] *= 1.0 - hv * hv;
            }
        }

        for j in 0..h {
            let grow = &mut g.w1[j * d..(j + 1) * d];
            for i in 0..n {
                let dj = delta1[i * h + j];
                axpy(grow, dj, &xtf[i * d..(i + 1) * d]);
                g.b1[j] += dj;
            }
        }

        Ok(loss)
    }

    /// Momentum update: `v <- momentum v - lr (g + weight_decay theta)`,
    /// `theta <- theta + v`. `g` holds the (already averaged) gradient and
    /// `velocity` persists across calls.
    pub fn apply_update(
        &mut self,
        g: &MlpGradient,
        velocity: &mut MlpGradient,
        lr: f64,
        momentum: f64,
        weight_decay: f64,
    ) {
        fn update(
            theta: &mut [f64],
            grad: &[f64],
            vel: &mut [f64],
            lr: f64,
            momentum: f64,
            weight_decay: f64,
        ) {
            for ((t, &g), v) in theta.iter_mut().zip(grad).zip(vel) {
                *v = momentum * *v - lr * (g + weight_decay * *t);
                *t += *v;
            }
        }
        update(&mut self.w1, &g.w1, &mut velocity.w1, lr, momentum, weight_decay);
        update(&mut self.b1, &g.b1, &mut velocity.b1, lr, momentum, weight_decay);
        update(&mut self.w2, &g.w2, &mut velocity.w2, lr, momentum, weight_decay);
        update(&mut self.b2, &g.b2, &mut velocity.b2, lr, momentum, weight_decay);
    }
}

impl From<BernoulliMlp> for crate::models::ConditionalModel {
    fn from(m: BernoulliMlp) -> Self {
        crate::models::ConditionalModel::BernoulliMlp(m)
    }
}

/// Gradient of `-log P(x | x_tilde)`; the free-function spelling of
/// [`BernoulliMlp::grad`].
pub fn mlp_grad(m: &BernoulliMlp, x: &Sample, x_tilde: &Sample) -> Result<MlpGradient> {
    m.grad(x.as_binary()?, x_tilde.as_binary()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::RngStream;

    fn random_bits(d: usize, rng: &mut RngStream) -> Vec<u8> {
        (0..d).map(|_| u8::from(rng.next_bool(0.5))).collect()
    }

    #[test]
    fn zero_weights_give_fair_coins() {
        let m = BernoulliMlp::zeros(3, 2);
        let lp = m.log_prob(&[1, 0, 1], &[0, 1, 1]).unwrap();
        assert!((lp - 3.0 * 0.5f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn zero_weight_sampling_is_unbiased() {
        let m = BernoulliMlp::zeros(3, 4);
        let mut rng = RngStream::new(2, 0);
        let n = 100_000usize;
        let mut ones = [0usize; 3];
        for _ in 0..n {
            let s = m.sample(&[0, 0, 0], &mut rng).unwrap();
            for (j, &b) in s.iter().enumerate() {
                ones[j] += b as usize;
            }
        }
        for (j, &c) in ones.iter().enumerate() {
            let freq = c as f64 / n as f64;
            assert!((0.49..=0.51).contains(&freq), "bit {j}: freq {freq}");
        }
    }

    #[test]
    fn output_bias_gradient_at_zero_weights() {
        let m = BernoulliMlp::zeros(2, 1);
        let g = m.grad(&[1, 1], &[1, 1]).unwrap();
        assert!((g.b2[0] + 0.5).abs() < 1e-15);
        assert!((g.b2[1] + 0.5).abs() < 1e-15);
    }

    #[test]
    fn perfect_reconstruction_has_zero_output_gradient() {
        // Drive outputs to (almost) the targets with huge biases; the
        // output-layer gradient contribution p - x then vanishes.
        let mut m = BernoulliMlp::zeros(2, 1);
        m.b2 = vec![40.0, -40.0];
        let g = m.grad(&[1, 0], &[0, 0]).unwrap();
        assert!(g.b2[0].abs() < 1e-12);
        assert!(g.b2[1].abs() < 1e-12);
        for w in &g.w2 {
            assert!(w.abs() < 1e-12);
        }
    }

    #[test]
    fn gradient_matches_central_finite_differences() {
        // 10 random (weights, x, x~) instances at d,h <= 8; compare full
        // gradient vectors in relative l2 error.
        let mut rng = RngStream::new(33, 0);
        for trial in 0..10 {
            let d = 2 + (trial % 7);
            let h = 1 + (trial % 8);
            let mut m = BernoulliMlp::new(d, h, &mut rng).unwrap();
            // Nudge biases off zero so no coordinate is trivially stationary.
            for b in m.b1.iter_mut().chain(m.b2.iter_mut()) {
                *b = 0.3 * (2.0 * rng.next_f64() - 1.0);
            }
            let x = random_bits(d, &mut rng);
            let xt = random_bits(d, &mut rng);
            let analytic = m.grad(&x, &xt).unwrap();

            let step = 1e-5;
            let mut numeric = MlpGradient::zeros(d, h);
            let probe = |write: &mut dyn FnMut(&mut BernoulliMlp, f64)| -> f64 {
                let mut plus = m.clone();
                write(&mut plus, step);
                let mut minus = m.clone();
                write(&mut minus, -step);
                (-plus.log_prob(&x, &xt).unwrap() + minus.log_prob(&x, &xt).unwrap())
                    / (2.0 * step)
            };
            for i in 0..h * d {
                numeric.w1[i] = probe(&mut |mm, e| mm.w1[i] += e);
            }
            for i in 0..h {
                numeric.b1[i] = probe(&mut |mm, e| mm.b1[i] += e);
            }
            for i in 0..d * h {
                numeric.w2[i] = probe(&mut |mm, e| mm.w2[i] += e);
            }
            for i in 0..d {
                numeric.b2[i] = probe(&mut |mm, e| mm.b2[i] += e);
            }

            let flat = |g: &MlpGradient| -> Vec<f64> {
                g.w1.iter()
                    .chain(&g.b1)
                    .chain(&g.w2)
                    .chain(&g.b2)
                    .cloned()
                    .collect()
            };
            let a = flat(&analytic);
            let n = flat(&numeric);
            let diff: f64 = a
                .iter()
                .zip(&n)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt();
            let scale = a
                .iter()
                .map(|v| v * v)
                .sum::<f64>()
                .sqrt()
                .max(n.iter().map(|v| v * v).sum::<f64>().sqrt())
                .max(1e-12);
            assert!(
                diff / scale <= 1e-4,
                "trial {trial}: relative error {}",
                diff / scale
            );
        }
    }

    #[test]
    fn batch_gradient_matches_per_pair_sum() {
        let mut rng = RngStream::new(40, 0);
        let (d, h) = (17, 9);
        let m = BernoulliMlp::new(d, h, &mut rng).unwrap();
        let pairs: Vec<(Vec<u8>, Vec<u8>)> = (0..13)
            .map(|_| (random_bits(d, &mut rng), random_bits(d, &mut rng)))
            .collect();

        let mut sum = MlpGradient::zeros(d, h);
        let mut loss_sum = 0.0;
        for (x, xt) in &pairs {
            loss_sum += m.accumulate_grad(x, xt, &mut sum).unwrap();
        }
        let mut batch = MlpGradient::zeros(d, h);
        let refs: Vec<(&[u8], &[u8])> = pairs
            .iter()
            .map(|(x, xt)| (x.as_slice(), xt.as_slice()))
            .collect();
        let loss_batch = m.accumulate_grad_batch(&refs, &mut batch).unwrap();

        assert!((loss_sum - loss_batch).abs() / loss_sum.abs() < 1e-12);
        let check = |a: &[f64], b: &[f64]| {
            for (x, y) in a.iter().zip(b) {
                let scale = x.abs().max(y.abs()).max(1e-9);
                assert!((x - y).abs() / scale < 1e-9, "{x} vs {y}");
            }
        };
        check(&sum.w1, &batch.w1);
        check(&sum.b1, &batch.b1);
        check(&sum.w2, &batch.w2);
        check(&sum.b2, &batch.b2);
    }

    #[test]
    fn normalization_by_enumeration() {
        let mut rng = RngStream::new(12, 0);
        let d = 6;
        let m = BernoulliMlp::new(d, 3, &mut rng).unwrap();
        for xt_code in [0usize, 17, 63] {
            let xt: Vec<u8> = (0..d).map(|j| ((xt_code >> j) & 1) as u8).collect();
            let mut total = 0.0;
            for code in 0..(1usize << d) {
                let x: Vec<u8> = (0..d).map(|j| ((code >> j) & 1) as u8).collect();
                total += m.log_prob(&x, &xt).unwrap().exp();
            }
            assert!((total - 1.0).abs() < 1e-9, "xt {xt_code}: total {total}");
        }
    }

    #[test]
    fn log_prob_is_finite_even_at_extreme_outputs() {
        let mut m = BernoulliMlp::zeros(2, 1);
        m.b2 = vec![1000.0, -1000.0];
        let lp = m.log_prob(&[0, 1], &[0, 0]).unwrap();
        assert!(lp.is_finite());
        // Clamping caps the per-bit penalty near -ln(CLAMP).
        assert!(lp >= 2.0 * CLAMP.ln() - 1e-9);
    }
}
