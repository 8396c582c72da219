//! Finite-distribution arithmetic, seeded random streams, and divergence
//! metrics.
//!
//! Everything here is deterministic: [`RngStream`] is a counter-based
//! generator implemented in this file (no platform RNG), so any experiment
//! is replayable from its `(seed, stream)` pair alone.

use crate::error::{Error, Result};

/// Golden-ratio increment used by the SplitMix64 counter.
const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output mix (Steele, Lea & Flood).
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive an odd, bit-rich increment from a stream id so distinct streams
/// traverse distinct counter sequences.
#[inline]
fn mix_gamma(z: u64) -> u64 {
    let mut z = (z ^ (z >> 33)).wrapping_mul(0xFF51_AFD7_ED55_8CCD);
    z = (z ^ (z >> 33)).wrapping_mul(0xC4CE_B9FE_1A85_EC53);
    z = (z ^ (z >> 33)) | 1;
    if (z ^ (z >> 1)).count_ones() < 24 {
        z ^= 0xAAAA_AAAA_AAAA_AAAA;
    }
    z
}

/// Deterministic random stream: SplitMix64 with a per-stream increment.
///
/// The generator is fully specified here so sequences are bit-identical
/// across platforms. The same `(seed, stream)` always replays the same
/// sequence; distinct stream ids use distinct odd increments and are
/// statistically independent for practical purposes. A stream is
/// single-owner: clone-free mutation is the only way to draw from it.
#[derive(Debug, Clone)]
pub struct RngStream {
    state: u64,
    gamma: u64,
    seed: u64,
    stream: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self {
            state: mix64(seed.wrapping_add(GOLDEN_GAMMA.wrapping_mul(stream))),
            gamma: mix_gamma(stream.wrapping_add(GOLDEN_GAMMA)),
            seed,
            stream,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Next raw 64-bit draw.
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(self.gamma);
        mix64(self.state)
    }

    /// Uniform draw in `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform index in `[0, n)`.
    ///
    /// Uses the modulo reduction of a 64-bit draw; the bias is below
    /// `n / 2^64`, irrelevant for the state-space sizes used here.
    pub fn next_index(&mut self, n: usize) -> usize {
        assert!(n > 0, "next_index: n must be positive");
        (self.next_u64() % n as u64) as usize
    }

    /// Bernoulli draw with success probability `p`.
    pub fn next_bool(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }

    /// Standard normal draw via the Box-Muller transform (two uniforms per
    /// draw, no cached second value, so the consumption pattern is fixed).
    pub fn next_gaussian(&mut self) -> f64 {
        let u1 = 1.0 - self.next_f64(); // (0, 1]
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    /// In-place Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, xs: &mut [T]) {
        for i in (1..xs.len()).rev() {
            let j = self.next_index(i + 1);
            xs.swap(i, j);
        }
    }
}

/// Normalized probability vector over a finite state space.
///
/// Entries are non-negative and sum to 1 within 1e-9. Construction
/// renormalizes small float drift (up to 1e-6 deviation) and rejects
/// anything worse, so a failed construction indicates a logic bug rather
/// than accumulation error.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbVector {
    probs: Vec<f64>,
}

/// Deviation from unit mass that is silently renormalized.
pub const PROB_RENORM_TOL: f64 = 1e-6;
/// Post-construction normalization guarantee.
pub const PROB_SUM_TOL: f64 = 1e-9;

impl ProbVector {
    /// Build from entries that already sum to 1 up to [`PROB_RENORM_TOL`].
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::EmptyInput("probability vector"));
        }
        for (i, &p) in probs.iter().enumerate() {
            if !p.is_finite() || p < 0.0 {
                return Err(Error::InvalidProbability(format!(
                    "entry {i} is {p}, expected a non-negative finite value"
                )));
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > PROB_RENORM_TOL {
            return Err(Error::InvalidProbability(format!(
                "entries sum to {sum}, more than {PROB_RENORM_TOL} away from 1"
            )));
        }
        let mut probs = probs;
        // Entries already within the normalization guarantee are kept
        // bit-identical; only real drift gets renormalized.
        if (sum - 1.0).abs() > PROB_SUM_TOL {
            for p in &mut probs {
                *p /= sum;
            }
        }
        Ok(Self { probs })
    }

    /// Normalize arbitrary non-negative weights with positive total mass.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptyInput("weight vector"));
        }
        for (i, &w) in weights.iter().enumerate() {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidProbability(format!(
                    "weight {i} is {w}, expected a non-negative finite value"
                )));
            }
        }
        let sum: f64 = weights.iter().sum();
        if sum <= 0.0 {
            return Err(Error::InvalidProbability(
                "weights have zero total mass".to_string(),
            ));
        }
        Ok(Self {
            probs: weights.iter().map(|w| w / sum).collect(),
        })
    }

    pub fn uniform(k: usize) -> Self {
        assert!(k > 0, "uniform: k must be positive");
        Self {
            probs: vec![1.0 / k as f64; k],
        }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.probs[i]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.probs
    }

    /// Categorical draw: returns index `i` with probability `probs[i]`.
    pub fn sample(&self, rng: &mut RngStream) -> usize {
        let u = rng.next_f64();
        let mut cum = 0.0;
        for (i, &p) in self.probs.iter().enumerate() {
            cum += p;
            if u < cum {
                return i;
            }
        }
        self.probs.len() - 1
    }
}

/// Categorical draw from `p`; index `i` occurs with probability `p[i]`.
pub fn sample_categorical(p: &ProbVector, rng: &mut RngStream) -> usize {
    p.sample(rng)
}

/// Total variation distance `0.5 * sum |p_i - q_i|`, in `[0, 1]`.
pub fn total_variation(p: &ProbVector, q: &ProbVector) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch(p.len(), q.len()));
    }
    Ok(0.5
        * p.as_slice()
            .iter()
            .zip(q.as_slice())
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>())
}

/// `log sum exp(x_i)` computed against the running maximum, stable for
/// inputs up to around +-700 and tolerant of `-inf` entries.
pub fn log_sum_exp(xs: &[f64]) -> Result<f64> {
    if xs.is_empty() {
        return Err(Error::EmptyInput("log_sum_exp"));
    }
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    let sum: f64 = xs.iter().map(|&x| (x - m).exp()).sum();
    Ok(m + sum.ln())
}

/// A single observed or generated value.
///
/// The variant is fixed per experiment; mixing variants within one chain or
/// dataset is an error surfaced by the consuming operation.
#[derive(Debug, Clone, PartialEq)]
pub enum Sample {
    /// A state index in `[0, K)`.
    Discrete(usize),
    /// A bit vector; entries are 0 or 1.
    Binary(Vec<u8>),
    /// A real-valued vector.
    Real(Vec<f64>),
}

impl Sample {
    pub fn variant_name(&self) -> &'static str {
        match self {
            Sample::Discrete(_) => "discrete",
            Sample::Binary(_) => "binary",
            Sample::Real(_) => "real",
        }
    }

    /// Dimension: 1 for discrete scalars, length for vectors.
    pub fn dim(&self) -> usize {
        match self {
            Sample::Discrete(_) => 1,
            Sample::Binary(bits) => bits.len(),
            Sample::Real(xs) => xs.len(),
        }
    }

    pub fn as_discrete(&self) -> Result<usize> {
        match self {
            Sample::Discrete(s) => Ok(*s),
            other => Err(Error::VariantMismatch {
                expected: "discrete",
                got: other.variant_name(),
            }),
        }
    }

    pub fn as_binary(&self) -> Result<&[u8]> {
        match self {
            Sample::Binary(bits) => Ok(bits),
            other => Err(Error::VariantMismatch {
                expected: "binary",
                got: other.variant_name(),
            }),
        }
    }

    pub fn as_real(&self) -> Result<&[f64]> {
        match self {
            Sample::Real(xs) => Ok(xs),
            other => Err(Error::VariantMismatch {
                expected: "real",
                got: other.variant_name(),
            }),
        }
    }
}
