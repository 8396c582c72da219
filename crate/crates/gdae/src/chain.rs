//! The alternating sampling chain and its exact discrete oracle.
//!
//! Generation alternates `X_t ~ P(X | X~_{t-1})` and `X~_t ~ C(X~ | X_t)`.
//! The induced kernel on `X` marginalizes the corruption step:
//!
//! ```text
//! T(x_t | x_{t-1}) = sum_xt  P(x_t | x~) C(x~ | x_{t-1})
//! ```
//!
//! On a finite state space that sum is computable exactly, so the
//! stationary distribution of the chain can be found by power iteration
//! and compared against the data-generating distribution. When the model
//! is the exact Bayes conditional of `(P, C)`, the stationary distribution
//! is `P` itself; that identity is the oracle the acceptance suite leans
//! on.

use crate::corruption::CorruptionProcess;
use crate::distributions::{total_variation, ProbVector, RngStream, Sample};
use crate::error::{Error, Result};
use crate::models::{ConditionalModel, MultinomialTable};

/// Largest exactly-enumerable state space for the oracle.
pub const MAX_ORACLE_STATES: usize = 4096;

/// Power-iteration stop: total variation between successive iterates.
pub const POWER_ITER_TOL: f64 = 1e-13;
/// Residual the returned fixed point must satisfy: `TV(T pi, pi) <= this`.
pub const FIXED_POINT_TOL: f64 = 1e-10;
const POWER_ITER_CAP: usize = 1_000_000;

/// How a chain is run and which samples are retained.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainConfig {
    pub n_steps: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub init: Sample,
}

impl ChainConfig {
    pub fn new(n_steps: usize, burn_in: usize, thin: usize, init: Sample) -> Result<Self> {
        if n_steps == 0 {
            return Err(Error::InvalidParameter("n_steps must be positive".to_string()));
        }
        if burn_in >= n_steps {
            return Err(Error::InvalidParameter(format!(
                "burn_in {burn_in} must be below n_steps {n_steps}"
            )));
        }
        if thin == 0 {
            return Err(Error::InvalidParameter("thin must be positive".to_string()));
        }
        Ok(Self { n_steps, burn_in, thin, init })
    }

    /// Default retention: 10% burn-in, no thinning.
    pub fn with_default_burn_in(n_steps: usize, init: Sample) -> Result<Self> {
        Self::new(n_steps, n_steps / 10, 1, init)
    }
}

/// Retained `(X_t, X~_t)` pairs from one chain run.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainRun {
    pub xs: Vec<Sample>,
    pub x_tildes: Vec<Sample>,
    /// Original step index of each retained pair.
    pub steps: Vec<usize>,
    pub config: ChainConfig,
}

impl ChainRun {
    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }
}

/// One chain step from the previous corrupted sample.
pub fn chain_step(
    model: &ConditionalModel,
    corruption: &CorruptionProcess,
    x_tilde_prev: &Sample,
    rng: &mut RngStream,
) -> Result<(Sample, Sample)> {
    let x = model.sample(x_tilde_prev, rng)?;
    let x_tilde = corruption.corrupt(&x, rng)?;
    Ok((x, x_tilde))
}

/// Run the alternating chain from `config.init`, retaining the pairs at
/// step indices `>= burn_in` with stride `thin`. Deterministic given `rng`.
pub fn run_chain(
    model: &ConditionalModel,
    corruption: &CorruptionProcess,
    config: &ChainConfig,
    rng: &mut RngStream,
) -> Result<ChainRun> {
    let mut x_tilde = corruption.corrupt(&config.init, rng)?;
    let retained = (config.n_steps - config.burn_in).div_ceil(config.thin);
    let mut xs = Vec::with_capacity(retained);
    let mut x_tildes = Vec::with_capacity(retained);
    let mut steps = Vec::with_capacity(retained);
    for t in 0..config.n_steps {
        let (x, xt) = chain_step(model, corruption, &x_tilde, rng)?;
        if t >= config.burn_in && (t - config.burn_in) % config.thin == 0 {
            xs.push(x.clone());
            x_tildes.push(xt.clone());
            steps.push(t);
        }
        x_tilde = xt;
    }
    Ok(ChainRun {
        xs,
        x_tildes,
        steps,
        config: config.clone(),
    })
}

/// Exact one-step kernel on `X`, stored column-stochastic:
/// `get(next, prev) = P(X_t = next | X_{t-1} = prev)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    /// Flattened `K x K`, `t[next * k + prev]`.
    t: Vec<f64>,
    k: usize,
}

impl TransitionMatrix {
    /// Validates non-negativity and that every column sums to 1 within 1e-12.
    pub fn new(t: Vec<f64>, k: usize) -> Result<Self> {
        if t.len() != k * k {
            return Err(Error::LengthMismatch(t.len(), k * k));
        }
        for (i, &v) in t.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidProbability(format!(
                    "transition entry {i} is {v}"
                )));
            }
        }
        for prev in 0..k {
            let col: f64 = (0..k).map(|next| t[next * k + prev]).sum();
            if (col - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidProbability(format!(
                    "column {prev} sums to {col}"
                )));
            }
        }
        Ok(Self { t, k })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn get(&self, next: usize, prev: usize) -> f64 {
        self.t[next * self.k + prev]
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.t.iter().all(|&v| v > 0.0)
    }

    /// `T v` for a distribution column vector `v`.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.k];
        for next in 0..self.k {
            let row = &self.t[next * self.k..(next + 1) * self.k];
            out[next] = row.iter().zip(v).map(|(a, b)| a * b).sum();
        }
        out
    }
}

fn require_discrete_flip(corruption: &CorruptionProcess) -> Result<(usize, f64)> {
    match corruption {
        CorruptionProcess::DiscreteFlip { k, eps } => Ok((*k, *eps)),
        other => Err(Error::VariantMismatch {
            expected: "discrete",
            got: other.expected_variant(),
        }),
    }
}

/// Exact transition operator for a discrete model and flip corruption,
/// summed over all `k` corrupted values.
pub fn build_transition_matrix(
    model: &ConditionalModel,
    corruption: &CorruptionProcess,
    k: usize,
) -> Result<TransitionMatrix> {
    let (ck, _) = require_discrete_flip(corruption)?;
    if ck != k {
        return Err(Error::DimensionMismatch { expected: k, got: ck });
    }
    if k > MAX_ORACLE_STATES {
        return Err(Error::InvalidParameter(format!(
            "state space {k} exceeds the exact-oracle cap {MAX_ORACLE_STATES}"
        )));
    }
    let table = model.as_multinomial()?;
    if table.k() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            got: table.k(),
        });
    }

    // model_probs[xt][x] = P(x | xt); corr[xt][prev] = C(xt | prev)
    let mut model_probs = Vec::with_capacity(k);
    for xt in 0..k {
        model_probs.push(table.conditional_row(xt)?);
    }
    let mut t = vec![0.0; k * k];
    for prev in 0..k {
        for xt in 0..k {
            let c = corruption
                .log_density(&Sample::Discrete(xt), &Sample::Discrete(prev))?
                .exp();
            if c == 0.0 {
                continue;
            }
            let row = model_probs[xt].as_slice();
            for next in 0..k {
                t[next * k + prev] += row[next] * c;
            }
        }
    }
    TransitionMatrix::new(t, k)
}

/// Exact transition operator over all `2^d` bit patterns for a binary
/// model under salt-and-pepper corruption. States are enumerated as
/// integers with bit `j` holding coordinate `j`.
pub fn build_transition_matrix_binary(
    model: &ConditionalModel,
    corruption: &CorruptionProcess,
    d: usize,
) -> Result<TransitionMatrix> {
    match corruption {
        CorruptionProcess::SaltPepper { d: cd, .. } if *cd == d => {}
        CorruptionProcess::SaltPepper { d: cd, .. } => {
            return Err(Error::DimensionMismatch { expected: d, got: *cd })
        }
        other => {
            return Err(Error::VariantMismatch {
                expected: "binary",
                got: other.expected_variant(),
            })
        }
    }
    let k = 1usize
        .checked_shl(d as u32)
        .filter(|&k| k <= MAX_ORACLE_STATES)
        .ok_or_else(|| {
            Error::InvalidParameter(format!(
                "2^{d} states exceed the exact-oracle cap {MAX_ORACLE_STATES}"
            ))
        })?;

    let decode = |code: usize| -> Sample {
        Sample::Binary((0..d).map(|j| ((code >> j) & 1) as u8).collect())
    };
    let states: Vec<Sample> = (0..k).map(decode).collect();

    // model_probs[xt][x] and corr[xt][prev], then one exact matrix product.
    let mut model_probs = vec![0.0; k * k];
    let mut corr = vec![0.0; k * k];
    for xt in 0..k {
        for x in 0..k {
            model_probs[xt * k + x] = model.log_prob(&states[x], &states[xt])?.exp();
            corr[xt * k + x] = corruption.log_density(&states[xt], &states[x])?.exp();
        }
    }
    let mut t = vec![0.0; k * k];
    for prev in 0..k {
        for xt in 0..k {
            let c = corr[xt * k + prev];
            if c == 0.0 {
                continue;
            }
            for next in 0..k {
                t[next * k + prev] += model_probs[xt * k + next] * c;
            }
        }
    }
    TransitionMatrix::new(t, k)
}

/// Stationary distribution by power iteration from the uniform vector.
///
/// Requires a strictly positive matrix (the ergodic case); iterates until
/// successive iterates are within [`POWER_ITER_TOL`] in total variation and
/// verifies the returned point satisfies `TV(T pi, pi) <= `[`FIXED_POINT_TOL`].
pub fn stationary_distribution(t: &TransitionMatrix) -> Result<ProbVector> {
    if !t.is_strictly_positive() {
        return Err(Error::Ergodicity(
            "transition matrix has zero entries; the chain is not ergodic".to_string(),
        ));
    }
    let mut pi = ProbVector::uniform(t.k());
    for _ in 0..POWER_ITER_CAP {
        let next = ProbVector::from_weights(&t.apply(pi.as_slice()))?;
        let delta = total_variation(&next, &pi)?;
        pi = next;
        if delta < POWER_ITER_TOL {
            let residual = total_variation(&ProbVector::from_weights(&t.apply(pi.as_slice()))?, &pi)?;
            if residual > FIXED_POINT_TOL {
                return Err(Error::NonConvergence(POWER_ITER_CAP));
            }
            return Ok(pi);
        }
    }
    Err(Error::NonConvergence(POWER_ITER_CAP))
}

/// The exact Bayes conditional of the joint `P(x) C(x~ | x)`, expressed as
/// an unsmoothed table with `counts[x~][x] = P(x) C(x~ | x)`. Row
/// normalization at query time recovers `P(x | x~)`.
pub fn build_true_conditional(
    p: &ProbVector,
    corruption: &CorruptionProcess,
) -> Result<MultinomialTable> {
    let (k, _) = require_discrete_flip(corruption)?;
    if p.len() != k {
        return Err(Error::DimensionMismatch { expected: k, got: p.len() });
    }
    for x in 0..k {
        if p.get(x) <= 0.0 {
            return Err(Error::Ergodicity(format!(
                "state {x} has zero probability; the exact conditional is undefined there"
            )));
        }
    }
    let mut counts = vec![0.0; k * k];
    for xt in 0..k {
        for x in 0..k {
            counts[xt * k + x] = p.get(x)
                * corruption
                    .log_density(&Sample::Discrete(xt), &Sample::Discrete(x))?
                    .exp();
        }
    }
    MultinomialTable::from_counts(counts, k, 0.0)
}

/// Positivity audit of a discrete model/corruption pairing.
///
/// Lists every zero entry of the model conditional, the corruption kernel,
/// and the induced transition operator. Report-only: degenerate inputs
/// produce a populated report, never an error.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ErgodicityReport {
    /// `(x_tilde, x)` pairs with `P(x | x_tilde) = 0` (or an undefined row).
    pub model_zeros: Vec<(usize, usize)>,
    /// `(x, x_tilde)` pairs with `C(x_tilde | x) = 0`.
    pub corruption_zeros: Vec<(usize, usize)>,
    /// `(next, prev)` pairs with `T(next | prev) = 0`.
    pub transition_zeros: Vec<(usize, usize)>,
}

impl ErgodicityReport {
    pub fn is_ergodic(&self) -> bool {
        self.model_zeros.is_empty()
            && self.corruption_zeros.is_empty()
            && self.transition_zeros.is_empty()
    }
}

impl std::fmt::Display for ErgodicityReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_ergodic() {
            return write!(f, "ergodic: all model, corruption, and transition entries are positive");
        }
        writeln!(f, "ergodicity violations:")?;
        for (xt, x) in &self.model_zeros {
            writeln!(f, "  model P(x={x} | x_tilde={xt}) = 0")?;
        }
        for (x, xt) in &self.corruption_zeros {
            writeln!(f, "  corruption C(x_tilde={xt} | x={x}) = 0")?;
        }
        for (next, prev) in &self.transition_zeros {
            writeln!(f, "  transition T({next} | {prev}) = 0")?;
        }
        Ok(())
    }
}

/// Audit strict positivity of all model rows, corruption entries, and
/// transition entries for a discrete pairing.
pub fn check_ergodicity(
    model: &ConditionalModel,
    corruption: &CorruptionProcess,
    k: usize,
) -> Result<ErgodicityReport> {
    let (ck, _) = require_discrete_flip(corruption)?;
    if ck != k {
        return Err(Error::DimensionMismatch { expected: k, got: ck });
    }
    let table = model.as_multinomial()?;
    if table.k() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            got: table.k(),
        });
    }

    let mut report = ErgodicityReport::default();

    // Model rows; an undefined (massless) row counts as all-zero.
    let mut model_probs = vec![0.0; k * k];
    for xt in 0..k {
        match table.conditional_row(xt) {
            Ok(row) => {
                for x in 0..k {
                    model_probs[xt * k + x] = row.get(x);
                    if row.get(x) <= 0.0 {
                        report.model_zeros.push((xt, x));
                    }
                }
            }
            Err(_) => {
                for x in 0..k {
                    report.model_zeros.push((xt, x));
                }
            }
        }
    }

    let mut corr = vec![0.0; k * k];
    for x in 0..k {
        for xt in 0..k {
            let c = corruption
                .log_density(&Sample::Discrete(xt), &Sample::Discrete(x))?
                .exp();
            corr[xt * k + x] = c;
            if c <= 0.0 {
                report.corruption_zeros.push((x, xt));
            }
        }
    }

    for prev in 0..k {
        for next in 0..k {
            let mut t = 0.0;
            for xt in 0..k {
                t += model_probs[xt * k + next] * corr[xt * k + prev];
            }
            if t <= 0.0 {
                report.transition_zeros.push((next, prev));
            }
        }
    }

    Ok(report)
}
