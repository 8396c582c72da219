//! Training: minibatch SGD for the MLP family, one-shot fitting for the
//! non-parametric families, and walkback corruption rollouts.
//!
//! Walkback replaces the single corruption draw per training example with a
//! short excursion of the sampling chain itself: corrupt, maybe resample
//! from the current model, corrupt again, for a geometric number of rounds
//! (or a fixed count). Every visited corrupted sample is paired with the
//! original example as the reconstruction target, which teaches the model
//! to walk back toward the data from the places its own chain actually
//! visits.

use std::time::Instant;

use crate::corruption::CorruptionProcess;
use crate::data::Dataset;
use crate::distributions::{RngStream, Sample};
use crate::error::{Error, Result};
use crate::models::{
    fit_multinomial, BernoulliMlp, ConditionalModel, MlpGradient, ParzenConditional,
};

pub const STREAM_TRAIN: u64 = 3;
pub const STREAM_MLP_INIT: u64 = 4;
pub const STREAM_HOLDOUT: u64 = 5;
pub const STREAM_FIT: u64 = 6;
/// Every training example's corruption draws come from its own stream,
/// numbered upward from here in visit order.
pub const STREAM_PAIR_BASE: u64 = 1000;

/// Per-minibatch gradient work is split into this many chunks, summed in
/// chunk order. The count is fixed (not tied to the machine's core count)
/// so results are bit-identical no matter how many threads execute the
/// chunks.
const GRAD_CHUNKS: usize = 4;

/// Optimizer settings. The update is classical momentum:
/// `v <- momentum v - lr (grad + weight_decay theta)`, `theta <- theta + v`,
/// with the learning rate multiplied by `lr_decay` after each epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub minibatch: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub lr_decay: f64,
    pub weight_decay: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 10,
            minibatch: 32,
            learning_rate: 0.01,
            momentum: 0.9,
            lr_decay: 0.99,
            weight_decay: 0.0,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.minibatch == 0 {
            return Err(Error::InvalidParameter(
                "epochs and minibatch must be positive".to_string(),
            ));
        }
        if !(self.learning_rate >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "learning_rate must be non-negative, got {}",
                self.learning_rate
            )));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::InvalidParameter(format!(
                "momentum must lie in [0, 1), got {}",
                self.momentum
            )));
        }
        if !(self.lr_decay > 0.0 && self.lr_decay <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "lr_decay must lie in (0, 1], got {}",
                self.lr_decay
            )));
        }
        if !(self.weight_decay >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "weight_decay must be non-negative, got {}",
                self.weight_decay
            )));
        }
        Ok(())
    }
}

/// Walkback settings. With `fixed_steps` unset the excursion length is
/// geometric: after each corruption the walk continues with probability
/// `p`, capped at `max_steps`. With `fixed_steps = Some(k)` every rollout
/// produces exactly `k` corrupted samples.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkbackConfig {
    pub enabled: bool,
    pub p: f64,
    pub max_steps: usize,
    pub fixed_steps: Option<usize>,
}

impl Default for WalkbackConfig {
    fn default() -> Self {
        Self {
            enabled: false,
            p: 0.5,
            max_steps: 20,
            fixed_steps: None,
        }
    }
}

impl WalkbackConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "walkback p must lie in (0, 1), got {}",
                self.p
            )));
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidParameter(
                "walkback max_steps must be positive".to_string(),
            ));
        }
        if let Some(k) = self.fixed_steps {
            if k == 0 {
                return Err(Error::InvalidParameter(
                    "walkback fixed_steps must be positive".to_string(),
                ));
            }
        }
        Ok(())
    }
}

/// Per-epoch training record.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub train_nll: f64,
    pub valid_nll: Option<f64>,
    pub seconds: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingMetrics {
    pub epochs: Vec<EpochMetrics>,
}

/// Rollout core, generic over how the model resamples.
fn rollout_with<F>(
    corruption: &CorruptionProcess,
    mut resample: F,
    x: &Sample,
    wb: &WalkbackConfig,
    rng: &mut RngStream,
) -> Result<Vec<Sample>>
where
    F: FnMut(&Sample, &mut RngStream) -> Result<Sample>,
{
    wb.validate()?;
    let cap = match wb.fixed_steps {
        Some(k) => k.min(wb.max_steps),
        None => wb.max_steps,
    };
    let mut x_star = x.clone();
    let mut out = Vec::new();
    loop {
        let x_tilde = corruption.corrupt(&x_star, rng)?;
        out.push(x_tilde.clone());
        if out.len() >= cap {
            break;
        }
        if wb.fixed_steps.is_none() && !rng.next_bool(wb.p) {
            break;
        }
        x_star = resample(&x_tilde, rng)?;
    }
    Ok(out)
}

/// One walkback excursion from `x`: the list of corrupted samples visited.
///
/// Each round corrupts the current point and appends the result exactly
/// once; the walk then stops with probability `1 - p` (or at `max_steps`,
/// or after `fixed_steps` rounds), otherwise resamples the current point
/// from the model and continues. Every returned sample is meant to be
/// paired with the original `x` as its reconstruction target.
pub fn walkback_rollout(
    model: &ConditionalModel,
    corruption: &CorruptionProcess,
    x: &Sample,
    wb: &WalkbackConfig,
    rng: &mut RngStream,
) -> Result<Vec<Sample>> {
    rollout_with(corruption, |xt, rng| model.sample(xt, rng), x, wb, rng)
}

/// The training pairs one example contributes: `(target, corrupted)` with
/// the target always the original example. Resampling goes straight
/// through the MLP to avoid wrapping it per minibatch.
fn mlp_training_pairs(
    mlp: &BernoulliMlp,
    corruption: &CorruptionProcess,
    x: &Sample,
    wb: &WalkbackConfig,
    rng: &mut RngStream,
) -> Result<Vec<(Sample, Sample)>> {
    if wb.enabled {
        let rollout = rollout_with(
            corruption,
            |xt, rng| Ok(Sample::Binary(mlp.sample(xt.as_binary()?, rng)?)),
            x,
            wb,
            rng,
        )?;
        Ok(rollout.into_iter().map(|xt| (x.clone(), xt)).collect())
    } else {
        let xt = corruption.corrupt(x, rng)?;
        Ok(vec![(x.clone(), xt)])
    }
}

/// MLP architecture: visible dimension and hidden units.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MlpArch {
    pub d: usize,
    pub h: usize,
}

/// Train a Bernoulli MLP by minibatch SGD on the mean reconstruction
/// negative log-likelihood.
///
/// Plain mode draws one corrupted sample per example per epoch; walkback
/// mode replaces it with all samples from a rollout using the live model
/// (parameters update between minibatches, and rollouts inside a minibatch
/// read the parameters as of the minibatch start). Deterministic given the
/// config seed. An optional holdout set is scored each epoch against a
/// fixed set of corruptions drawn once up front.
pub fn train_dae(
    data: &Dataset,
    corruption: &CorruptionProcess,
    cfg: &TrainConfig,
    wb: &WalkbackConfig,
    arch: MlpArch,
    holdout: Option<&Dataset>,
) -> Result<(BernoulliMlp, TrainingMetrics)> {
    cfg.validate()?;
    wb.validate()?;
    if data.variant() != "binary" {
        return Err(Error::VariantMismatch {
            expected: "binary",
            got: data.variant(),
        });
    }
    if data.dim() != arch.d {
        return Err(Error::DimensionMismatch {
            expected: arch.d,
            got: data.dim(),
        });
    }

    let mut init_rng = RngStream::new(cfg.seed, STREAM_MLP_INIT);
    let mut mlp = BernoulliMlp::new(arch.d, arch.h, &mut init_rng)?;
    let mut velocity = MlpGradient::zeros(arch.d, arch.h);
    let mut train_rng = RngStream::new(cfg.seed, STREAM_TRAIN);

    // Fixed holdout corruptions so the validation NLL is comparable
    // across epochs.
    let holdout_pairs: Option<Vec<(Sample, Sample)>> = match holdout {
        Some(set) => {
            if set.dim() != arch.d {
                return Err(Error::DimensionMismatch {
                    expected: arch.d,
                    got: set.dim(),
                });
            }
            let mut rng = RngStream::new(cfg.seed, STREAM_HOLDOUT);
            let mut pairs = Vec::with_capacity(set.len());
            for x in set.samples() {
                pairs.push((x.clone(), corruption.corrupt(x, &mut rng)?));
            }
            Some(pairs)
        }
        None => None,
    };

    let mut metrics = TrainingMetrics::default();
    let mut indices: Vec<usize> = (0..data.len()).collect();
    let mut pair_stream_counter: u64 = 0;

    for epoch in 0..cfg.epochs {
        let start = Instant::now();
        let lr = cfg.learning_rate * cfg.lr_decay.powi(epoch as i32);
        train_rng.shuffle(&mut indices);

        let mut loss_sum = 0.0;
        let mut pair_count = 0usize;
        for batch in indices.chunks(cfg.minibatch) {
            let items: Vec<(usize, RngStream)> = batch
                .iter()
                .map(|&idx| {
                    let stream =
                        RngStream::new(cfg.seed, STREAM_PAIR_BASE + pair_stream_counter);
                    pair_stream_counter += 1;
                    (idx, stream)
                })
                .collect();
            let chunk_size = items.len().div_ceil(GRAD_CHUNKS);
            // Rollouts inside a batch read the parameters as of the batch
            // start; the update happens only after every chunk is reduced.
            let mlp_ref = &mlp;
            let chunk_results: Vec<Result<(MlpGradient, f64, usize)>> =
                std::thread::scope(|scope| {
                    let handles: Vec<_> = items
                        .chunks(chunk_size)
                        .map(|chunk| {
                            scope.spawn(move || {
                                let mut g = MlpGradient::zeros(arch.d, arch.h);
                                let mut chunk_pairs: Vec<(Sample, Sample)> = Vec::new();
                                for (idx, stream) in chunk {
                                    let mut rng = stream.clone();
                                    chunk_pairs.extend(mlp_training_pairs(
                                        mlp_ref,
                                        corruption,
                                        &data.samples()[*idx],
                                        wb,
                                        &mut rng,
                                    )?);
                                }
                                let refs: Vec<(&[u8], &[u8])> = chunk_pairs
                                    .iter()
                                    .map(|(x, xt)| Ok((x.as_binary()?, xt.as_binary()?)))
                                    .collect::<Result<_>>()?;
                                let loss = mlp_ref.accumulate_grad_batch(&refs, &mut g)?;
                                Ok((g, loss, chunk_pairs.len()))
                            })
                        })
                        .collect();
                    handles
                        .into_iter()
                        .map(|h| h.join().expect("gradient worker panicked"))
                        .collect()
                });

            let mut grad = MlpGradient::zeros(arch.d, arch.h);
            let mut batch_loss = 0.0;
            let mut batch_pairs = 0usize;
            for result in chunk_results {
                let (g, loss, count) = result?;
                grad.add(&g);
                batch_loss += loss;
                batch_pairs += count;
            }
            if !batch_loss.is_finite() {
                return Err(Error::NonFiniteLoss(format!(
                    "epoch {epoch}: minibatch loss is {batch_loss}"
                )));
            }
            grad.scale(1.0 / batch_pairs as f64);
            mlp.apply_update(&grad, &mut velocity, lr, cfg.momentum, cfg.weight_decay);
            loss_sum += batch_loss;
            pair_count += batch_pairs;
        }

        let valid_nll = match &holdout_pairs {
            Some(pairs) => {
                let mut total = 0.0;
                for (x, xt) in pairs {
                    total -= mlp.log_prob(x.as_binary()?, xt.as_binary()?)?;
                }
                Some(total / pairs.len() as f64)
            }
            None => None,
        };

        let train_nll = loss_sum / pair_count as f64;
        if !train_nll.is_finite() {
            return Err(Error::NonFiniteLoss(format!(
                "epoch {epoch}: mean training loss is {train_nll}"
            )));
        }
        metrics.epochs.push(EpochMetrics {
            epoch,
            train_nll,
            valid_nll,
            seconds: start.elapsed().as_secs_f64(),
        });
    }
    Ok((mlp, metrics))
}

/// Which non-parametric family to fit, with its hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub enum NonparametricFamily {
    Multinomial {
        k: usize,
        alpha: f64,
    },
    Parzen {
        sigma_x: Option<f64>,
        sigma_c: Option<f64>,
    },
}

/// One-shot fit: draw a single corrupted sample per example (seeded), then
/// count (multinomial) or store the pairs as mixture anchors (Parzen).
pub fn fit_nonparametric(
    data: &Dataset,
    corruption: &CorruptionProcess,
    family: &NonparametricFamily,
    seed: u64,
) -> Result<ConditionalModel> {
    let mut rng = RngStream::new(seed, STREAM_FIT);
    match family {
        NonparametricFamily::Multinomial { k, alpha } => {
            if data.variant() != "discrete" {
                return Err(Error::VariantMismatch {
                    expected: "discrete",
                    got: data.variant(),
                });
            }
            let mut pairs = Vec::with_capacity(data.len());
            for x in data.samples() {
                let xt = corruption.corrupt(x, &mut rng)?;
                pairs.push((x.as_discrete()?, xt.as_discrete()?));
            }
            Ok(ConditionalModel::Multinomial(fit_multinomial(
                &pairs, *k, *alpha,
            )?))
        }
        NonparametricFamily::Parzen { sigma_x, sigma_c } => {
            if data.variant() != "real" {
                return Err(Error::VariantMismatch {
                    expected: "real",
                    got: data.variant(),
                });
            }
            let mut pairs = Vec::with_capacity(data.len());
            for x in data.samples() {
                let xt = corruption.corrupt(x, &mut rng)?;
                pairs.push((x.as_real()?.to_vec(), xt.as_real()?.to_vec()));
            }
            Ok(ConditionalModel::Parzen(ParzenConditional::fit(
                &pairs, *sigma_x, *sigma_c,
            )?))
        }
    }
}
