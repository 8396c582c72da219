//! Quantitative evaluation: the chain-based log-likelihood lower bound,
//! anchored relative energies, and histogram comparisons.

use crate::chain::ChainRun;
use crate::corruption::CorruptionProcess;
use crate::data::Dataset;
use crate::distributions::{log_sum_exp, total_variation, ProbVector, Sample};
use crate::error::{Error, Result};
use crate::models::ConditionalModel;

/// Mean non-parametric log-likelihood bound over a test set, in nats per
/// example.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundEstimate {
    pub mean_log_lik: f64,
    pub n_test: usize,
    pub n_chain_samples: usize,
}

/// Conservative density estimate from a generated chain: for each test `x`,
/// `log mean_t P(x | x~_t)` over the chain's corrupted-side samples, then
/// averaged over the test set.
///
/// The per-example mixture is summed in sorted order, so the estimate is
/// exactly invariant to permutations of the chain samples. It is a log of a
/// mean of probabilities, never a mean of logs.
pub fn loglik_bound(
    model: &ConditionalModel,
    chain: &ChainRun,
    test: &Dataset,
) -> Result<BoundEstimate> {
    if chain.x_tildes.is_empty() {
        return Err(Error::EmptyInput("chain corrupted-side samples"));
    }
    let m = chain.x_tildes.len();
    let log_m = (m as f64).ln();

    // The MLP forward pass depends only on the chain sample, so its
    // per-bit log tables are computed once per chain sample instead of
    // once per (test, chain) pair. Same arithmetic, same order.
    let mlp_tables: Option<Vec<(Vec<f64>, Vec<f64>)>> = match model {
        ConditionalModel::BernoulliMlp(mlp) => {
            let mut tables = Vec::with_capacity(m);
            for xt in &chain.x_tildes {
                let (_, probs) = mlp.forward(xt.as_binary()?)?;
                let clamp = crate::models::BernoulliMlp::clamp_prob;
                let ones: Vec<f64> = probs.iter().map(|&p| clamp(p).ln()).collect();
                let zeros: Vec<f64> = probs.iter().map(|&p| (1.0 - clamp(p)).ln()).collect();
                tables.push((ones, zeros));
            }
            Some(tables)
        }
        _ => None,
    };

    let mut total = 0.0;
    for x in test.samples() {
        let mut terms = Vec::with_capacity(m);
        match &mlp_tables {
            Some(tables) => {
                let bits = x.as_binary()?;
                for (ones, zeros) in tables {
                    if bits.len() != ones.len() {
                        return Err(Error::DimensionMismatch {
                            expected: ones.len(),
                            got: bits.len(),
                        });
                    }
                    let mut lp = 0.0;
                    for (j, &b) in bits.iter().enumerate() {
                        lp += if b != 0 { ones[j] } else { zeros[j] };
                    }
                    terms.push(lp);
                }
            }
            None => {
                for xt in &chain.x_tildes {
                    terms.push(model.log_prob(x, xt)?);
                }
            }
        }
        terms.sort_by(|a, b| a.partial_cmp(b).expect("log-probs are never NaN"));
        total += log_sum_exp(&terms)? - log_m;
    }
    Ok(BoundEstimate {
        mean_log_lik: total / test.len() as f64,
        n_test: test.len(),
        n_chain_samples: m,
    })
}

/// Relative energy of `x` at a fixed anchor; only differences between
/// estimates sharing the same anchor are meaningful, and the estimate is
/// trustworthy mainly for `x` near the anchor.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyEstimate {
    pub x: Sample,
    pub anchor: Sample,
    pub energy: f64,
}

/// `energy(x) = -log P(x | anchor) + log C(anchor | x)`.
pub fn energy_estimate(
    model: &ConditionalModel,
    corruption: &CorruptionProcess,
    x: &Sample,
    anchor: &Sample,
) -> Result<EnergyEstimate> {
    let log_c = corruption.log_density(anchor, x)?;
    if log_c == f64::NEG_INFINITY {
        return Err(Error::InvalidParameter(
            "anchor is outside the corruption support of x".to_string(),
        ));
    }
    let energy = -model.log_prob(x, anchor)? + log_c;
    Ok(EnergyEstimate {
        x: x.clone(),
        anchor: anchor.clone(),
        energy,
    })
}

/// Total variation between the empirical histogram of discrete samples and
/// a reference distribution.
pub fn histogram_tv_discrete(samples: &[Sample], reference: &ProbVector) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("samples"));
    }
    let mut counts = vec![0.0; reference.len()];
    for s in samples {
        let v = s.as_discrete()?;
        if v >= reference.len() {
            return Err(Error::InvalidParameter(format!(
                "sample value {v} outside the reference support {}",
                reference.len()
            )));
        }
        counts[v] += 1.0;
    }
    total_variation(&ProbVector::from_weights(&counts)?, reference)
}

/// Binned total variation for one coordinate pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PairBinnedTv {
    pub i: usize,
    pub j: usize,
    pub tv: f64,
}

/// Per-coordinate-pair 2D binned total variation between real-valued
/// samples and a reference dataset.
///
/// Bin edges are equal-width over the reference min/max range of each
/// coordinate, expanded 5% on each side; sample points outside the range
/// are clamped into the edge bins so both histograms keep full mass.
pub fn histogram_tv_pairs(
    samples: &[Sample],
    reference: &Dataset,
    bins: usize,
) -> Result<Vec<PairBinnedTv>> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("samples"));
    }
    if bins < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 bins per axis, got {bins}"
        )));
    }
    let dim = reference.dim();
    let mut ranges = Vec::with_capacity(dim);
    for c in 0..dim {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for s in reference.samples() {
            let v = s.as_real()?[c];
            lo = lo.min(v);
            hi = hi.max(v);
        }
        let span = (hi - lo).max(1e-12);
        ranges.push((lo - 0.05 * span, hi + 0.05 * span));
    }
    let bin_of = |v: f64, range: (f64, f64)| -> usize {
        let t = (v - range.0) / (range.1 - range.0);
        ((t * bins as f64) as isize).clamp(0, bins as isize - 1) as usize
    };

    let mut out = Vec::with_capacity(dim * (dim - 1) / 2);
    for i in 0..dim {
        for j in (i + 1)..dim {
            let mut h_s = vec![0.0; bins * bins];
            let mut h_r = vec![0.0; bins * bins];
            for s in samples {
                let xs = s.as_real()?;
                if xs.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: xs.len(),
                    });
                }
                h_s[bin_of(xs[i], ranges[i]) * bins + bin_of(xs[j], ranges[j])] += 1.0;
            }
            for s in reference.samples() {
                let xs = s.as_real()?;
                h_r[bin_of(xs[i], ranges[i]) * bins + bin_of(xs[j], ranges[j])] += 1.0;
            }
            let ns = samples.len() as f64;
            let nr = reference.len() as f64;
            let tv = 0.5
                * h_s
                    .iter()
                    .zip(&h_r)
                    .map(|(a, b)| (a / ns - b / nr).abs())
                    .sum::<f64>();
            out.push(PairBinnedTv { i, j, tv });
        }
    }
    Ok(out)
}

/// Pearson chi-square statistic `sum (obs - exp)^2 / exp`.
pub fn chi_square_statistic(observed: &[f64], expected: &[f64]) -> Result<f64> {
    if observed.len() != expected.len() {
        return Err(Error::LengthMismatch(observed.len(), expected.len()));
    }
    if observed.is_empty() {
        return Err(Error::EmptyInput("chi-square bins"));
    }
    let mut stat = 0.0;
    for (i, (&o, &e)) in observed.iter().zip(expected).enumerate() {
        if e <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "expected count in bin {i} must be positive, got {e}"
            )));
        }
        stat += (o - e) * (o - e) / e;
    }
    Ok(stat)
}

/// Upper 1% critical value of the chi-square distribution via the
/// Wilson-Hilferty cube approximation (accurate to ~0.1 for df >= 3).
pub fn chi_square_critical_99(df: usize) -> f64 {
    // z quantile at 0.99.
    const Z99: f64 = 2.3263478740408408;
    let df = df as f64;
    let a = 2.0 / (9.0 * df);
    df * (1.0 - a + Z99 * a.sqrt()).powi(3)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{
        build_transition_matrix, build_true_conditional, run_chain, stationary_distribution,
        ChainConfig,
    };
    use crate::distributions::RngStream;
    use crate::models::{fit_multinomial, BernoulliMlp};

    fn exact_setup(k: usize) -> (ProbVector, CorruptionProcess, ConditionalModel) {
        let mut rng = RngStream::new(99, 0);
        let weights: Vec<f64> = (0..k).map(|_| 0.1 + rng.next_f64()).collect();
        let p = ProbVector::from_weights(&weights).unwrap();
        let c = CorruptionProcess::discrete_flip(k, 0.5).unwrap();
        let exact = build_true_conditional(&p, &c).unwrap();
        (p, c, ConditionalModel::Multinomial(exact))
    }

    fn discrete_chain(
        model: &ConditionalModel,
        c: &CorruptionProcess,
        n: usize,
        seed: u64,
    ) -> ChainRun {
        let mut rng = RngStream::new(seed, 1);
        let cfg = ChainConfig::new(n, 0, 1, Sample::Discrete(0)).unwrap();
        run_chain(model, c, &cfg, &mut rng).unwrap()
    }

    #[test]
    fn single_sample_bound_is_plain_mean() {
        let (_, c, model) = exact_setup(4);
        let mut run = discrete_chain(&model, &c, 1, 5);
        run.x_tildes = vec![Sample::Discrete(2)];
        let test = Dataset::new(
            vec![Sample::Discrete(0), Sample::Discrete(3)],
            "t",
            "test",
        )
        .unwrap();
        let bound = loglik_bound(&model, &run, &test).unwrap();
        let expect = 0.5
            * (model
                .log_prob(&Sample::Discrete(0), &Sample::Discrete(2))
                .unwrap()
                + model
                    .log_prob(&Sample::Discrete(3), &Sample::Discrete(2))
                    .unwrap());
        assert!((bound.mean_log_lik - expect).abs() < 1e-15);
    }

    #[test]
    fn constant_conditional_gives_d_log_half() {
        let d = 5;
        let model = ConditionalModel::BernoulliMlp(BernoulliMlp::zeros(d, 3));
        let c = CorruptionProcess::salt_pepper(d, 0.5).unwrap();
        let mut rng = RngStream::new(1, 0);
        let cfg = ChainConfig::new(20, 0, 1, Sample::Binary(vec![0; d])).unwrap();
        let run = run_chain(&model, &c, &cfg, &mut rng).unwrap();
        let test = Dataset::new(
            vec![Sample::Binary(vec![1, 0, 1, 1, 0])],
            "t",
            "test",
        )
        .unwrap();
        let bound = loglik_bound(&model, &run, &test).unwrap();
        assert!((bound.mean_log_lik - d as f64 * 0.5f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn exact_expectation_bound_matches_stationary_log_prob() {
        // With the exact conditional, weighting the per-anchor conditionals
        // by the exact corrupted-side marginal recovers the stationary
        // probability itself: the bound is tight at the exact expectation.
        let k = 10;
        let (p, c, model) = exact_setup(k);
        let t = build_transition_matrix(&model, &c, k).unwrap();
        let pi = stationary_distribution(&t).unwrap();

        // Corrupted-side marginal of the stationary chain.
        let mut pt = vec![0.0; k];
        for xt in 0..k {
            for x in 0..k {
                pt[xt] += c
                    .log_density(&Sample::Discrete(xt), &Sample::Discrete(x))
                    .unwrap()
                    .exp()
                    * pi.get(x);
            }
        }
        for x in 0..k {
            let mut phat = 0.0;
            for xt in 0..k {
                phat += pt[xt]
                    * model
                        .log_prob(&Sample::Discrete(x), &Sample::Discrete(xt))
                        .unwrap()
                        .exp();
            }
            let diff = phat.ln() - pi.get(x).ln();
            assert!(diff.abs() <= 1e-9, "state {x}: diff {diff}");
            // And the exact-conditional stationary point is the target.
            assert!((pi.get(x) - p.get(x)).abs() <= 1e-9);
        }
    }

    #[test]
    fn bound_is_permutation_invariant() {
        let (_, c, model) = exact_setup(6);
        let mut run = discrete_chain(&model, &c, 500, 8);
        let test = Dataset::new(vec![Sample::Discrete(1), Sample::Discrete(4)], "t", "test")
            .unwrap();
        let before = loglik_bound(&model, &run, &test).unwrap();
        // Reverse and interleave the chain samples.
        run.x_tildes.reverse();
        let mid = run.x_tildes.len() / 2;
        let (a, b) = run.x_tildes.split_at(mid);
        let mut shuffled: Vec<Sample> = Vec::new();
        for (x, y) in a.iter().zip(b.iter()) {
            shuffled.push(y.clone());
            shuffled.push(x.clone());
        }
        shuffled.extend(a.iter().skip(b.len()).cloned());
        run.x_tildes = shuffled;
        let after = loglik_bound(&model, &run, &test).unwrap();
        assert_eq!(before.mean_log_lik.to_bits(), after.mean_log_lik.to_bits());
    }

    #[test]
    fn more_chain_samples_raise_the_bound_on_average() {
        // Low corruption keeps the conditionals peaky, so a 100-sample
        // mixture underestimates noticeably more than a 10000-sample one.
        let k = 10;
        let mut setup_rng = RngStream::new(55, 0);
        let weights: Vec<f64> = (0..k).map(|_| 0.1 + setup_rng.next_f64()).collect();
        let p = ProbVector::from_weights(&weights).unwrap();
        let c = CorruptionProcess::discrete_flip(k, 0.2).unwrap();
        let mut improved = 0;
        for seed in 0..5 {
            let mut rng = RngStream::new(seed, 3);
            let mut pairs = Vec::new();
            for _ in 0..2000 {
                let x = p.sample(&mut rng);
                let xt = c
                    .corrupt(&Sample::Discrete(x), &mut rng)
                    .unwrap()
                    .as_discrete()
                    .unwrap();
                pairs.push((x, xt));
            }
            let model =
                ConditionalModel::Multinomial(fit_multinomial(&pairs, k, 0.1).unwrap());
            let test = crate::data::gen_discrete(&p, 500, 1000 + seed).unwrap();
            let mut chain_rng = RngStream::new(77 + seed, 1);
            let cfg = ChainConfig::new(10_500, 500, 1, Sample::Discrete(0)).unwrap();
            let long = run_chain(&model, &c, &cfg, &mut chain_rng).unwrap();
            let mut short = long.clone();
            short.x_tildes.truncate(100);
            short.xs.truncate(100);
            let b_long = loglik_bound(&model, &long, &test).unwrap();
            let b_short = loglik_bound(&model, &short, &test).unwrap();
            if b_long.mean_log_lik >= b_short.mean_log_lik {
                improved += 1;
            }
        }
        assert!(improved >= 4, "improved in {improved}/5 seeds");
    }

    #[test]
    fn uniform_symmetric_energies_are_flat() {
        let k = 6;
        let p = ProbVector::uniform(k);
        let c = CorruptionProcess::discrete_flip(k, 0.5).unwrap();
        let model = ConditionalModel::Multinomial(build_true_conditional(&p, &c).unwrap());
        let anchor = Sample::Discrete(2);
        let e0 = energy_estimate(&model, &c, &Sample::Discrete(0), &anchor).unwrap();
        for x in 1..k {
            let e = energy_estimate(&model, &c, &Sample::Discrete(x), &anchor).unwrap();
            assert!((e.energy - e0.energy).abs() < 1e-12, "state {x}");
        }
    }

    #[test]
    fn energy_differences_recover_log_probability_ratios() {
        let k = 10;
        let (p, c, model) = exact_setup(k);
        for anchor in 0..k {
            let anchor_s = Sample::Discrete(anchor);
            let energies: Vec<f64> = (0..k)
                .map(|x| {
                    energy_estimate(&model, &c, &Sample::Discrete(x), &anchor_s)
                        .unwrap()
                        .energy
                })
                .collect();
            for x1 in 0..k {
                for x2 in 0..k {
                    let lhs = energies[x1] - energies[x2];
                    let rhs = p.get(x2).ln() - p.get(x1).ln();
                    assert!(
                        (lhs - rhs).abs() <= 1e-9,
                        "anchor {anchor} pair ({x1},{x2}): {lhs} vs {rhs}"
                    );
                }
            }
        }
    }

    #[test]
    fn chained_energies_telescope() {
        let k = 10;
        let (_, c, model) = exact_setup(k);
        // Path 1 -> 4 -> 7 with per-link anchors: the summed differences
        // equal the direct difference at a shared anchor.
        let diff = |x1: usize, x2: usize, anchor: usize| -> f64 {
            let a = Sample::Discrete(anchor);
            energy_estimate(&model, &c, &Sample::Discrete(x1), &a)
                .unwrap()
                .energy
                - energy_estimate(&model, &c, &Sample::Discrete(x2), &a)
                    .unwrap()
                    .energy
        };
        let telescoped = diff(1, 4, 2) + diff(4, 7, 5);
        let direct = diff(1, 7, 9);
        assert!((telescoped - direct).abs() <= 1e-9);
    }

    #[test]
    fn histogram_tv_identities() {
        let p = ProbVector::new(vec![0.25, 0.25, 0.5]).unwrap();
        let matching = vec![
            Sample::Discrete(0),
            Sample::Discrete(1),
            Sample::Discrete(2),
            Sample::Discrete(2),
        ];
        assert!(histogram_tv_discrete(&matching, &p).unwrap() < 1e-12);

        let disjoint = ProbVector::new(vec![0.0, 0.0, 1.0]).unwrap();
        let lhs = vec![Sample::Discrete(0), Sample::Discrete(1)];
        assert!((histogram_tv_discrete(&lhs, &disjoint).unwrap() - 1.0).abs() < 1e-12);
        assert!(histogram_tv_discrete(&[], &p).is_err());
    }

    #[test]
    fn large_sample_histogram_is_close() {
        let p = ProbVector::new(vec![0.1, 0.05, 0.15, 0.2, 0.1, 0.08, 0.02, 0.1, 0.12, 0.08])
            .unwrap();
        let mut rng = RngStream::new(14, 0);
        let samples: Vec<Sample> = (0..100_000)
            .map(|_| Sample::Discrete(p.sample(&mut rng)))
            .collect();
        let tv = histogram_tv_discrete(&samples, &p).unwrap();
        assert!(tv <= 0.01, "tv {tv}");
    }

    #[test]
    fn identical_continuous_datasets_have_zero_tv() {
        let comps = crate::data::default_mixture();
        let data = crate::data::gen_mixture(&comps, 300, 4).unwrap();
        let tvs = histogram_tv_pairs(data.samples(), &data, 20).unwrap();
        assert_eq!(tvs.len(), 45);
        for t in &tvs {
            assert_eq!(t.tv, 0.0, "pair ({}, {})", t.i, t.j);
        }
    }

    #[test]
    fn chi_square_helpers_are_sane() {
        // Exact-match histogram: statistic 0, far below any critical value.
        let exp = vec![25.0, 25.0, 50.0];
        assert_eq!(chi_square_statistic(&exp, &exp).unwrap(), 0.0);
        // Wilson-Hilferty vs tabulated upper-1% points.
        assert!((chi_square_critical_99(19) - 36.191).abs() < 0.15);
        assert!((chi_square_critical_99(9) - 21.666).abs() < 0.15);
        assert!(chi_square_statistic(&exp, &[25.0, 25.0]).is_err());
    }
}
