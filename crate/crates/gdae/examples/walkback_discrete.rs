//! Walkback corruption on the discrete experiment.
//!
//! Shows the rollout length law (geometric with continuation probability
//! p, capped), then trains counting tables under walkback corruption and
//! checks that sampling with the plain corruption still recovers the
//! target distribution.
//!
//! Run: `cargo run --release -p gdae --example walkback_discrete`

use gdae::chain::{build_transition_matrix, stationary_distribution};
use gdae::corruption::CorruptionProcess;
use gdae::data::{default_discrete_target, gen_discrete};
use gdae::distributions::{total_variation, RngStream};
use gdae::models::{fit_multinomial, ConditionalModel};
use gdae::training::{walkback_rollout, WalkbackConfig};

fn main() {
    let k = 10;
    let seed = 3;
    let target = default_discrete_target();
    let corruption = CorruptionProcess::discrete_flip(k, 0.5).unwrap();
    let wb = WalkbackConfig {
        enabled: true,
        p: 0.5,
        max_steps: 20,
        fixed_steps: None,
    };

    // Length law of the rollouts under a warm-started model.
    let data = gen_discrete(&target, 5000, seed).unwrap();
    let mut rng = RngStream::new(seed, 50);
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for x in data.samples() {
        let xt = corruption.corrupt(x, &mut rng).unwrap();
        pairs.push((x.as_discrete().unwrap(), xt.as_discrete().unwrap()));
    }
    let mut model = ConditionalModel::Multinomial(fit_multinomial(&pairs, k, 0.1).unwrap());

    let mut lengths = vec![0usize; wb.max_steps + 1];
    let n_rollouts = 20_000;
    for i in 0..n_rollouts {
        let x = &data.samples()[i % data.len()];
        let l = walkback_rollout(&model, &corruption, x, &wb, &mut rng).unwrap();
        lengths[l.len()] += 1;
    }
    let mean: f64 = lengths
        .iter()
        .enumerate()
        .map(|(len, &c)| len as f64 * c as f64)
        .sum::<f64>()
        / n_rollouts as f64;
    println!("rollout lengths over {n_rollouts} walks (p = {}):", wb.p);
    for (len, &c) in lengths.iter().enumerate().skip(1).take(8) {
        println!("  |L| = {len}: {:.3}", c as f64 / n_rollouts as f64);
    }
    println!("  mean length = {mean:.3} (geometric mean 1/(1-p) = 2)");

    // Iterated refits under walkback corruption, then plain-corruption
    // sampling: the recovered stationary distribution stays on target.
    for round in 0..4 {
        let mut wb_pairs: Vec<(usize, usize)> = Vec::new();
        for x in data.samples() {
            for xt in walkback_rollout(&model, &corruption, x, &wb, &mut rng).unwrap() {
                wb_pairs.push((x.as_discrete().unwrap(), xt.as_discrete().unwrap()));
            }
        }
        model = ConditionalModel::Multinomial(fit_multinomial(&wb_pairs, k, 0.1).unwrap());
        let t = build_transition_matrix(&model, &corruption, k).unwrap();
        let pi = stationary_distribution(&t).unwrap();
        let tv = total_variation(&pi, &target).unwrap();
        println!(
            "refit round {}: {} walkback pairs, plain-chain stationary tv = {tv:.4}",
            round + 1,
            wb_pairs.len()
        );
    }
}
