//! Exact stationary analysis on a finite state space.
//!
//! Builds the Bayes-exact reconstruction conditional for a known target
//! distribution and corruption, composes the exact transition operator of
//! the alternating chain, and power-iterates to its stationary
//! distribution. With the exact conditional the chain reproduces the
//! target to floating-point accuracy; with conditionals fitted by counting
//! on n pairs, the recovery error shrinks as n grows.
//!
//! Run: `cargo run --release -p gdae --example stationary_oracle`

use gdae::chain::{build_transition_matrix, build_true_conditional, stationary_distribution};
use gdae::corruption::CorruptionProcess;
use gdae::data::{default_discrete_target, gen_discrete};
use gdae::distributions::{total_variation, RngStream};
use gdae::models::ConditionalModel;
use gdae::training::{fit_nonparametric, NonparametricFamily};

fn main() {
    let k = 10;
    let target = default_discrete_target();
    let corruption = CorruptionProcess::discrete_flip(k, 0.5).unwrap();

    println!("target distribution over {k} states:");
    for (i, p) in target.as_slice().iter().enumerate() {
        println!("  state {i}: {p:.4}");
    }

    // Exact conditional: the stationary distribution is the target itself.
    let exact = build_true_conditional(&target, &corruption).unwrap();
    let t = build_transition_matrix(&ConditionalModel::Multinomial(exact), &corruption, k).unwrap();
    let pi = stationary_distribution(&t).unwrap();
    let tv = total_variation(&pi, &target).unwrap();
    println!("\nexact conditional: stationary tv = {tv:.3e}");

    // Fitted conditionals: consistency in action.
    println!("\ncounting fits (alpha = 0.1):");
    for n in [500usize, 5_000, 50_000] {
        let data = gen_discrete(&target, n, 7).unwrap();
        let family = NonparametricFamily::Multinomial { k, alpha: 0.1 };
        let model = fit_nonparametric(&data, &corruption, &family, 7).unwrap();
        let t = build_transition_matrix(&model, &corruption, k).unwrap();
        let pi_n = stationary_distribution(&t).unwrap();
        let tv = total_variation(&pi_n, &target).unwrap();
        println!("  n = {n:>6}: stationary tv vs target = {tv:.4}");
    }

    // A couple of random targets and corruption levels, same identity.
    let mut rng = RngStream::new(1, 0);
    println!("\nrandom (target, eps) spot checks:");
    for trial in 0..3 {
        let kk = [2, 5, 10][trial];
        let weights: Vec<f64> = (0..kk).map(|_| 0.05 + rng.next_f64()).collect();
        let p = gdae::distributions::ProbVector::from_weights(&weights).unwrap();
        let eps = 0.2 + 0.8 * rng.next_f64();
        let c = CorruptionProcess::discrete_flip(kk, eps).unwrap();
        let exact = build_true_conditional(&p, &c).unwrap();
        let t = build_transition_matrix(&ConditionalModel::Multinomial(exact), &c, kk).unwrap();
        let pi = stationary_distribution(&t).unwrap();
        println!(
            "  k = {kk:>2}, eps = {eps:.2}: tv = {:.3e}",
            total_variation(&pi, &p).unwrap()
        );
    }
}
