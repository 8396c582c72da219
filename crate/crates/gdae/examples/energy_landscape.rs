//! Anchored relative energies.
//!
//! With a reconstruction conditional and the corruption density, the
//! quantity `-log P(x | anchor) + log C(anchor | x)` estimates an energy
//! up to an anchor-dependent constant, so energy differences at a shared
//! anchor compare probabilities. For the exact conditional the differences
//! reproduce the target log-probability ratios; summed link-by-link along
//! a path they telescope.
//!
//! Run: `cargo run --release -p gdae --example energy_landscape`

use gdae::chain::build_true_conditional;
use gdae::corruption::CorruptionProcess;
use gdae::data::default_discrete_target;
use gdae::distributions::Sample;
use gdae::eval::energy_estimate;
use gdae::models::ConditionalModel;

fn main() {
    let k = 10;
    let target = default_discrete_target();
    let corruption = CorruptionProcess::discrete_flip(k, 0.5).unwrap();
    let model =
        ConditionalModel::Multinomial(build_true_conditional(&target, &corruption).unwrap());

    let anchor = Sample::Discrete(4);
    let energies: Vec<f64> = (0..k)
        .map(|x| {
            energy_estimate(&model, &corruption, &Sample::Discrete(x), &anchor)
                .unwrap()
                .energy
        })
        .collect();

    println!("state   energy(anchor=4)   -log target   (difference is constant)");
    for x in 0..k {
        let neg_log_p = -target.get(x).ln();
        println!(
            "{x:>5}   {:>16.6}   {neg_log_p:>11.6}   {:+.6}",
            energies[x],
            energies[x] - neg_log_p
        );
    }

    // Energy differences vs exact log-ratios.
    let (a, b) = (0, 9);
    let diff = energies[a] - energies[b];
    let log_ratio = target.get(b).ln() - target.get(a).ln();
    println!("\nenergy({a}) - energy({b}) = {diff:.9}");
    println!("log target({b}) - log target({a}) = {log_ratio:.9}");

    // Telescoping along a path with per-link midpoint-ish anchors.
    let link = |x1: usize, x2: usize, anchor: usize| -> f64 {
        let a = Sample::Discrete(anchor);
        energy_estimate(&model, &corruption, &Sample::Discrete(x1), &a)
            .unwrap()
            .energy
            - energy_estimate(&model, &corruption, &Sample::Discrete(x2), &a)
                .unwrap()
                .energy
    };
    let telescoped = link(0, 3, 1) + link(3, 6, 4) + link(6, 9, 7);
    let direct = link(0, 9, 5);
    println!("\npath 0->3->6->9 summed energy differences = {telescoped:.9}");
    println!("direct difference at one anchor          = {direct:.9}");
}
