//! Denoising autoencoder on binary images, plain vs walkback training.
//!
//! Uses IDX image data when `GDAE_IMAGE_IDX` points at a file (pixels are
//! binarized at 0.5), otherwise a synthetic prototype mixture. Trains the
//! Bernoulli MLP twice with identical budgets - once with plain
//! salt-and-pepper corruption, once with walkback rollouts - then samples
//! both chains, writes PGM grids, and scores both models with the
//! chain-based log-likelihood bound on held-out images.
//!
//! Run: `cargo run --release -p gdae --example image_dae`

use gdae::chain::{run_chain, ChainConfig};
use gdae::corruption::CorruptionProcess;
use gdae::data::{gen_binary_prototypes, Dataset};
use gdae::distributions::{RngStream, Sample};
use gdae::eval::loglik_bound;
use gdae::io::{load_idx, write_sample_grid};
use gdae::models::ConditionalModel;
use gdae::training::{train_dae, MlpArch, TrainConfig, WalkbackConfig};

fn load_images() -> (Dataset, usize) {
    if let Ok(path) = std::env::var("GDAE_IMAGE_IDX") {
        let data = load_idx(std::path::Path::new(&path)).expect("readable IDX file");
        let side = (data.dim() as f64).sqrt().round() as usize;
        assert_eq!(side * side, data.dim(), "images must be square");
        println!("loaded {} images ({}x{side}) from {path}", data.len(), side);
        (data, side)
    } else {
        let side = 16;
        let data = gen_binary_prototypes(2400, side, 8, 0.03, 5).unwrap();
        println!(
            "using {} synthetic {side}x{side} prototype images (set GDAE_IMAGE_IDX to use IDX data)",
            data.len()
        );
        (data, side)
    }
}

fn main() {
    let (all, side) = load_images();
    let d = side * side;
    let n_train = (all.len() * 5 / 6).min(all.len() - 100);
    let train = all.slice(0..n_train, "train").unwrap();
    let test = all.slice(n_train..all.len(), "test").unwrap();

    let corruption = CorruptionProcess::salt_pepper(d, 0.5).unwrap();
    let cfg = TrainConfig {
        epochs: 8,
        minibatch: 32,
        learning_rate: 0.01,
        momentum: 0.9,
        lr_decay: 0.99,
        weight_decay: 0.0,
        seed: 1,
    };
    let arch = MlpArch { d, h: 64 };

    let plain_wb = WalkbackConfig::default();
    let walk_wb = WalkbackConfig {
        enabled: true,
        p: 0.5,
        max_steps: 20,
        fixed_steps: Some(5),
    };

    for (label, wb) in [("plain", &plain_wb), ("walkback", &walk_wb)] {
        let start = std::time::Instant::now();
        let (mlp, metrics) = train_dae(&train, &corruption, &cfg, wb, arch, Some(&test)).unwrap();
        println!("\n{label} training ({:.1}s):", start.elapsed().as_secs_f64());
        for e in &metrics.epochs {
            println!(
                "  epoch {:>2}: train nll {:.3}, holdout nll {:.3}",
                e.epoch,
                e.train_nll,
                e.valid_nll.unwrap()
            );
        }
        let model = ConditionalModel::BernoulliMlp(mlp);

        let chain_cfg =
            ChainConfig::new(1100, 100, 1, Sample::Binary(vec![0; d])).unwrap();
        let mut rng = RngStream::new(7, 7);
        let run = run_chain(&model, &corruption, &chain_cfg, &mut rng).unwrap();
        let grid_path = std::env::temp_dir().join(format!("gdae_{label}_samples.pgm"));
        write_sample_grid(&run.xs[run.len() - 64..], 8, 8, side, &grid_path).unwrap();
        println!("  wrote 64 consecutive samples to {}", grid_path.display());

        let bound = loglik_bound(&model, &run, &test).unwrap();
        println!(
            "  log-likelihood bound on {} held-out images: {:.2} nats",
            bound.n_test, bound.mean_log_lik
        );
    }
}
