//! End-to-end command-line tests: every subcommand, the exit-code
//! contract, and the full generate -> train -> sample -> evaluate pipeline.

use std::fs;
use std::path::{Path, PathBuf};

use gdae::chain::build_true_conditional;
use gdae::cli::{cli_main, run, CliError};
use gdae::corruption::CorruptionProcess;
use gdae::data::default_discrete_target;
use gdae::distributions::total_variation;
use gdae::io::{read_prob_vector_csv, read_report_csv_value, write_prob_vector_csv};
use gdae::models::{save_model, ConditionalModel};

fn tmpdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("gdae-cli-{name}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn args(parts: &[&str]) -> Vec<String> {
    parts.iter().map(|s| s.to_string()).collect()
}

fn p(path: &Path) -> String {
    path.display().to_string()
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(cli_main(&args(&[])), 1);
    assert_eq!(cli_main(&args(&["frobnicate"])), 1);
    assert_eq!(cli_main(&args(&["gen-data", "discrete", "--nope", "1"])), 1);
    // Missing config file: exit 1 and the message names it.
    match run(&args(&["train", "--config", "missing.toml", "--out", "m.gdae"])) {
        Err(CliError::Usage(msg)) => assert!(msg.contains("missing.toml"), "{msg}"),
        other => panic!("expected usage error, got {other:?}"),
    }
}

#[test]
fn validation_errors_exit_two() {
    let dir = tmpdir("validation");
    // A config that parses but points at a corrupt IDX file.
    let idx = dir.join("bad.idx");
    fs::write(&idx, [0u8, 0, 8, 0, 0, 0, 0, 1]).unwrap();
    let cfg = dir.join("exp.cfg");
    fs::write(
        &cfg,
        format!(
            "corruption = salt_pepper\n[data]\nsource = idx\npath = {}\n[model]\nfamily = mlp\n",
            p(&idx)
        ),
    )
    .unwrap();
    let code = cli_main(&args(&[
        "train",
        "--config",
        &p(&cfg),
        "--out",
        &p(&dir.join("m.gdae")),
    ]));
    assert_eq!(code, 2);

    // Malformed config content is also a validation failure.
    let cfg2 = dir.join("bad.cfg");
    fs::write(&cfg2, "nonsense_key = 1\n").unwrap();
    let code = cli_main(&args(&[
        "train",
        "--config",
        &p(&cfg2),
        "--out",
        &p(&dir.join("m.gdae")),
    ]));
    assert_eq!(code, 2);
}

#[test]
fn discrete_pipeline_smoke() {
    let dir = tmpdir("pipeline");
    let data_csv = dir.join("train.csv");
    assert_eq!(
        cli_main(&args(&[
            "gen-data", "discrete", "--n", "5000", "--seed", "9", "--out", &p(&data_csv)
        ])),
        0
    );

    let cfg = dir.join("exp.cfg");
    fs::write(
        &cfg,
        format!(
            "seed = 9\ncorruption = discrete_flip\neps = 0.5\n\n[data]\nsource = csv\npath = {}\nvariant = discrete\nk = 10\n\n[model]\nfamily = multinomial\nalpha = 0.1\n",
            p(&data_csv)
        ),
    )
    .unwrap();
    let model_path = dir.join("table.gdae");
    assert_eq!(
        cli_main(&args(&["train", "--config", &p(&cfg), "--out", &p(&model_path)])),
        0
    );

    let run_csv = dir.join("run.csv");
    let xt_csv = dir.join("run_xt.csv");
    assert_eq!(
        cli_main(&args(&[
            "sample",
            "--model",
            &p(&model_path),
            "--corruption",
            "discrete_flip",
            "--eps",
            "0.5",
            "--steps",
            "5500",
            "--burn-in",
            "500",
            "--seed",
            "9",
            "--out",
            &p(&run_csv),
            "--xtilde-out",
            &p(&xt_csv),
        ])),
        0
    );

    // Evaluate the generated histogram against the true target.
    let target_csv = dir.join("target.csv");
    write_prob_vector_csv(&target_csv, &default_discrete_target()).unwrap();
    let report = dir.join("report.csv");
    assert_eq!(
        cli_main(&args(&[
            "eval", "tv", "--chain", &p(&run_csv), "--ref", &p(&target_csv), "--out", &p(&report)
        ])),
        0
    );
    let tv = read_report_csv_value(&report, "tv").unwrap();
    assert!(tv <= 0.05, "pipeline tv {tv}");

    // Oracle on the fitted model also lands near the target.
    let stationary = dir.join("stationary.csv");
    assert_eq!(
        cli_main(&args(&[
            "oracle",
            "--model",
            &p(&model_path),
            "--corruption",
            "discrete_flip",
            "--eps",
            "0.5",
            "--out",
            &p(&stationary),
        ])),
        0
    );
    let pi = read_prob_vector_csv(&stationary).unwrap();
    let tv = total_variation(&pi, &default_discrete_target()).unwrap();
    assert!(tv <= 0.05, "oracle tv {tv}");
}

#[test]
fn oracle_on_exact_conditional_recovers_target_to_1e9() {
    let dir = tmpdir("oracle-exact");
    let target = default_discrete_target();
    let c = CorruptionProcess::discrete_flip(10, 0.5).unwrap();
    let exact = ConditionalModel::Multinomial(build_true_conditional(&target, &c).unwrap());
    let model_path = dir.join("exact.gdae");
    save_model(&exact, &model_path).unwrap();

    let stationary = dir.join("stationary.csv");
    assert_eq!(
        cli_main(&args(&[
            "oracle",
            "--model",
            &p(&model_path),
            "--corruption",
            "discrete_flip",
            "--eps",
            "0.5",
            "--out",
            &p(&stationary),
        ])),
        0
    );
    let pi = read_prob_vector_csv(&stationary).unwrap();
    let tv = total_variation(&pi, &target).unwrap();
    assert!(tv <= 1e-9, "exact oracle tv {tv}");
}

#[test]
fn oracle_refuses_degenerate_corruption() {
    let dir = tmpdir("oracle-degenerate");
    let target = default_discrete_target();
    let c = CorruptionProcess::discrete_flip(10, 0.5).unwrap();
    let exact = ConditionalModel::Multinomial(build_true_conditional(&target, &c).unwrap());
    let model_path = dir.join("exact.gdae");
    save_model(&exact, &model_path).unwrap();

    let code = cli_main(&args(&[
        "oracle",
        "--model",
        &p(&model_path),
        "--corruption",
        "discrete_flip",
        "--eps",
        "0.0",
        "--report",
        &p(&dir.join("ergodicity.csv")),
    ]));
    assert_eq!(code, 2);
    assert!(dir.join("ergodicity.csv").is_file());
}

#[test]
fn mlp_pipeline_with_grid_and_bound() {
    let dir = tmpdir("mlp");
    // Small binary dataset via the library, persisted as CSV.
    let data = gdae::data::gen_binary_prototypes(300, 4, 3, 0.05, 3).unwrap();
    let train_csv = dir.join("bits.csv");
    gdae::io::write_dataset_csv(&train_csv, &data).unwrap();
    let test = gdae::data::gen_binary_prototypes(50, 4, 3, 0.05, 4).unwrap();
    let test_csv = dir.join("test.csv");
    gdae::io::write_dataset_csv(&test_csv, &test).unwrap();

    let cfg = dir.join("exp.cfg");
    fs::write(
        &cfg,
        format!(
            "seed = 3\ncorruption = salt_pepper\ncorrupt_prob = 0.5\n\n[data]\nsource = csv\npath = {}\nvariant = binary\n\n[model]\nfamily = mlp\nhidden = 8\n\n[train]\nepochs = 3\n",
            p(&train_csv)
        ),
    )
    .unwrap();
    let model_path = dir.join("mlp.gdae");
    let metrics = dir.join("metrics.csv");
    assert_eq!(
        cli_main(&args(&[
            "train",
            "--config",
            &p(&cfg),
            "--out",
            &p(&model_path),
            "--metrics",
            &p(&metrics),
        ])),
        0
    );
    let metrics_text = fs::read_to_string(&metrics).unwrap();
    assert!(metrics_text.starts_with("epoch,train_nll,valid_nll,seconds\n"));
    assert_eq!(metrics_text.lines().count(), 4);

    let run_csv = dir.join("run.csv");
    let xt_csv = dir.join("run_xt.csv");
    let grid = dir.join("grid.pgm");
    assert_eq!(
        cli_main(&args(&[
            "sample",
            "--model",
            &p(&model_path),
            "--corruption",
            "salt_pepper",
            "--corrupt-prob",
            "0.5",
            "--steps",
            "300",
            "--burn-in",
            "100",
            "--out",
            &p(&run_csv),
            "--xtilde-out",
            &p(&xt_csv),
            "--grid",
            &p(&grid),
        ])),
        0
    );
    let (w, h, _) = gdae::io::read_pgm(&grid).unwrap();
    assert!(w > 0 && h > 0);

    let report = dir.join("bound.csv");
    assert_eq!(
        cli_main(&args(&[
            "eval",
            "bound",
            "--model",
            &p(&model_path),
            "--xtilde",
            &p(&xt_csv),
            "--test",
            &p(&test_csv),
            "--out",
            &p(&report),
        ])),
        0
    );
    let bound = read_report_csv_value(&report, "loglik_bound").unwrap();
    assert!(bound.is_finite() && bound < 0.0, "bound {bound}");
}

#[test]
fn energy_report_for_discrete_model() {
    let dir = tmpdir("energy");
    let target = default_discrete_target();
    let c = CorruptionProcess::discrete_flip(10, 0.5).unwrap();
    let exact = ConditionalModel::Multinomial(build_true_conditional(&target, &c).unwrap());
    let model_path = dir.join("exact.gdae");
    save_model(&exact, &model_path).unwrap();

    let report = dir.join("energy.csv");
    assert_eq!(
        cli_main(&args(&[
            "eval",
            "energy",
            "--model",
            &p(&model_path),
            "--corruption",
            "discrete_flip",
            "--eps",
            "0.5",
            "--anchor",
            "4",
            "--out",
            &p(&report),
        ])),
        0
    );
    // Energy differences reproduce target log-ratios.
    let e0 = read_report_csv_value(&report, "energy_0").unwrap();
    let e9 = read_report_csv_value(&report, "energy_9").unwrap();
    let expect = target.get(9).ln() - target.get(0).ln();
    assert!(((e0 - e9) - expect).abs() < 1e-9);
}

#[test]
fn gen_data_with_custom_state_count() {
    let dir = tmpdir("genk");
    let out = dir.join("k5.csv");
    assert_eq!(
        cli_main(&args(&[
            "gen-data", "discrete", "--n", "500", "--k", "5", "--seed", "2", "--out", &p(&out)
        ])),
        0
    );
    let data = gdae::io::read_dataset_csv(&out, Some("discrete")).unwrap();
    let max = data
        .samples()
        .iter()
        .map(|s| s.as_discrete().unwrap())
        .max()
        .unwrap();
    assert!(max < 5);

    // --k conflicting with an explicit distribution is a usage error.
    let dist = dir.join("dist.csv");
    write_prob_vector_csv(&dist, &default_discrete_target()).unwrap();
    assert_eq!(
        cli_main(&args(&[
            "gen-data", "discrete", "--k", "5", "--dist", &p(&dist), "--out", &p(&out)
        ])),
        1
    );
}

#[test]
fn mixture_generation_round_trips() {
    let dir = tmpdir("mixture");
    let out = dir.join("mix.csv");
    assert_eq!(
        cli_main(&args(&[
            "gen-data", "mixture", "--n", "200", "--seed", "5", "--out", &p(&out)
        ])),
        0
    );
    let data = gdae::io::read_dataset_csv(&out, None).unwrap();
    assert_eq!(data.len(), 200);
    assert_eq!(data.variant(), "real");
    assert_eq!(data.dim(), 10);
}
