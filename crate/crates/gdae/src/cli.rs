//! The `gdae` command-line surface.
//!
//! Subcommands: `gen-data` (synthetic datasets), `train` (config-driven
//! fitting), `sample` (chain generation plus optional PGM grids), `eval`
//! (bound / tv / energy reports), and `oracle` (exact stationary
//! distribution with an ergodicity audit). Exit codes: 0 success, 1 usage
//! error, 2 data or validation error.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use crate::chain::{
    build_transition_matrix, check_ergodicity, run_chain, stationary_distribution, ChainConfig,
    ChainRun,
};
use crate::config::{self, CorruptionConfig, CorruptionKind, DataSource, ModelFamily};
use crate::corruption::CorruptionProcess;
use crate::data::{
    default_discrete_target, default_mixture, gen_discrete, gen_mixture, Dataset,
    MixtureComponent,
};
use crate::distributions::{RngStream, Sample};
use crate::error::Error;
use crate::eval::{energy_estimate, histogram_tv_discrete, histogram_tv_pairs, loglik_bound};
use crate::io;
use crate::models::{load_model, save_model, ConditionalModel};
use crate::training::{fit_nonparametric, train_dae, MlpArch, NonparametricFamily};

/// Stream id for CLI-run sampling chains.
pub const STREAM_CHAIN: u64 = 7;

const USAGE: &str = "\
gdae - generalized denoising autoencoder toolkit

USAGE:
  gdae <command> [flags]

COMMANDS:
  gen-data discrete|mixture  synthesize a dataset and write it as CSV
  train                      fit a model from an experiment config file
  sample                     run the sampling chain from a saved model
  eval bound|tv|energy       write evaluation reports
  oracle                     exact stationary distribution + ergodicity audit
  help                       show this message

COMMON FLAGS:
  gen-data:  --n N --seed S --out FILE [--k K] [--dist P.csv] [--components C.csv]
  train:     --config FILE --out MODEL [--metrics FILE]
  sample:    --model FILE --corruption KIND [--eps E | --corrupt-prob P | --sigma S]
             --steps N [--burn-in B] [--thin T] [--seed S] --out FILE
             [--xtilde-out FILE] [--init SAMPLE]
             [--grid FILE --side W [--grid-rows R --grid-cols C]]
  eval bound:  --model FILE --xtilde CHAIN.csv --test DATA.csv [--out FILE]
  eval tv:     --chain CHAIN.csv (--ref P.csv | --ref-data DATA.csv [--bins B]) [--out FILE]
  eval energy: --model FILE --corruption KIND [params] --anchor SAMPLE [--x SAMPLE] [--out FILE]
  oracle:    --model FILE --corruption discrete_flip --eps E [--out FILE] [--report FILE]
";

/// CLI failure, split by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Exit 1: bad invocation (flags, missing command-line files).
    Usage(String),
    /// Exit 2: bad data or failed validation.
    Validation(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

/// Entry point: parses `argv[1..]`, prints diagnostics to stderr, returns
/// the exit code.
pub fn cli_main(args: &[String]) -> i32 {
    match run(args) {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("run `gdae help` for usage");
            1
        }
        Err(CliError::Validation(msg)) => {
            eprintln!("error: {msg}");
            2
        }
    }
}

/// Dispatch without the exit-code wrapping (testable directly).
pub fn run(args: &[String]) -> Result<(), CliError> {
    let mut args = args.iter();
    let command = args
        .next()
        .ok_or_else(|| CliError::Usage("missing command".to_string()))?;
    let rest: Vec<String> = args.cloned().collect();
    match command.as_str() {
        "gen-data" => cmd_gen_data(&rest),
        "train" => cmd_train(&rest),
        "sample" => cmd_sample(&rest),
        "eval" => cmd_eval(&rest),
        "oracle" => cmd_oracle(&rest),
        "help" | "--help" | "-h" => {
            println!("{USAGE}");
            Ok(())
        }
        other => Err(CliError::Usage(format!("unknown command `{other}`"))),
    }
}

struct Flags {
    positionals: Vec<String>,
    values: HashMap<String, String>,
}

impl Flags {
    fn parse(args: &[String]) -> Result<Self, CliError> {
        let mut positionals = Vec::new();
        let mut values = HashMap::new();
        let mut it = args.iter();
        while let Some(arg) = it.next() {
            if let Some(name) = arg.strip_prefix("--") {
                let value = it.next().ok_or_else(|| {
                    CliError::Usage(format!("flag --{name} expects a value"))
                })?;
                if values.insert(name.to_string(), value.clone()).is_some() {
                    return Err(CliError::Usage(format!("flag --{name} given twice")));
                }
            } else {
                positionals.push(arg.clone());
            }
        }
        Ok(Self { positionals, values })
    }

    fn take(&mut self, name: &str) -> Option<String> {
        self.values.remove(name)
    }

    fn require(&mut self, name: &str) -> Result<String, CliError> {
        self.take(name)
            .ok_or_else(|| CliError::Usage(format!("missing required flag --{name}")))
    }

    fn parse_value<T: std::str::FromStr>(&mut self, name: &str, default: T) -> Result<T, CliError> {
        match self.take(name) {
            Some(v) => v
                .parse()
                .map_err(|_| CliError::Usage(format!("flag --{name}: cannot parse `{v}`"))),
            None => Ok(default),
        }
    }

    fn parse_opt<T: std::str::FromStr>(&mut self, name: &str) -> Result<Option<T>, CliError> {
        match self.take(name) {
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| CliError::Usage(format!("flag --{name}: cannot parse `{v}`"))),
            None => Ok(None),
        }
    }

    fn finish(self) -> Result<(), CliError> {
        if let Some(name) = self.values.keys().next() {
            return Err(CliError::Usage(format!("unknown flag --{name}")));
        }
        Ok(())
    }
}

fn existing_path(flag: &str, value: &str) -> Result<PathBuf, CliError> {
    let path = PathBuf::from(value);
    if !path.is_file() {
        return Err(CliError::Usage(format!(
            "--{flag}: file {value} does not exist"
        )));
    }
    Ok(path)
}

/// Corruption from CLI flags, with an optional config fallback.
fn corruption_from_flags(
    flags: &mut Flags,
    dim: usize,
    fallback: Option<&CorruptionConfig>,
) -> Result<CorruptionProcess, CliError> {
    let kind = flags.take("corruption");
    let eps: Option<f64> = flags.parse_opt("eps")?;
    let corrupt_prob: Option<f64> = flags.parse_opt("corrupt-prob")?;
    let sigma: Option<f64> = flags.parse_opt("sigma")?;
    let mut cfg = fallback.cloned().unwrap_or_default();
    if let Some(kind) = kind {
        cfg.kind = match kind.as_str() {
            "discrete_flip" => CorruptionKind::DiscreteFlip,
            "salt_pepper" => CorruptionKind::SaltPepper,
            "gaussian" => CorruptionKind::Gaussian,
            other => {
                return Err(CliError::Usage(format!(
                    "--corruption: unknown kind `{other}`"
                )))
            }
        };
    } else if fallback.is_none() {
        return Err(CliError::Usage(
            "missing required flag --corruption".to_string(),
        ));
    }
    if let Some(v) = eps {
        cfg.eps = v;
    }
    if let Some(v) = corrupt_prob {
        cfg.corrupt_prob = v;
    }
    if let Some(v) = sigma {
        cfg.sigma = v;
    }
    Ok(cfg.build(dim)?)
}

fn parse_sample_literal(text: &str, variant: &str, dim: usize) -> Result<Sample, CliError> {
    let bad = |msg: String| CliError::Usage(msg);
    match variant {
        "discrete" => {
            let v: usize = text
                .parse()
                .map_err(|_| bad(format!("cannot parse discrete state `{text}`")))?;
            Ok(Sample::Discrete(v))
        }
        "binary" => {
            let bits: Result<Vec<u8>, CliError> = text
                .split(',')
                .map(|t| match t.trim() {
                    "0" => Ok(0),
                    "1" => Ok(1),
                    other => Err(bad(format!("bad bit `{other}`"))),
                })
                .collect();
            let bits = bits?;
            if bits.len() != dim {
                return Err(bad(format!(
                    "sample has {} bits, model expects {dim}",
                    bits.len()
                )));
            }
            Ok(Sample::Binary(bits))
        }
        "real" => {
            let xs: Result<Vec<f64>, CliError> = text
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<f64>()
                        .map_err(|_| bad(format!("bad real `{t}`")))
                })
                .collect();
            let xs = xs?;
            if xs.len() != dim {
                return Err(bad(format!(
                    "sample has {} coordinates, model expects {dim}",
                    xs.len()
                )));
            }
            Ok(Sample::Real(xs))
        }
        other => Err(bad(format!("unknown variant `{other}`"))),
    }
}

fn model_dim(model: &ConditionalModel) -> usize {
    match model {
        ConditionalModel::Multinomial(t) => t.k(),
        ConditionalModel::Parzen(p) => p.dim(),
        ConditionalModel::BernoulliMlp(m) => m.dims().0,
    }
}

fn default_init(model: &ConditionalModel) -> Sample {
    match model {
        ConditionalModel::Multinomial(_) => Sample::Discrete(0),
        ConditionalModel::Parzen(p) => Sample::Real(vec![0.0; p.dim()]),
        ConditionalModel::BernoulliMlp(m) => Sample::Binary(vec![0; m.dims().0]),
    }
}

fn read_components_csv(path: &Path) -> Result<Vec<MixtureComponent>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
    let mut comps = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 || line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.trim_end_matches('\r').split(',').collect();
        if fields.len() < 3 {
            return Err(CliError::Validation(format!(
                "{}: line {} needs weight,std,means...",
                path.display(),
                i + 1
            )));
        }
        let parse = |t: &str| -> Result<f64, CliError> {
            t.parse()
                .map_err(|_| CliError::Validation(format!("line {}: bad number `{t}`", i + 1)))
        };
        comps.push(MixtureComponent {
            weight: parse(fields[0])?,
            std: parse(fields[1])?,
            mean: fields[2..]
                .iter()
                .map(|t| parse(t))
                .collect::<Result<_, _>>()?,
        });
    }
    if comps.is_empty() {
        return Err(CliError::Validation(format!(
            "{}: no components",
            path.display()
        )));
    }
    Ok(comps)
}

fn cmd_gen_data(args: &[String]) -> Result<(), CliError> {
    let mut flags = Flags::parse(args)?;
    let kind = flags
        .positionals
        .first()
        .cloned()
        .ok_or_else(|| CliError::Usage("gen-data expects `discrete` or `mixture`".to_string()))?;
    let out = PathBuf::from(flags.require("out")?);
    let seed: u64 = flags.parse_value("seed", 0)?;
    match kind.as_str() {
        "discrete" => {
            let n: usize = flags.parse_value("n", 5000)?;
            let explicit_k: Option<usize> = flags.parse_opt("k")?;
            let dist = match flags.take("dist") {
                Some(v) => {
                    let d = io::read_prob_vector_csv(&existing_path("dist", &v)?)?;
                    if let Some(k) = explicit_k {
                        if k != d.len() {
                            return Err(CliError::Usage(format!(
                                "--k {k} conflicts with the {}-state --dist file",
                                d.len()
                            )));
                        }
                    }
                    d
                }
                None => match explicit_k {
                    Some(k) => crate::data::seeded_target(k),
                    None => default_discrete_target(),
                },
            };
            flags.finish()?;
            let data = gen_discrete(&dist, n, seed)?;
            io::write_dataset_csv(&out, &data)?;
            println!("wrote {} discrete samples to {}", data.len(), out.display());
        }
        "mixture" => {
            let n: usize = flags.parse_value("n", 500)?;
            let comps = match flags.take("components") {
                Some(v) => read_components_csv(&existing_path("components", &v)?)?,
                None => default_mixture(),
            };
            flags.finish()?;
            let data = gen_mixture(&comps, n, seed)?;
            io::write_dataset_csv(&out, &data)?;
            println!("wrote {} mixture samples to {}", data.len(), out.display());
        }
        other => {
            return Err(CliError::Usage(format!(
                "gen-data: unknown generator `{other}`"
            )))
        }
    }
    Ok(())
}

fn load_configured_dataset(cfg: &config::ExperimentConfig) -> Result<Dataset, CliError> {
    Ok(match cfg.data.source {
        DataSource::Discrete => {
            let dist = match &cfg.data.dist {
                Some(p) => io::read_prob_vector_csv(p)?,
                None => default_discrete_target(),
            };
            gen_discrete(&dist, cfg.data.n, cfg.seed)?
        }
        DataSource::Mixture => {
            let comps = match &cfg.data.components {
                Some(p) => read_components_csv(p)?,
                None => default_mixture(),
            };
            gen_mixture(&comps, cfg.data.n, cfg.seed)?
        }
        DataSource::Idx => io::load_idx(cfg.data.path.as_ref().expect("validated"))?,
        DataSource::Csv => io::read_dataset_csv(
            cfg.data.path.as_ref().expect("validated"),
            cfg.data.variant.as_deref(),
        )?,
    })
}

fn cmd_train(args: &[String]) -> Result<(), CliError> {
    let mut flags = Flags::parse(args)?;
    let config_path = existing_path("config", &flags.require("config")?)?;
    let out = PathBuf::from(flags.require("out")?);
    let metrics_path = flags.take("metrics").map(PathBuf::from);
    flags.finish()?;

    let cfg = config::load_config(&config_path)?;
    let data = load_configured_dataset(&cfg)?;

    let (model, metrics) = match cfg.model.family {
        ModelFamily::Multinomial => {
            let corruption = cfg.corruption.build(cfg.data.k)?;
            let family = NonparametricFamily::Multinomial {
                k: cfg.data.k,
                alpha: cfg.model.alpha,
            };
            (fit_nonparametric(&data, &corruption, &family, cfg.seed)?, None)
        }
        ModelFamily::Parzen => {
            let corruption = cfg.corruption.build(data.dim())?;
            let family = NonparametricFamily::Parzen {
                sigma_x: cfg.model.sigma_x,
                sigma_c: cfg.model.sigma_c,
            };
            (fit_nonparametric(&data, &corruption, &family, cfg.seed)?, None)
        }
        ModelFamily::Mlp => {
            let corruption = cfg.corruption.build(data.dim())?;
            let mut train_cfg = cfg.train.clone();
            train_cfg.seed = cfg.seed;
            let arch = MlpArch {
                d: data.dim(),
                h: cfg.model.hidden,
            };
            let (mlp, metrics) =
                train_dae(&data, &corruption, &train_cfg, &cfg.walkback, arch, None)?;
            (ConditionalModel::BernoulliMlp(mlp), Some(metrics))
        }
    };

    save_model(&model, &out)?;
    println!("wrote {} model to {}", model.family_name(), out.display());
    if let Some(path) = metrics_path {
        let metrics = metrics.unwrap_or_default();
        io::write_metrics_csv(&path, &metrics)?;
        println!("wrote training metrics to {}", path.display());
    }
    Ok(())
}

fn cmd_sample(args: &[String]) -> Result<(), CliError> {
    let mut flags = Flags::parse(args)?;
    let model_path = existing_path("model", &flags.require("model")?)?;
    let out = PathBuf::from(flags.require("out")?);
    let xtilde_out = flags.take("xtilde-out").map(PathBuf::from);
    let steps: usize = flags.parse_value("steps", 5500)?;
    let burn_in: usize = flags.parse_value("burn-in", steps / 10)?;
    let thin: usize = flags.parse_value("thin", 1)?;
    let seed: u64 = flags.parse_value("seed", 0)?;
    let grid = flags.take("grid").map(PathBuf::from);
    let side: Option<usize> = flags.parse_opt("side")?;
    let grid_rows: Option<usize> = flags.parse_opt("grid-rows")?;
    let grid_cols: Option<usize> = flags.parse_opt("grid-cols")?;
    let init_text = flags.take("init");

    let model = load_model(&model_path)?;
    let dim = model_dim(&model);
    let corruption = corruption_from_flags(&mut flags, dim, None)?;
    flags.finish()?;

    let init = match init_text {
        Some(t) => parse_sample_literal(&t, model.expected_variant(), dim)?,
        None => default_init(&model),
    };
    let chain_cfg =
        ChainConfig::new(steps, burn_in, thin, init).map_err(|e| CliError::Validation(e.to_string()))?;
    let mut rng = RngStream::new(seed, STREAM_CHAIN);
    let run = run_chain(&model, &corruption, &chain_cfg, &mut rng)?;

    io::write_chain_csv(&out, &run.steps, &run.xs)?;
    println!("wrote {} chain samples to {}", run.len(), out.display());
    if let Some(path) = xtilde_out {
        io::write_chain_csv(&path, &run.steps, &run.x_tildes)?;
        println!("wrote corrupted-side samples to {}", path.display());
    }

    if let Some(grid_path) = grid {
        if model.expected_variant() != "binary" {
            return Err(CliError::Validation(
                "sample grids need a binary model".to_string(),
            ));
        }
        let side = match side {
            Some(s) => s,
            None => {
                let s = (dim as f64).sqrt().round() as usize;
                if s * s != dim {
                    return Err(CliError::Usage(format!(
                        "--side required: {dim} is not a perfect square"
                    )));
                }
                s
            }
        };
        let n_show = run.len().min(64);
        let cols = grid_cols.unwrap_or_else(|| (n_show as f64).sqrt().ceil() as usize);
        let rows = grid_rows.unwrap_or_else(|| n_show.div_ceil(cols));
        io::write_sample_grid(&run.xs[..n_show], rows, cols, side, &grid_path)?;
        println!("wrote {n_show}-sample grid to {}", grid_path.display());
    }
    Ok(())
}

fn chain_from_csv(path: &Path, variant: Option<&str>) -> Result<ChainRun, CliError> {
    let (steps, samples) = io::read_chain_csv(path, variant)?;
    let init = samples[0].clone();
    let n = samples.len();
    let config = ChainConfig::new(n.max(1), 0, 1, init)
        .map_err(|e| CliError::Validation(e.to_string()))?;
    Ok(ChainRun {
        xs: samples.clone(),
        x_tildes: samples,
        steps,
        config,
    })
}

fn cmd_eval(args: &[String]) -> Result<(), CliError> {
    let mut flags = Flags::parse(args)?;
    let metric = flags
        .positionals
        .first()
        .cloned()
        .ok_or_else(|| CliError::Usage("eval expects `bound`, `tv`, or `energy`".to_string()))?;
    let fallback = match flags.take("config") {
        Some(v) => Some(config::load_config(&existing_path("config", &v)?)?),
        None => None,
    };
    let out = PathBuf::from(
        flags
            .take("out")
            .unwrap_or_else(|| "report.csv".to_string()),
    );
    let seed: u64 = flags.parse_value("seed", fallback.as_ref().map_or(0, |c| c.seed))?;

    let rows = match metric.as_str() {
        "bound" => {
            let model = load_model(&existing_path("model", &flags.require("model")?)?)?;
            let chain_path = existing_path("xtilde", &flags.require("xtilde")?)?;
            let test_path = match flags.take("test") {
                Some(v) => existing_path("test", &v)?,
                None => match fallback.as_ref().and_then(|c| c.eval.test.clone()) {
                    Some(p) => p,
                    None => return Err(CliError::Usage("missing required flag --test".to_string())),
                },
            };
            flags.finish()?;
            let chain = chain_from_csv(&chain_path, Some(model.expected_variant()))?;
            let test = io::read_dataset_csv(&test_path, Some(model.expected_variant()))?;
            let bound = loglik_bound(&model, &chain, &test)?;
            println!(
                "log-likelihood bound: {:.4} nats over {} test examples ({} chain samples)",
                bound.mean_log_lik, bound.n_test, bound.n_chain_samples
            );
            vec![io::ReportRow {
                metric: "loglik_bound".to_string(),
                value: bound.mean_log_lik,
                n_samples: bound.n_chain_samples,
                seed,
            }]
        }
        "tv" => {
            let chain_path = existing_path("chain", &flags.require("chain")?)?;
            let reference = flags.take("ref");
            let ref_data = flags.take("ref-data");
            let bins: usize = flags.parse_value("bins", fallback.as_ref().map_or(20, |c| c.eval.bins))?;
            flags.finish()?;
            match (reference, ref_data) {
                (Some(p), None) => {
                    let target = io::read_prob_vector_csv(&existing_path("ref", &p)?)?;
                    let chain = chain_from_csv(&chain_path, Some("discrete"))?;
                    let tv = histogram_tv_discrete(&chain.xs, &target)?;
                    println!("histogram tv: {tv:.4}");
                    vec![io::ReportRow {
                        metric: "tv".to_string(),
                        value: tv,
                        n_samples: chain.len(),
                        seed,
                    }]
                }
                (None, Some(p)) => {
                    let reference = io::read_dataset_csv(&existing_path("ref-data", &p)?, Some("real"))?;
                    let chain = chain_from_csv(&chain_path, Some("real"))?;
                    let tvs = histogram_tv_pairs(&chain.xs, &reference, bins)?;
                    let worst = tvs.iter().map(|t| t.tv).fold(0.0, f64::max);
                    println!(
                        "binned tv over {} coordinate pairs: worst {worst:.4}",
                        tvs.len()
                    );
                    tvs.into_iter()
                        .map(|t| io::ReportRow {
                            metric: format!("tv_pair_{}_{}", t.i, t.j),
                            value: t.tv,
                            n_samples: chain.len(),
                            seed,
                        })
                        .collect()
                }
                _ => {
                    return Err(CliError::Usage(
                        "eval tv needs exactly one of --ref (distribution) or --ref-data (dataset)"
                            .to_string(),
                    ))
                }
            }
        }
        "energy" => {
            let model = load_model(&existing_path("model", &flags.require("model")?)?)?;
            let dim = model_dim(&model);
            let corruption =
                corruption_from_flags(&mut flags, dim, fallback.as_ref().map(|c| &c.corruption))?;
            let anchor_text = flags.require("anchor")?;
            let x_text = flags.take("x");
            flags.finish()?;
            let anchor = parse_sample_literal(&anchor_text, model.expected_variant(), dim)?;
            match x_text {
                Some(t) => {
                    let x = parse_sample_literal(&t, model.expected_variant(), dim)?;
                    let e = energy_estimate(&model, &corruption, &x, &anchor)?;
                    println!("energy: {:.6}", e.energy);
                    vec![io::ReportRow {
                        metric: "energy".to_string(),
                        value: e.energy,
                        n_samples: 1,
                        seed,
                    }]
                }
                None => {
                    // Without --x, a discrete model gets one row per state.
                    if model.expected_variant() != "discrete" {
                        return Err(CliError::Usage(
                            "--x is required for non-discrete models".to_string(),
                        ));
                    }
                    (0..dim)
                        .map(|s| {
                            let e = energy_estimate(
                                &model,
                                &corruption,
                                &Sample::Discrete(s),
                                &anchor,
                            )?;
                            Ok(io::ReportRow {
                                metric: format!("energy_{s}"),
                                value: e.energy,
                                n_samples: dim,
                                seed,
                            })
                        })
                        .collect::<Result<Vec<_>, CliError>>()?
                }
            }
        }
        other => {
            return Err(CliError::Usage(format!(
                "eval: unknown metric `{other}`"
            )))
        }
    };

    io::write_report_csv(&out, &rows)?;
    println!("wrote report to {}", out.display());
    Ok(())
}

fn cmd_oracle(args: &[String]) -> Result<(), CliError> {
    let mut flags = Flags::parse(args)?;
    let model_path = existing_path("model", &flags.require("model")?)?;
    let out = PathBuf::from(
        flags
            .take("out")
            .unwrap_or_else(|| "stationary.csv".to_string()),
    );
    let report_path = flags.take("report").map(PathBuf::from);

    let model = load_model(&model_path)?;
    let k = model_dim(&model);
    if model.expected_variant() != "discrete" {
        return Err(CliError::Validation(
            "the exact oracle needs a discrete (table) model".to_string(),
        ));
    }
    let corruption = corruption_from_flags(&mut flags, k, None)?;
    flags.finish()?;

    let report = check_ergodicity(&model, &corruption, k)?;
    if let Some(path) = &report_path {
        let rows: Vec<io::ReportRow> = report
            .model_zeros
            .iter()
            .map(|(xt, x)| (format!("model_zero_{xt}_{x}"), 0.0))
            .chain(
                report
                    .corruption_zeros
                    .iter()
                    .map(|(x, xt)| (format!("corruption_zero_{x}_{xt}"), 0.0)),
            )
            .chain(
                report
                    .transition_zeros
                    .iter()
                    .map(|(n, p)| (format!("transition_zero_{n}_{p}"), 0.0)),
            )
            .map(|(metric, value)| io::ReportRow {
                metric,
                value,
                n_samples: k,
                seed: 0,
            })
            .collect();
        io::write_report_csv(path, &rows)?;
        println!("wrote ergodicity report to {}", path.display());
    }
    if !report.is_ergodic() {
        return Err(CliError::Validation(format!("{report}")));
    }
    println!("{report}");

    let t = build_transition_matrix(&model, &corruption, k)?;
    let pi = stationary_distribution(&t)?;
    io::write_prob_vector_csv(&out, &pi)?;
    println!("wrote stationary distribution to {}", out.display());
    Ok(())
}
