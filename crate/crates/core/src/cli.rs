//! `qtl` command line: `gen-data`, `train`, `eval`, `effdim-sweep`.
//!
//! Settings come from built-in defaults, then an optional TOML file given by
//! `--config`, then command-line flags. The seed falls back to `QTL_SEED`
//! when neither the file nor a flag sets it. Every artifact written starts
//! with `#` comment lines echoing the resolved configuration.
//!
//! Config file sections:
//!
//! ```toml
//! seed = 7
//! [data]    # n, dim, sigma, separation
//! [ansatz]  # family, layers, qubits, reuploading
//! [train]   # epochs, batch_size, learning_rate, head_learning_rate, optimizer, mode, train_fraction, rescale
//! [effdim]  # families, n_grid, lambda, samples, epsilon_scale, theta_mode
//! ```

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ansatz::{AnsatzSpec, Family};
use crate::checkpoint::Checkpoint;
use crate::data::{gen_synthetic, load_features, save_features, split, Dataset, SplitSpec, SyntheticConfig};
use crate::effdim::{
    local_effective_dimension, EffDimConfig, EffDimReport, ThetaMode, DEFAULT_EPSILON_SCALE,
    DEFAULT_LAMBDA, DEFAULT_SAMPLES,
};
use crate::error::{QtlError, Result};
use crate::hybrid::{
    attach_adapter, evaluate, init_model, train, train_on, HybridModel, Metrics, Optimizer,
    TrainConfig, TrainMode,
};

pub const SEED_ENV: &str = "QTL_SEED";

#[derive(Debug, Parser)]
#[command(name = "qtl", version, about = "Hybrid quantum-classical transfer learning toolkit")]
pub struct Cli {
    /// TOML configuration file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Global seed (falls back to the config file, then QTL_SEED, then 0).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic two-class Gaussian dataset.
    GenData(GenDataArgs),
    /// Train a hybrid model and write a checkpoint plus a metrics row.
    Train(TrainArgs),
    /// Evaluate a checkpoint on a feature file.
    Eval(EvalArgs),
    /// Local effective dimension over a grid of dataset sizes.
    EffdimSweep(SweepArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct DataFlags {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub separation: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct AnsatzFlags {
    /// real-amplitudes | strong-entangling | single-qubit
    #[arg(long)]
    pub family: Option<Family>,
    /// Number of layers N.
    #[arg(long)]
    pub layers: Option<usize>,
    #[arg(long)]
    pub qubits: Option<usize>,
    /// Re-upload the features in every layer.
    #[arg(long)]
    pub reupload: Option<bool>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct TrainFlags {
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub head_lr: Option<f64>,
    /// adam | sgd
    #[arg(long)]
    pub optimizer: Option<String>,
    /// joint | quantum-only
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(long)]
    pub train_fraction: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct GenDataArgs {
    #[command(flatten)]
    pub data: DataFlags,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    /// Feature file; a synthetic dataset is generated when omitted.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[command(flatten)]
    pub synthetic: DataFlags,
    #[command(flatten)]
    pub ansatz: AnsatzFlags,
    #[command(flatten)]
    pub train: TrainFlags,
    /// Continue from this checkpoint (its ansatz and split are reused).
    #[arg(long)]
    pub resume: Option<PathBuf>,
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Metrics file (config comments, header, one row).
    #[arg(long)]
    pub metrics: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// Evaluate only the held-out part of the checkpoint's own split.
    #[arg(long, default_value_t = false)]
    pub held_out: bool,
    #[arg(long)]
    pub metrics: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// Feature file used for training and the Fisher average; synthetic when omitted.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[command(flatten)]
    pub synthetic: DataFlags,
    #[command(flatten)]
    pub train: TrainFlags,
    #[arg(long, value_delimiter = ',')]
    pub families: Option<Vec<Family>>,
    #[arg(long)]
    pub layers: Option<usize>,
    #[arg(long)]
    pub qubits: Option<usize>,
    #[arg(long)]
    pub reupload: Option<bool>,
    #[arg(long = "n-grid", value_delimiter = ',')]
    pub n_grid: Option<Vec<usize>>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Monte Carlo sample count M.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Ball radius as a multiple of 1/sqrt(n).
    #[arg(long)]
    pub epsilon_scale: Option<f64>,
    /// fixed | retrained
    #[arg(long)]
    pub theta_mode: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Partial settings as read from a config file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub data: Option<PartialData>,
    pub ansatz: Option<PartialAnsatz>,
    pub train: Option<PartialTrain>,
    pub effdim: Option<PartialSweep>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialData {
    pub n: Option<usize>,
    pub dim: Option<usize>,
    pub sigma: Option<f64>,
    pub separation: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialAnsatz {
    pub family: Option<Family>,
    pub layers: Option<usize>,
    pub qubits: Option<usize>,
    pub reuploading: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialTrain {
    pub epochs: Option<usize>,
    pub batch_size: Option<usize>,
    pub learning_rate: Option<f64>,
    pub head_learning_rate: Option<f64>,
    pub optimizer: Option<Optimizer>,
    pub mode: Option<TrainMode>,
    pub train_fraction: Option<f64>,
    pub rescale: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialSweep {
    pub families: Option<Vec<Family>>,
    pub n_grid: Option<Vec<usize>>,
    pub lambda: Option<f64>,
    pub samples: Option<usize>,
    pub epsilon_scale: Option<f64>,
    pub theta_mode: Option<ThetaMode>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| QtlError::io(path, e))?;
        toml::from_str(&text).map_err(|e| QtlError::Config(format!("{}: {}", path.display(), e.message())))
    }
}

/// Fully resolved settings; echoed into every artifact.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub seed: u64,
    pub data: SyntheticConfig,
    pub ansatz: AnsatzSpec,
    pub train: TrainConfig,
    pub effdim: SweepSettings,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSettings {
    pub families: Vec<Family>,
    pub n_grid: Vec<usize>,
    pub lambda: f64,
    pub samples: usize,
    pub epsilon_scale: f64,
    pub theta_mode: ThetaMode,
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self {
            families: vec![Family::RealAmplitudes, Family::StrongEntangling],
            n_grid: vec![1_000, 10_000, 100_000, 1_000_000],
            lambda: DEFAULT_LAMBDA,
            samples: DEFAULT_SAMPLES,
            epsilon_scale: DEFAULT_EPSILON_SCALE,
            theta_mode: ThetaMode::Fixed,
        }
    }
}

impl RunConfig {
    /// Defaults overlaid with `file`; the seed resolves as file, then `env_seed`, then 0.
    pub fn resolve(file: &FileConfig, env_seed: Option<u64>) -> Self {
        let seed = file.seed.or(env_seed).unwrap_or(0);
        let mut data = SyntheticConfig {
            seed,
            ..Default::default()
        };
        if let Some(d) = &file.data {
            data.n = d.n.unwrap_or(data.n);
            data.dim = d.dim.unwrap_or(data.dim);
            data.sigma = d.sigma.unwrap_or(data.sigma);
            data.separation = d.separation.unwrap_or(data.separation);
        }
        let mut ansatz = AnsatzSpec::new(Family::StrongEntangling, 3, 3, false);
        if let Some(a) = &file.ansatz {
            ansatz = respec(
                ansatz,
                a.family,
                a.layers,
                a.qubits,
                a.reuploading,
            );
        }
        let mut train = TrainConfig {
            seed,
            ..Default::default()
        };
        if let Some(t) = &file.train {
            train.epochs = t.epochs.unwrap_or(train.epochs);
            train.batch_size = t.batch_size.unwrap_or(train.batch_size);
            train.learning_rate = t.learning_rate.unwrap_or(train.learning_rate);
            train.head_learning_rate = t.head_learning_rate.unwrap_or(train.head_learning_rate);
            train.optimizer = t.optimizer.unwrap_or(train.optimizer);
            train.mode = t.mode.unwrap_or(train.mode);
            train.train_fraction = t.train_fraction.unwrap_or(train.train_fraction);
            train.rescale = t.rescale.unwrap_or(train.rescale);
        }
        let mut effdim = SweepSettings::default();
        if let Some(s) = &file.effdim {
            if let Some(f) = &s.families {
                effdim.families = f.clone();
            }
            if let Some(g) = &s.n_grid {
                effdim.n_grid = g.clone();
            }
            effdim.lambda = s.lambda.unwrap_or(effdim.lambda);
            effdim.samples = s.samples.unwrap_or(effdim.samples);
            effdim.epsilon_scale = s.epsilon_scale.unwrap_or(effdim.epsilon_scale);
            effdim.theta_mode = s.theta_mode.unwrap_or(effdim.theta_mode);
        }
        Self {
            seed,
            data,
            ansatz,
            train,
            effdim,
        }
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
        self.data.seed = seed;
        self.train.seed = seed;
    }

    fn apply_data(&mut self, f: &DataFlags) {
        self.data.n = f.n.unwrap_or(self.data.n);
        self.data.dim = f.dim.unwrap_or(self.data.dim);
        self.data.sigma = f.sigma.unwrap_or(self.data.sigma);
        self.data.separation = f.separation.unwrap_or(self.data.separation);
    }

    fn apply_ansatz(&mut self, f: &AnsatzFlags) {
        self.ansatz = respec(self.ansatz, f.family, f.layers, f.qubits, f.reupload);
    }

    fn apply_train(&mut self, f: &TrainFlags) -> Result<()> {
        let t = &mut self.train;
        t.epochs = f.epochs.unwrap_or(t.epochs);
        t.batch_size = f.batch_size.unwrap_or(t.batch_size);
        t.learning_rate = f.lr.unwrap_or(t.learning_rate);
        t.head_learning_rate = f.head_lr.unwrap_or(t.head_learning_rate);
        t.train_fraction = f.train_fraction.unwrap_or(t.train_fraction);
        if let Some(o) = &f.optimizer {
            t.optimizer = match o.to_ascii_lowercase().as_str() {
                "adam" => Optimizer::Adam,
                "sgd" => Optimizer::Sgd,
                other => return Err(QtlError::Config(format!("unknown optimizer '{other}'"))),
            };
        }
        if let Some(m) = &f.mode {
            t.mode = match m.to_ascii_lowercase().replace('_', "-").as_str() {
                "joint" => TrainMode::Joint,
                "quantum-only" => TrainMode::QuantumOnly,
                other => return Err(QtlError::Config(format!("unknown training mode '{other}'"))),
            };
        }
        Ok(())
    }

    /// The resolved configuration as `#`-prefixed TOML lines.
    pub fn echo(&self) -> Vec<String> {
        let body = toml::to_string(self).unwrap_or_default();
        let mut out = vec!["resolved configuration".to_string()];
        out.extend(body.lines().map(str::to_string));
        out
    }
}

fn respec(
    base: AnsatzSpec,
    family: Option<Family>,
    layers: Option<usize>,
    qubits: Option<usize>,
    reupload: Option<bool>,
) -> AnsatzSpec {
    let family = family.unwrap_or(base.family);
    let default_qubits = if family == Family::SingleQubit { 1 } else { base.qubits.max(1) };
    let qubits = qubits.unwrap_or(if family != base.family && family == Family::SingleQubit {
        1
    } else {
        default_qubits
    });
    AnsatzSpec::new(
        family,
        layers.unwrap_or(base.layers),
        qubits,
        reupload.unwrap_or(base.reuploading),
    )
}

fn comment_block(lines: &[String]) -> String {
    lines.iter().fold(String::new(), |mut s, l| {
        let _ = writeln!(s, "# {l}");
        s
    })
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| QtlError::io(path, e))
}

pub fn metrics_header(classes: usize) -> String {
    let mut h = "family,N,q,reupload,seed,accuracy".to_string();
    for c in 0..classes {
        let _ = write!(h, ",f1_{c}");
    }
    h
}

pub fn metrics_row(spec: &AnsatzSpec, seed: u64, m: &Metrics) -> String {
    let mut row = format!(
        "{},{},{},{},{},{}",
        spec.family, spec.layers, spec.qubits, spec.reuploading, seed, m.accuracy
    );
    for f in &m.per_class_f1 {
        let _ = write!(row, ",{f}");
    }
    row
}

/// Output of a command: the text artifact written (if any) and a console summary.
#[derive(Debug, Clone)]
pub struct CommandOutput {
    pub summary: String,
    pub artifact: Option<String>,
}

pub fn cmd_gen_data(cfg: &RunConfig, args: &GenDataArgs) -> Result<(RunConfig, CommandOutput)> {
    let mut cfg = cfg.clone();
    cfg.apply_data(&args.data);
    let ds: Dataset<f64> = gen_synthetic(&cfg.data)?;
    let comments = synthetic_comments(&cfg);
    save_features(&ds, &args.out, &comments)?;
    let counts = ds.class_counts();
    Ok((
        cfg,
        CommandOutput {
            summary: format!(
                "wrote {} rows ({} features, class counts {:?}) to {}",
                ds.len(),
                ds.feature_dim(),
                counts,
                args.out.display()
            ),
            artifact: Some(ds.to_feature_text(&comments)),
        },
    ))
}

fn synthetic_comments(cfg: &RunConfig) -> Vec<String> {
    let mut lines = vec![format!(
        "synthetic two-class gaussian: n={} dim={} sigma={} separation={} seed={}",
        cfg.data.n, cfg.data.dim, cfg.data.sigma, cfg.data.separation, cfg.data.seed
    )];
    lines.extend(cfg.echo());
    lines
}

fn load_or_generate(path: &Option<PathBuf>, cfg: &RunConfig) -> Result<Dataset<f64>> {
    match path {
        Some(p) => load_features(p),
        None => gen_synthetic(&cfg.data),
    }
}

pub fn cmd_train(cfg: &RunConfig, args: &TrainArgs) -> Result<(RunConfig, CommandOutput)> {
    let mut cfg = cfg.clone();
    cfg.apply_data(&args.synthetic);
    cfg.apply_ansatz(&args.ansatz);
    cfg.apply_train(&args.train)?;
    let dataset = load_or_generate(&args.data, &cfg)?;

    let (model, metrics) = match &args.resume {
        Some(path) => {
            let ck = Checkpoint::<f64>::load(path)?;
            cfg.ansatz = ck.ansatz;
            cfg.set_seed(ck.seed);
            cfg.train = ck.train;
            cfg.apply_train(&args.train)?;
            // Reuse the checkpoint's split so held-out rows stay held out.
            cfg.train.train_fraction = ck.train.train_fraction;
            let mut model = ck.to_model()?;
            check_dims(&model, &dataset)?;
            let split_spec =
                SplitSpec::from_fraction(dataset.len(), ck.train.train_fraction, ck.train.seed)?;
            let (train_set, test_set) = split(&dataset, &split_spec)?;
            let history = if cfg.train.epochs == 0 {
                Vec::new()
            } else {
                train_on(&mut model, &train_set, &cfg.train)?
            };
            let mut m = evaluate(&model, &test_set)?;
            m.loss_history = history;
            (model, m)
        }
        None => {
            let mut model: HybridModel<f64> =
                init_model(&cfg.ansatz, dataset.class_count(), cfg.seed)?;
            if dataset.feature_dim() != cfg.ansatz.feature_len() {
                attach_adapter(&mut model, dataset.feature_dim(), cfg.seed);
            }
            let outcome = train(model, &dataset, &cfg.train)?;
            (outcome.model, outcome.metrics)
        }
    };

    if let Some(path) = &args.checkpoint {
        Checkpoint::from_model(&model, &cfg.train, Some(metrics.clone())).save(path)?;
    }
    let row = metrics_row(&model.spec, cfg.seed, &metrics);
    let artifact = format!(
        "{}{}\n{}\n",
        comment_block(&cfg.echo()),
        metrics_header(model.class_count()),
        row
    );
    if let Some(path) = &args.metrics {
        write_file(path, &artifact)?;
    }
    let last_loss = metrics.loss_history.last().copied();
    Ok((
        cfg,
        CommandOutput {
            summary: format!(
                "{row}\nfree parameters: {}, final training loss: {}",
                model.free_param_count(),
                last_loss.map_or("n/a".to_string(), |l| format!("{l:.6}"))
            ),
            artifact: Some(artifact),
        },
    ))
}

fn check_dims(model: &HybridModel<f64>, dataset: &Dataset<f64>) -> Result<()> {
    if dataset.feature_dim() != model.input_dim() {
        return Err(QtlError::Validation(format!(
            "model takes {} features, dataset has {}",
            model.input_dim(),
            dataset.feature_dim()
        )));
    }
    if dataset.class_count() != model.class_count() {
        return Err(QtlError::Validation(format!(
            "model has {} classes, dataset has {}",
            model.class_count(),
            dataset.class_count()
        )));
    }
    Ok(())
}

pub fn cmd_eval(cfg: &RunConfig, args: &EvalArgs) -> Result<(RunConfig, CommandOutput)> {
    let mut cfg = cfg.clone();
    let ck = Checkpoint::<f64>::load(&args.checkpoint)?;
    let model = ck.to_model()?;
    let dataset = load_features(&args.data)?;
    check_dims(&model, &dataset)?;
    let target = if args.held_out {
        let spec = SplitSpec::from_fraction(dataset.len(), ck.train.train_fraction, ck.train.seed)?;
        split(&dataset, &spec)?.1
    } else {
        dataset
    };
    let metrics = evaluate(&model, &target)?;
    cfg.ansatz = ck.ansatz;
    cfg.train = ck.train;
    cfg.seed = ck.seed;
    let row = metrics_row(&model.spec, ck.seed, &metrics);
    let artifact = format!(
        "{}{}\n{}\n",
        comment_block(&cfg.echo()),
        metrics_header(model.class_count()),
        row
    );
    if let Some(path) = &args.metrics {
        write_file(path, &artifact)?;
    }
    Ok((
        cfg,
        CommandOutput {
            summary: row,
            artifact: Some(artifact),
        },
    ))
}

pub fn cmd_effdim_sweep(cfg: &RunConfig, args: &SweepArgs) -> Result<(RunConfig, CommandOutput)> {
    let mut cfg = cfg.clone();
    cfg.apply_data(&args.synthetic);
    cfg.apply_train(&args.train)?;
    cfg.ansatz = respec(cfg.ansatz, None, args.layers, args.qubits, args.reupload);
    if let Some(f) = &args.families {
        cfg.effdim.families = f.clone();
    }
    if let Some(g) = &args.n_grid {
        cfg.effdim.n_grid = g.clone();
    }
    cfg.effdim.lambda = args.lambda.unwrap_or(cfg.effdim.lambda);
    cfg.effdim.samples = args.samples.unwrap_or(cfg.effdim.samples);
    cfg.effdim.epsilon_scale = args.epsilon_scale.unwrap_or(cfg.effdim.epsilon_scale);
    if let Some(m) = &args.theta_mode {
        cfg.effdim.theta_mode = match m.as_str() {
            "fixed" => ThetaMode::Fixed,
            "retrained" => ThetaMode::Retrained,
            other => return Err(QtlError::Config(format!("unknown theta mode '{other}'"))),
        };
    }
    if cfg.effdim.families.is_empty() || cfg.effdim.n_grid.is_empty() {
        return Err(QtlError::Config("sweep needs at least one family and one n".into()));
    }

    // All grid configs are checked before any training or Fisher evaluation.
    let grid: Vec<EffDimConfig> = cfg
        .effdim
        .n_grid
        .iter()
        .map(|&n| {
            EffDimConfig::new(
                n,
                cfg.effdim.lambda,
                cfg.effdim.epsilon_scale / (n as f64).sqrt(),
                cfg.effdim.samples,
                cfg.seed,
            )
        })
        .collect::<Result<_>>()?;
    let specs: Vec<AnsatzSpec> = cfg
        .effdim
        .families
        .iter()
        .map(|&f| {
            let s = respec(cfg.ansatz, Some(f), None, None, None);
            s.validate().map(|_| s)
        })
        .collect::<Result<_>>()?;

    let dataset = load_or_generate(&args.data, &cfg)?;
    let reports = sweep(&specs, &grid, &dataset, &cfg.train, cfg.effdim.theta_mode, cfg.seed)?;

    let mut artifact = comment_block(&cfg.echo());
    artifact.push_str(EffDimReport::CSV_HEADER);
    artifact.push('\n');
    for r in &reports {
        artifact.push_str(&r.csv_row());
        artifact.push('\n');
    }
    if let Some(path) = &args.out {
        write_file(path, &artifact)?;
    }
    Ok((
        cfg,
        CommandOutput {
            summary: format!("{} grid points", reports.len()),
            artifact: Some(artifact),
        },
    ))
}

/// One report per `(spec, n)` in spec-major order.
pub fn sweep(
    specs: &[AnsatzSpec],
    grid: &[EffDimConfig],
    dataset: &Dataset<f64>,
    train_cfg: &TrainConfig,
    mode: ThetaMode,
    seed: u64,
) -> Result<Vec<EffDimReport>> {
    let fit = |spec: &AnsatzSpec, seed: u64| -> Result<HybridModel<f64>> {
        let mut model: HybridModel<f64> = init_model(spec, dataset.class_count(), seed)?;
        if dataset.feature_dim() != spec.feature_len() {
            attach_adapter(&mut model, dataset.feature_dim(), seed);
        }
        let tc = TrainConfig { seed, ..*train_cfg };
        Ok(train(model, dataset, &tc)?.model)
    };
    let fixed: Vec<Option<HybridModel<f64>>> = specs
        .par_iter()
        .map(|s| match mode {
            ThetaMode::Fixed => fit(s, seed).map(Some),
            ThetaMode::Retrained => Ok(None),
        })
        .collect::<Result<_>>()?;
    let points: Vec<(usize, usize)> = (0..specs.len())
        .flat_map(|s| (0..grid.len()).map(move |g| (s, g)))
        .collect();
    points
        .par_iter()
        .map(|&(s, g)| {
            let model = match &fixed[s] {
                Some(m) => m.clone(),
                None => fit(&specs[s], seed.wrapping_add(g as u64 + 1))?,
            };
            let mut report = local_effective_dimension(&model, &model.params, dataset, &grid[g])?;
            report.theta_mode = mode;
            Ok(report)
        })
        .collect()
}

/// Parses `QTL_SEED`; unparsable values are a configuration error.
pub fn env_seed() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| QtlError::Config(format!("{SEED_ENV}='{v}' is not an unsigned integer"))),
        Err(_) => Ok(None),
    }
}

/// Resolves the configuration and runs one command.
pub fn run(cli: &Cli) -> Result<CommandOutput> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let mut cfg = RunConfig::resolve(&file, env_seed()?);
    if let Some(seed) = cli.seed {
        cfg.set_seed(seed);
    }
    let (_, out) = match &cli.command {
        Command::GenData(a) => cmd_gen_data(&cfg, a)?,
        Command::Train(a) => cmd_train(&cfg, a)?,
        Command::Eval(a) => cmd_eval(&cfg, a)?,
        Command::EffdimSweep(a) => cmd_effdim_sweep(&cfg, a)?,
    };
    Ok(out)
}
