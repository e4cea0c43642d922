//! Command-line front end.
//!
//! Configuration is one JSON document with namespaced sections; `--set
//! section.key=value` and the convenience flags override it, and every run
//! writes the fully resolved document next to its outputs so the run can be
//! replayed with `--config <snapshot>`.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use log::info;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::channel::{AntennaConfig, FadingParams};
use crate::curves::{self, CurveRow, FadingSweep, ModelSource};
use crate::dataset::{build_dataset, export_csv, load_dataset, save_dataset, DatasetSplit};
use crate::error::{Error, Result};
use crate::fama::{estimate_outage, SystemConfig};
use crate::hpo::{class_count_sweep, run_study, SearchSpace, StudySettings};
use crate::nn::{LossKind, TrainConfig};
use crate::predictor::{fit, Architecture, TrainedModel};
use crate::rng::derive_seed;
use crate::scenario::Scenario;
use crate::selection::{Policy, PolicyEvaluator, PolicyKind, PortPredictor};
use crate::serde_ext::extended_f64;

/// Default output directory when neither `--out` nor the config sets one.
pub const OUT_DIR_ENV: &str = "FAMA_LNN_OUT";

pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_IO: u8 = 3;
pub const EXIT_NUMERIC: u8 = 4;

/// Process exit status for an error.
pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config(_) | Error::Shape(_) | Error::Selection(_) => EXIT_CONFIG,
        Error::Io { .. } | Error::Format { .. } | Error::Integrity { .. } | Error::Json(_) => EXIT_IO,
        Error::Numeric(_) => EXIT_NUMERIC,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChannelSection {
    pub n_ports: usize,
    /// Normalized aperture W, in wavelengths.
    pub aperture: f64,
    pub alpha: f64,
    pub mu: u32,
}

impl Default for ChannelSection {
    fn default() -> Self {
        Self {
            n_ports: 100,
            aperture: 5.0,
            alpha: 2.0,
            mu: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DatasetSection {
    /// Total realizations, split 70/15/15.
    pub size: usize,
    pub m_observed: usize,
    pub m_labels: usize,
    /// Existing dataset file to use instead of generating one.
    pub path: Option<PathBuf>,
    /// Also write a CSV mirror of generated datasets.
    pub export_csv: bool,
}

impl Default for DatasetSection {
    fn default() -> Self {
        Self {
            size: 10_000,
            m_observed: 10,
            m_labels: 3,
            path: None,
            export_csv: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainSection {
    pub architecture: Architecture,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub loss: LossKind,
    pub patience: usize,
}

impl Default for TrainSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self {
            architecture: Architecture::default(),
            learning_rate: t.learning_rate,
            epochs: t.epochs,
            batch_size: t.batch_size,
            loss: t.loss,
            patience: t.patience,
        }
    }
}

impl TrainSection {
    fn config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            learning_rate: self.learning_rate,
            epochs: self.epochs,
            batch_size: self.batch_size,
            loss: self.loss,
            patience: self.patience,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HpoSection {
    pub budget: usize,
    pub objective: crate::hpo::Objective,
    /// Per-trial epoch cap.
    pub epochs: usize,
    pub batch_size: usize,
    pub patience: usize,
    pub space: SearchSpace,
    /// Table rows of `sweep-classes`.
    pub sweep_observed: Vec<usize>,
    /// Table columns of `sweep-classes`.
    pub sweep_m_labels: Vec<usize>,
}

impl Default for HpoSection {
    fn default() -> Self {
        Self {
            budget: 20,
            objective: crate::hpo::Objective::ValidationOutage,
            epochs: 20,
            batch_size: 64,
            patience: 4,
            space: SearchSpace::default(),
            sweep_observed: vec![5, 10, 15, 20],
            sweep_m_labels: vec![1, 2, 3, 4, 5, 10],
        }
    }
}

/// How curve commands obtain a predictor for each observed-port count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelSelection {
    /// Random search per observed-port count (the `hpo` section).
    #[default]
    Study,
    /// The `train` section's fixed architecture.
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalSection {
    /// Monte Carlo realizations per estimate.
    pub trials: u64,
    /// Policy of `eval-op`.
    pub policy: PolicyKind,
    pub lookup_budget: usize,
    pub k_combine: usize,
    /// Trained model for `eval-op` with the model policy.
    pub model: Option<PathBuf>,
    pub m_values: Vec<usize>,
    pub j_values: Vec<usize>,
    pub k_values: Vec<usize>,
    /// Include model-assisted rows in `curve-mrc`.
    pub mrc_model: bool,
    pub fading: FadingSweep,
    /// Include model-assisted rows in `curve-fading` (one model per shape
    /// and observed-port count).
    pub fading_model: bool,
    pub model_selection: ModelSelection,
    /// Cache of per-`m` models shared by the curve commands; defaults to
    /// `<output_dir>/models`.
    pub models_dir: Option<PathBuf>,
}

impl Default for EvalSection {
    fn default() -> Self {
        Self {
            trials: 100_000,
            policy: PolicyKind::Ideal,
            lookup_budget: 1,
            k_combine: 1,
            model: None,
            m_values: vec![5, 10, 15, 20, 25, 30],
            j_values: vec![1, 2, 4],
            k_values: vec![1, 2, 4, 6],
            mrc_model: true,
            fading: FadingSweep::default(),
            fading_model: false,
            model_selection: ModelSelection::Study,
            models_dir: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
    pub channel: ChannelSection,
    pub system: SystemConfig,
    pub dataset: DatasetSection,
    pub train: TrainSection,
    pub hpo: HpoSection,
    pub eval: EvalSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            output_dir: None,
            channel: ChannelSection::default(),
            system: SystemConfig::default(),
            dataset: DatasetSection::default(),
            train: TrainSection::default(),
            hpo: HpoSection::default(),
            eval: EvalSection::default(),
        }
    }
}

// Labels of the independent seed streams derived from the master seed.
const SEED_DATASET: u64 = 1;
const SEED_TRAIN: u64 = 2;
const SEED_STUDY: u64 = 3;
const SEED_EVAL: u64 = 4;

impl RunConfig {
    /// Parses a document, rejecting unknown keys.
    pub fn from_value(value: Value) -> Result<Self> {
        serde_json::from_value(value).map_err(|e| Error::config(e.to_string()))
    }

    pub fn scenario(&self) -> Result<Scenario> {
        let s = Scenario {
            system: self.system,
            antenna: AntennaConfig {
                n_ports: self.channel.n_ports,
                aperture: self.channel.aperture,
            },
            params: FadingParams::normalized(self.channel.alpha, self.channel.mu)?,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn dataset_seed(&self) -> u64 {
        derive_seed(self.seed, SEED_DATASET)
    }

    pub fn train_seed(&self) -> u64 {
        derive_seed(self.seed, SEED_TRAIN)
    }

    pub fn study_seed(&self) -> u64 {
        derive_seed(self.seed, SEED_STUDY)
    }

    /// Seed of the Monte Carlo realization stream shared by every curve row.
    pub fn eval_seed(&self) -> u64 {
        derive_seed(self.seed, SEED_EVAL)
    }

    pub fn study_settings(&self) -> StudySettings {
        StudySettings {
            budget: self.hpo.budget,
            objective: self.hpo.objective,
            train: TrainConfig {
                epochs: self.hpo.epochs,
                batch_size: self.hpo.batch_size,
                patience: self.hpo.patience,
                ..TrainConfig::default()
            },
            gamma_th_db: self.system.gamma_th_db,
        }
    }

    pub fn out_dir(&self) -> PathBuf {
        self.output_dir.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    fn models_dir(&self) -> PathBuf {
        self.eval
            .models_dir
            .clone()
            .unwrap_or_else(|| self.out_dir().join("models"))
    }

    /// Short digest of everything that determines a trained model for a
    /// scenario, so cached models are never reused under other settings.
    fn model_fingerprint(&self, scenario: &Scenario) -> Result<String> {
        let key = serde_json::json!({
            "seed": self.seed,
            "antenna": scenario.antenna,
            "params": scenario.params,
            "system": {
                "n_users": scenario.system.n_users,
                "signal_power": scenario.system.signal_power,
                "noise_power": scenario.system.noise_power,
                "gamma_th_db": extended(scenario.system.gamma_th_db),
                "interference_mode": scenario.system.interference_mode,
            },
            "dataset": { "size": self.dataset.size, "m_labels": self.dataset.m_labels },
            "selection": self.eval.model_selection,
            "train": self.train,
            "hpo": {
                "budget": self.hpo.budget,
                "objective": self.hpo.objective,
                "epochs": self.hpo.epochs,
                "batch_size": self.hpo.batch_size,
                "patience": self.hpo.patience,
                "space": self.hpo.space,
            },
        });
        let digest = Sha256::digest(serde_json::to_vec(&key)?);
        Ok(hex::encode(&digest[..6]))
    }
}

fn extended(v: f64) -> Value {
    extended_f64::serialize(&v, serde_json::value::Serializer).unwrap_or(Value::Null)
}

/// Sets `dotted.key` in a JSON document, creating objects along the way.
/// The value is parsed as JSON when possible and kept as a string otherwise.
pub fn apply_override(doc: &mut Value, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::config(format!("override '{assignment}' is not key=value")))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = doc;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        if part.is_empty() {
            return Err(Error::config(format!("empty key segment in '{key}'")));
        }
        if !node.is_object() {
            *node = Value::Object(Map::new());
        }
        let map = node.as_object_mut().expect("object");
        if i + 1 == parts.len() {
            map.insert(part.to_string(), value);
            return Ok(());
        }
        node = map.entry(part.to_string()).or_insert_with(|| Value::Object(Map::new()));
    }
    unreachable!("split yields at least one segment")
}

#[derive(Debug, Parser)]
#[command(name = "fama-lnn", version, about = "Fluid antenna multiple access with liquid-network port prediction")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override a configuration key, e.g. `--set eval.trials=1000`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub overrides: Vec<String>,
    /// Master seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Monte Carlo realizations per estimate.
    #[arg(long, global = true)]
    pub trials: Option<u64>,
    /// Trials per hyperparameter study.
    #[arg(long, global = true)]
    pub budget: Option<usize>,
    /// Outage threshold in dB; accepts `-inf` and `inf`.
    #[arg(long, global = true, allow_hyphen_values = true, value_parser = parse_extended)]
    pub gamma_th_db: Option<f64>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, env = OUT_DIR_ENV)]
    pub out: Option<PathBuf>,
}

fn parse_extended(s: &str) -> std::result::Result<f64, String> {
    extended_f64::parse(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Generate a dataset file.
    GenerateData,
    /// Train the configured architecture.
    Train,
    /// Random-search hyperparameter study.
    Study,
    /// Outage of one policy.
    EvalOp,
    /// Outage against observed ports for ideal, reference and model-assisted selection.
    CurveObserved,
    /// Outage against observed ports with MRC over K ports.
    CurveMrc,
    /// Outage against observed ports for several fading shapes.
    CurveFading,
    /// Test outage by observed ports and class count.
    SweepClasses,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::GenerateData => "generate-data",
            Command::Train => "train",
            Command::Study => "study",
            Command::EvalOp => "eval-op",
            Command::CurveObserved => "curve-observed",
            Command::CurveMrc => "curve-mrc",
            Command::CurveFading => "curve-fading",
            Command::SweepClasses => "sweep-classes",
        }
    }
}

impl Cli {
    /// The configuration after file, `--set` overrides and flags.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut doc = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                serde_json::from_str(&text).map_err(|e| Error::format(path, e.to_string()))?
            }
            None => Value::Object(Map::new()),
        };
        for o in &self.overrides {
            apply_override(&mut doc, o)?;
        }
        let mut cfg = RunConfig::from_value(doc)?;
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(trials) = self.trials {
            cfg.eval.trials = trials;
        }
        if let Some(budget) = self.budget {
            cfg.hpo.budget = budget;
        }
        if let Some(g) = self.gamma_th_db {
            cfg.system.gamma_th_db = g;
        }
        // an explicit flag or environment value wins over the file
        if let Some(out) = &self.out {
            cfg.output_dir = Some(out.clone());
        }
        Ok(cfg)
    }
}

/// Entry point of the `fama-lnn` binary.
pub fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_CONFIG)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// Resolves the configuration and runs the command.
pub fn run(cli: &Cli) -> Result<()> {
    let cfg = cli.resolve()?;
    match cli.workers {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::config(format!("worker pool: {e}")))?;
            pool.install(|| dispatch(cli.command, &cfg))
        }
        None => dispatch(cli.command, &cfg),
    }
}

/// Runs `command` and writes its artifacts plus the resolved configuration
/// snapshot `<command>.config.json` into the output directory.
pub fn dispatch(command: Command, cfg: &RunConfig) -> Result<()> {
    let out = cfg.out_dir();
    fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
    let started = Instant::now();
    match command {
        Command::GenerateData => generate_data(cfg, &out)?,
        Command::Train => train_command(cfg, &out)?,
        Command::Study => study_command(cfg, &out)?,
        Command::EvalOp => eval_op(cfg, &out)?,
        Command::CurveObserved => {
            let rows = curve_observed(cfg)?;
            curves::write_curve_csv(&out.join("curve_observed.csv"), &rows)?;
        }
        Command::CurveMrc => {
            let rows = curve_mrc(cfg)?;
            curves::write_curve_csv(&out.join("curve_mrc.csv"), &rows)?;
        }
        Command::CurveFading => {
            let rows = curve_fading(cfg)?;
            curves::write_curve_csv(&out.join("curve_fading.csv"), &rows)?;
        }
        Command::SweepClasses => sweep_classes(cfg, &out)?,
    }
    write_json(&out.join(format!("{}.config.json", command.name())), cfg)?;
    info!("{} finished in {:.1}s", command.name(), started.elapsed().as_secs_f64());
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// The configured dataset file, or a freshly generated one.
fn dataset(cfg: &RunConfig, scenario: &Scenario, m_observed: usize) -> Result<DatasetSplit> {
    if let Some(path) = &cfg.dataset.path {
        let data = load_dataset(path)?;
        if data.meta.n_ports != scenario.antenna.n_ports || data.meta.m_observed != m_observed {
            return Err(Error::shape(format!(
                "{} holds N = {}, m = {}; configuration asks for N = {}, m = {m_observed}",
                path.display(),
                data.meta.n_ports,
                data.meta.m_observed,
                scenario.antenna.n_ports
            )));
        }
        return data.relabel(cfg.dataset.m_labels);
    }
    build_dataset(
        &scenario.system,
        &scenario.antenna,
        &scenario.params,
        m_observed,
        cfg.dataset.m_labels,
        cfg.dataset.size,
        cfg.dataset_seed(),
    )
}

fn generate_data(cfg: &RunConfig, out: &Path) -> Result<()> {
    let scenario = cfg.scenario()?;
    let data = build_dataset(
        &scenario.system,
        &scenario.antenna,
        &scenario.params,
        cfg.dataset.m_observed,
        cfg.dataset.m_labels,
        cfg.dataset.size,
        cfg.dataset_seed(),
    )?;
    save_dataset(&data, &out.join("dataset.bin"))?;
    if cfg.dataset.export_csv {
        export_csv(&data, &out.join("dataset.csv"))?;
    }
    Ok(())
}

fn train_command(cfg: &RunConfig, out: &Path) -> Result<()> {
    let scenario = cfg.scenario()?;
    let data = dataset(cfg, &scenario, cfg.dataset.m_observed)?;
    let (model, outcome) = fit(&data, &cfg.train.architecture, &cfg.train.config(cfg.train_seed()))?;
    model.save(&out.join("model.bin"))?;
    write_json(
        &out.join("train_history.json"),
        &serde_json::json!({
            "best_epoch": outcome.best_epoch,
            "best_validation_loss": outcome.best_validation_loss,
            "diverged": outcome.diverged,
            "history": outcome.history,
        }),
    )
}

fn study_command(cfg: &RunConfig, out: &Path) -> Result<()> {
    let scenario = cfg.scenario()?;
    let data = dataset(cfg, &scenario, cfg.dataset.m_observed)?;
    let dir = out.join("study");
    let study = run_study(&cfg.hpo.space, &data, &cfg.study_settings(), cfg.study_seed(), Some(&dir))?;
    study.best_model.save(&dir.join("best_model.bin"))?;
    write_json(
        &dir.join("summary.json"),
        &serde_json::json!({
            "best": study.best_trial(),
            "trials": study.trials.len(),
            "failed": study.trials.iter().filter(|t| !t.succeeded()).count(),
        }),
    )
}

fn eval_op(cfg: &RunConfig, out: &Path) -> Result<()> {
    let scenario = cfg.scenario()?;
    let m = cfg.dataset.m_observed;
    let model = match cfg.eval.policy {
        PolicyKind::ModelAssisted => {
            let path = cfg
                .eval
                .model
                .as_ref()
                .ok_or_else(|| Error::config("eval.model is required for the model policy"))?;
            Some(TrainedModel::load(path)?)
        }
        _ => None,
    };
    let policy = Policy::new(cfg.eval.policy, cfg.eval.lookup_budget, cfg.eval.k_combine);
    let evaluator = PolicyEvaluator::uniform(policy, scenario.antenna.n_ports, m, model.as_ref().map(|m| m as &dyn PortPredictor))?;
    let seed = cfg.eval_seed();
    let est = estimate_outage(&evaluator, &scenario.system, &scenario.antenna, &scenario.params, cfg.eval.trials, seed)?;
    let row = CurveRow {
        m_observed: m,
        policy: policy.kind,
        j_budget: if policy.kind == PolicyKind::ModelAssisted { policy.lookup_budget } else { 0 },
        k_combine: policy.k,
        alpha: scenario.params.alpha,
        mu: scenario.params.mu,
        gamma_th_db: scenario.system.gamma_th_db,
        op: est.probability,
        ci_low: est.ci_low,
        ci_high: est.ci_high,
        trials: est.trials,
        seed,
    };
    curves::write_curve_csv(&out.join("eval_op.csv"), &[row])
}

/// Loads the cached model for `(scenario, m)` or trains and caches one.
pub fn model_for(cfg: &RunConfig, scenario: &Scenario, m: usize) -> Result<TrainedModel> {
    let dir = cfg.models_dir();
    let tag = format!(
        "m{m}_a{}_mu{}_{}",
        scenario.params.alpha,
        scenario.params.mu,
        cfg.model_fingerprint(scenario)?
    );
    let path = dir.join(format!("{tag}.bin"));
    if path.exists() {
        let model = TrainedModel::load(&path)?;
        if model.n_ports == scenario.antenna.n_ports && model.m_observed == m {
            info!("reusing {}", path.display());
            return Ok(model);
        }
    }
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let data = build_dataset(
        &scenario.system,
        &scenario.antenna,
        &scenario.params,
        m,
        cfg.dataset.m_labels,
        cfg.dataset.size,
        cfg.dataset_seed(),
    )?;
    let model = match cfg.eval.model_selection {
        ModelSelection::Study => {
            let log = dir.join(format!("{tag}_study"));
            // a rerun after an interrupted study starts a fresh log
            let _ = fs::remove_file(log.join("trials.jsonl"));
            let seed = derive_seed(cfg.study_seed(), m as u64);
            run_study(&cfg.hpo.space, &data, &cfg.study_settings(), seed, Some(&log))?.best_model
        }
        ModelSelection::Fixed => {
            let seed = derive_seed(cfg.train_seed(), m as u64);
            fit(&data, &cfg.train.architecture, &cfg.train.config(seed))?.0
        }
    };
    model.save(&path)?;
    Ok(model)
}

fn source(cfg: &RunConfig) -> impl FnMut(&Scenario, usize) -> Result<TrainedModel> + '_ {
    move |scenario: &Scenario, m: usize| model_for(cfg, scenario, m)
}

pub fn curve_observed(cfg: &RunConfig) -> Result<Vec<CurveRow>> {
    let scenario = cfg.scenario()?;
    let mut models = source(cfg);
    curves::observed_curve(
        &scenario,
        &cfg.eval.m_values,
        &cfg.eval.j_values,
        cfg.eval.trials,
        cfg.eval_seed(),
        &mut models,
    )
}

pub fn curve_mrc(cfg: &RunConfig) -> Result<Vec<CurveRow>> {
    let scenario = cfg.scenario()?;
    let mut models = source(cfg);
    curves::mrc_curve(
        &scenario,
        &cfg.eval.m_values,
        &cfg.eval.k_values,
        cfg.eval.mrc_model,
        cfg.eval.trials,
        cfg.eval_seed(),
        Some(&mut models as &mut ModelSource<'_>),
    )
}

pub fn curve_fading(cfg: &RunConfig) -> Result<Vec<CurveRow>> {
    let scenario = cfg.scenario()?;
    let mut models = source(cfg);
    let models = if cfg.eval.fading_model {
        Some(&mut models as &mut ModelSource<'_>)
    } else {
        None
    };
    curves::fading_curve(
        &scenario,
        &cfg.eval.fading,
        &cfg.eval.m_values,
        cfg.eval.lookup_budget,
        cfg.eval.trials,
        cfg.eval_seed(),
        models,
    )
}

fn sweep_classes(cfg: &RunConfig, out: &Path) -> Result<()> {
    let scenario = cfg.scenario()?;
    let log = out.join("sweep_classes");
    let _ = fs::remove_dir_all(&log);
    let table = class_count_sweep(
        &scenario,
        cfg.dataset.size,
        &cfg.hpo.sweep_observed,
        &cfg.hpo.sweep_m_labels,
        &cfg.hpo.space,
        &cfg.study_settings(),
        cfg.study_seed(),
        Some(&log),
    )?;
    let path = out.join("sweep_classes.csv");
    fs::write(&path, table.to_csv()).map_err(|e| Error::io(&path, e))?;
    write_json(&out.join("sweep_classes.json"), &table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_nest_and_parse_json() {
        let mut doc = Value::Object(Map::new());
        apply_override(&mut doc, "eval.trials=500").unwrap();
        apply_override(&mut doc, "system.gamma_th_db=\"-inf\"").unwrap();
        apply_override(&mut doc, "eval.policy=reference").unwrap();
        apply_override(&mut doc, "eval.m_values=[5,10]").unwrap();
        let cfg = RunConfig::from_value(doc).unwrap();
        assert_eq!(cfg.eval.trials, 500);
        assert_eq!(cfg.system.gamma_th_db, f64::NEG_INFINITY);
        assert_eq!(cfg.eval.policy, PolicyKind::Reference);
        assert_eq!(cfg.eval.m_values, vec![5, 10]);
        assert_eq!(cfg.channel, ChannelSection::default());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let mut doc = Value::Object(Map::new());
        apply_override(&mut doc, "eval.trails=5").unwrap();
        let err = RunConfig::from_value(doc).unwrap_err();
        assert_eq!(exit_code(&err), EXIT_CONFIG);
        assert!(apply_override(&mut Value::Null, "novalue").is_err());
        let doc = serde_json::json!({ "bogus": 1 });
        assert!(RunConfig::from_value(doc).is_err());
    }

    #[test]
    fn snapshot_round_trips() {
        let mut cfg = RunConfig::default();
        cfg.system.gamma_th_db = f64::NEG_INFINITY;
        let text = serde_json::to_string(&cfg).unwrap();
        let back = RunConfig::from_value(serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn exit_codes_are_distinct() {
        let codes = [
            exit_code(&Error::config("x")),
            exit_code(&Error::io("p", std::io::Error::other("x"))),
            exit_code(&Error::numeric("x")),
        ];
        assert_eq!(codes, [EXIT_CONFIG, EXIT_IO, EXIT_NUMERIC]);
    }

    #[test]
    fn seeds_are_distinct_streams() {
        let cfg = RunConfig::default();
        let seeds = [cfg.dataset_seed(), cfg.train_seed(), cfg.study_seed(), cfg.eval_seed()];
        for i in 0..seeds.len() {
            for j in i + 1..seeds.len() {
                assert_ne!(seeds[i], seeds[j]);
            }
        }
    }

    #[test]
    fn fingerprint_tracks_settings() {
        let scenario = Scenario::default();
        let a = RunConfig::default();
        let mut b = a.clone();
        b.hpo.budget = 3;
        assert_ne!(a.model_fingerprint(&scenario).unwrap(), b.model_fingerprint(&scenario).unwrap());
        let mut c = a.clone();
        c.eval.trials = 7;
        assert_eq!(a.model_fingerprint(&scenario).unwrap(), c.model_fingerprint(&scenario).unwrap());
    }
}
