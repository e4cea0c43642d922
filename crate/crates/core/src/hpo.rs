//! Random-search hyperparameter optimization and the class-count sweep.
//!
//! Every trial owns a seed derived from the study seed and its index, so a
//! trial's result depends on nothing but `(space, data, settings, index)`:
//! the order or thread in which trials run is irrelevant.

use std::collections::BTreeMap;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use log::{info, warn};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{build_dataset, DatasetSplit, GroundTruth};
use crate::error::{Error, Result};
use crate::fama::{outage_on_sinr, OutageEstimate};
use crate::nn::{LossKind, TrainConfig};
use crate::predictor::{fit, Architecture, TrainedModel};
use crate::rng::{derive_seed, stream_rng};
use crate::scenario::Scenario;
use crate::selection::{ObservedPort, Policy, PolicyEvaluator, PortPredictor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preprocessing {
    Standardize,
    /// Standardization followed by PCA; implies the dense baseline.
    StandardizePca,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SearchSpace {
    /// Inclusive, sampled log-uniformly.
    pub ltc_units: (usize, usize),
    /// Inclusive, sampled uniformly.
    pub dense_layers: (usize, usize),
    /// Inclusive, sampled log-uniformly per layer.
    pub dense_width: (usize, usize),
    /// Sampled log-uniformly.
    pub learning_rate: (f64, f64),
    pub losses: Vec<LossKind>,
    pub preprocessing: Vec<Preprocessing>,
    pub m_labels: Vec<usize>,
}

impl Default for SearchSpace {
    fn default() -> Self {
        Self {
            ltc_units: (8, 128),
            dense_layers: (1, 3),
            dense_width: (16, 256),
            learning_rate: (1e-4, 1e-2),
            losses: vec![LossKind::Bce, LossKind::SoftF1],
            preprocessing: vec![Preprocessing::Standardize, Preprocessing::StandardizePca],
            m_labels: vec![1, 2, 3, 4, 5, 10],
        }
    }
}

impl SearchSpace {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.ltc_units;
        if lo == 0 || lo > hi {
            return Err(Error::config("ltc_units range must satisfy 1 <= lo <= hi"));
        }
        let (lo, hi) = self.dense_layers;
        if lo == 0 || lo > hi {
            return Err(Error::config("dense_layers range must satisfy 1 <= lo <= hi"));
        }
        let (lo, hi) = self.dense_width;
        if lo == 0 || lo > hi {
            return Err(Error::config("dense_width range must satisfy 1 <= lo <= hi"));
        }
        let (lo, hi) = self.learning_rate;
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return Err(Error::config("learning_rate range must satisfy 0 < lo <= hi"));
        }
        if self.losses.is_empty() || self.preprocessing.is_empty() || self.m_labels.is_empty() {
            return Err(Error::config("search space choices must be non-empty"));
        }
        if self.m_labels.contains(&0) {
            return Err(Error::config("m_labels choices must be positive"));
        }
        Ok(())
    }

    /// The same space with the class count pinned.
    pub fn with_m_labels(&self, m_labels: usize) -> Self {
        Self {
            m_labels: vec![m_labels],
            ..self.clone()
        }
    }
}

/// One sampled configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub ltc_units: usize,
    pub dense_layers: Vec<usize>,
    pub learning_rate: f64,
    pub loss: LossKind,
    pub preprocessing: Preprocessing,
    pub m_labels: usize,
}

impl TrialConfig {
    pub fn architecture(&self) -> Architecture {
        let pca = self.preprocessing == Preprocessing::StandardizePca;
        Architecture {
            ltc_units: if pca { 0 } else { self.ltc_units },
            dense_layers: self.dense_layers.clone(),
            pca,
            ..Architecture::default()
        }
    }
}

fn log_uniform_int(rng: &mut impl Rng, (lo, hi): (usize, usize)) -> usize {
    let v = rng.gen_range((lo as f64).ln()..((hi + 1) as f64).ln()).exp();
    (v.floor() as usize).clamp(lo, hi)
}

fn pick<T: Copy>(rng: &mut impl Rng, choices: &[T]) -> T {
    choices[rng.gen_range(0..choices.len())]
}

/// Draws one configuration. Every axis is drawn, in a fixed order, even when
/// a later choice makes it irrelevant, so axes stay independent.
pub fn sample_trial(space: &SearchSpace, seed: u64) -> TrialConfig {
    let mut rng = stream_rng(seed, 0);
    let ltc_units = log_uniform_int(&mut rng, space.ltc_units);
    let depth = rng.gen_range(space.dense_layers.0..=space.dense_layers.1);
    let dense_layers = (0..space.dense_layers.1)
        .map(|_| log_uniform_int(&mut rng, space.dense_width))
        .take(depth)
        .collect();
    let (lo, hi) = space.learning_rate;
    let learning_rate = if lo == hi {
        lo
    } else {
        rng.gen_range(lo.ln()..hi.ln()).exp()
    };
    TrialConfig {
        ltc_units,
        dense_layers,
        learning_rate,
        loss: pick(&mut rng, &space.losses),
        preprocessing: pick(&mut rng, &space.preprocessing),
        m_labels: pick(&mut rng, &space.m_labels),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// Outage of the model-assisted policy (J = 1, K = 1) on the validation split.
    #[default]
    ValidationOutage,
    /// Best validation loss; cheap fallback for smoke runs.
    ValidationLoss,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StudySettings {
    pub budget: usize,
    pub objective: Objective,
    /// Epoch cap, batch size and patience; learning rate, loss and seed
    /// come from each trial.
    pub train: TrainConfig,
    #[serde(with = "crate::serde_ext::extended_f64")]
    pub gamma_th_db: f64,
}

impl Default for StudySettings {
    fn default() -> Self {
        Self {
            budget: 20,
            objective: Objective::ValidationOutage,
            train: TrainConfig::default(),
            gamma_th_db: -2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub index: usize,
    pub seed: u64,
    pub config: TrialConfig,
    /// `None` when the trial failed.
    pub objective: Option<f64>,
    pub validation_outage: Option<OutageEstimate>,
    pub validation_loss: Option<f64>,
    /// Mean SINR shortfall of the selected port against the best port, in
    /// dB; breaks objective ties.
    pub validation_gap_db: Option<f64>,
    pub best_epoch: Option<usize>,
    pub diverged: bool,
    pub error: Option<String>,
    pub elapsed_secs: f64,
}

impl Trial {
    pub fn succeeded(&self) -> bool {
        self.objective.is_some()
    }

    fn rank_key(&self) -> (f64, f64, usize) {
        (
            self.objective.unwrap_or(f64::INFINITY),
            self.validation_gap_db.unwrap_or(f64::INFINITY),
            self.index,
        )
    }
}

pub struct StudyResult {
    pub trials: Vec<Trial>,
    /// Index into `trials`.
    pub best: usize,
    pub best_model: TrainedModel,
}

impl StudyResult {
    pub fn best_trial(&self) -> &Trial {
        &self.trials[self.best]
    }
}

/// SINR shortfall of the policy's choice and the K = 1 outage on `truth`.
pub fn validation_metrics(
    model: &TrainedModel,
    truth: &[Vec<f64>],
    gamma_th_db: f64,
) -> Result<(OutageEstimate, f64)> {
    let ev = PolicyEvaluator::uniform(Policy::model_assisted(1), model.n_ports, model.m_observed, Some(model))?;
    let op = outage_on_sinr(&ev, truth, gamma_th_db)?;
    let batch: Vec<Vec<ObservedPort>> = truth
        .iter()
        .map(|s| ObservedPort::collect(s, &ev.observed))
        .collect();
    let scores = model.predict_batch(&batch)?;
    let mut gap = 0.0;
    for (sinr, score) in truth.iter().zip(&scores) {
        let chosen = ev.select(sinr, Some(score))?[0];
        let best = sinr.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        gap += 10.0 * (best / sinr[chosen]).log10();
    }
    Ok((op, gap / truth.len() as f64))
}

/// Datasets relabeled for every class count the trials will need.
pub struct LabeledData {
    by_m: BTreeMap<usize, DatasetSplit>,
    validation_truth: Vec<Vec<f64>>,
}

impl LabeledData {
    pub fn new(data: &DatasetSplit, m_values: impl IntoIterator<Item = usize>) -> Result<Self> {
        let truth = data.all_ground_truth()?;
        Self::with_truth(data, &truth, m_values)
    }

    pub fn with_truth(
        data: &DatasetSplit,
        truth: &GroundTruth,
        m_values: impl IntoIterator<Item = usize>,
    ) -> Result<Self> {
        let mut by_m = BTreeMap::new();
        for m in m_values {
            if let std::collections::btree_map::Entry::Vacant(e) = by_m.entry(m) {
                e.insert(data.relabel_with(truth, m)?);
            }
        }
        Ok(Self {
            by_m,
            validation_truth: truth.validation.clone(),
        })
    }

    fn get(&self, m_labels: usize) -> Result<&DatasetSplit> {
        self.by_m
            .get(&m_labels)
            .ok_or_else(|| Error::config(format!("no dataset prepared for M = {m_labels}")))
    }
}

fn trial_seed(master_seed: u64, index: usize) -> u64 {
    derive_seed(master_seed, index as u64)
}

/// Trains and scores one trial. Failures are recorded, not propagated.
pub fn run_trial(
    space: &SearchSpace,
    data: &LabeledData,
    settings: &StudySettings,
    master_seed: u64,
    index: usize,
) -> (Trial, Option<TrainedModel>) {
    let seed = trial_seed(master_seed, index);
    let config = sample_trial(space, seed);
    let started = Instant::now();
    let mut trial = Trial {
        index,
        seed,
        config: config.clone(),
        objective: None,
        validation_outage: None,
        validation_loss: None,
        validation_gap_db: None,
        best_epoch: None,
        diverged: false,
        error: None,
        elapsed_secs: 0.0,
    };
    let result = (|| -> Result<TrainedModel> {
        let split = data.get(config.m_labels)?;
        let train = TrainConfig {
            learning_rate: config.learning_rate,
            loss: config.loss,
            seed: derive_seed(seed, 1),
            ..settings.train.clone()
        };
        let (model, outcome) = fit(split, &config.architecture(), &train)?;
        trial.validation_loss = Some(outcome.best_validation_loss);
        trial.best_epoch = Some(outcome.best_epoch);
        trial.diverged = outcome.diverged;
        let (op, gap) = validation_metrics(&model, &data.validation_truth, settings.gamma_th_db)?;
        trial.validation_outage = Some(op);
        trial.validation_gap_db = Some(gap);
        let objective = match settings.objective {
            Objective::ValidationOutage => op.probability,
            Objective::ValidationLoss => outcome.best_validation_loss,
        };
        if !objective.is_finite() {
            return Err(Error::numeric("non-finite objective"));
        }
        trial.objective = Some(objective);
        Ok(model)
    })();
    trial.elapsed_secs = started.elapsed().as_secs_f64();
    match result {
        Ok(model) => (trial, Some(model)),
        Err(e) => {
            warn!("trial {index} failed: {e}");
            trial.objective = None;
            trial.error = Some(e.to_string());
            (trial, None)
        }
    }
}

/// Runs trials `indices` in the given order.
pub fn run_trials(
    space: &SearchSpace,
    data: &LabeledData,
    settings: &StudySettings,
    master_seed: u64,
    indices: &[usize],
) -> Vec<(Trial, Option<TrainedModel>)> {
    indices
        .par_iter()
        .map(|&i| run_trial(space, data, settings, master_seed, i))
        .collect()
}

/// Random search over `space` on `data`. When `log_dir` is given, one JSON
/// document per trial is appended to `trials.jsonl` there, in trial order.
pub fn run_study(
    space: &SearchSpace,
    data: &DatasetSplit,
    settings: &StudySettings,
    master_seed: u64,
    log_dir: Option<&Path>,
) -> Result<StudyResult> {
    space.validate()?;
    settings.train.validate()?;
    if settings.budget == 0 {
        return Err(Error::config("study budget must be at least 1"));
    }
    let configs: Vec<TrialConfig> = (0..settings.budget)
        .map(|i| sample_trial(space, trial_seed(master_seed, i)))
        .collect();
    let labeled = LabeledData::new(data, configs.iter().map(|c| c.m_labels))?;
    let indices: Vec<usize> = (0..settings.budget).collect();
    let results = run_trials(space, &labeled, settings, master_seed, &indices);

    if let Some(dir) = log_dir {
        append_trial_log(dir, results.iter().map(|(t, _)| t))?;
    }
    let best = results
        .iter()
        .filter(|(t, _)| t.succeeded())
        .min_by(|(a, _), (b, _)| a.rank_key().partial_cmp(&b.rank_key()).expect("finite keys"))
        .map(|(t, _)| t.index)
        .ok_or_else(|| Error::numeric("every trial in the study failed"))?;
    let (trials, models): (Vec<Trial>, Vec<Option<TrainedModel>>) = results.into_iter().unzip();
    let best_model = models
        .into_iter()
        .nth(best)
        .flatten()
        .expect("best trial has a model");
    info!(
        "study best: trial {best} objective {:?}",
        trials[best].objective
    );
    Ok(StudyResult {
        trials,
        best,
        best_model,
    })
}

pub fn append_trial_log<'a>(dir: &Path, trials: impl IntoIterator<Item = &'a Trial>) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join("trials.jsonl");
    let mut file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(&path)
        .map_err(|e| Error::io(&path, e))?;
    for t in trials {
        let line = serde_json::to_string(t)?;
        writeln!(file, "{line}").map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

/// Test-set outage by (observed ports, class count).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub observed: Vec<usize>,
    pub m_values: Vec<usize>,
    /// `cells[row][col]`; `None` marks a failed cell.
    pub cells: Vec<Vec<Option<OutageEstimate>>>,
}

impl SweepTable {
    /// Column index of the lowest outage in `row`, ties to the smaller `M`.
    pub fn row_argmin(&self, row: usize) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (j, cell) in self.cells[row].iter().enumerate() {
            if let Some(c) = cell {
                if best.is_none_or(|(_, p)| c.probability < p) {
                    best = Some((j, c.probability));
                }
            }
        }
        best.map(|(j, _)| j)
    }

    pub fn best_m(&self, row: usize) -> Option<usize> {
        self.row_argmin(row).map(|j| self.m_values[j])
    }

    /// Rows are observed-port counts, columns class counts, then the row's
    /// best class count. Failed cells are written as `NA`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("observed_ports");
        for m in &self.m_values {
            out.push_str(&format!(",M={m}"));
        }
        out.push_str(",best_m\n");
        for (i, m_obs) in self.observed.iter().enumerate() {
            out.push_str(&m_obs.to_string());
            for cell in &self.cells[i] {
                match cell {
                    Some(c) => out.push_str(&format!(",{}", c.probability)),
                    None => out.push_str(",NA"),
                }
            }
            match self.best_m(i) {
                Some(m) => out.push_str(&format!(",{m}\n")),
                None => out.push_str(",NA\n"),
            }
        }
        out
    }
}

/// One study per `(observed ports, M)` cell; each cell reports the test-set
/// outage of its best model under K = 1, J = 1.
#[allow(clippy::too_many_arguments)]
pub fn class_count_sweep(
    scenario: &Scenario,
    dataset_size: usize,
    observed_counts: &[usize],
    m_values: &[usize],
    space: &SearchSpace,
    settings: &StudySettings,
    seed: u64,
    log_dir: Option<&Path>,
) -> Result<SweepTable> {
    if observed_counts.is_empty() || m_values.is_empty() {
        return Err(Error::config("sweep axes must be non-empty"));
    }
    let data_seed = derive_seed(seed, u64::from_le_bytes(*b"dataset\0"));
    let mut cells = Vec::with_capacity(observed_counts.len());
    for (row, &m_obs) in observed_counts.iter().enumerate() {
        let base = build_dataset(
            &scenario.system,
            &scenario.antenna,
            &scenario.params,
            m_obs,
            m_values[0],
            dataset_size,
            data_seed,
        )?;
        let truth = base.all_ground_truth()?;
        let mut line = Vec::with_capacity(m_values.len());
        for (col, &m) in m_values.iter().enumerate() {
            let cell_seed = derive_seed(seed, ((row as u64) << 32) | col as u64);
            let cell_dir = log_dir.map(|d| d.join(format!("m{m_obs}_M{m}")));
            let cell = base.relabel_with(&truth, m).and_then(|data| {
                let study = run_study(&space.with_m_labels(m), &data, settings, cell_seed, cell_dir.as_deref())?;
                let ev = PolicyEvaluator::uniform(
                    Policy::model_assisted(1),
                    data.meta.n_ports,
                    m_obs,
                    Some(&study.best_model),
                )?;
                outage_on_sinr(&ev, &truth.test, settings.gamma_th_db)
            });
            match cell {
                Ok(c) => line.push(Some(c)),
                Err(e) => {
                    warn!("sweep cell (m = {m_obs}, M = {m}) failed: {e}");
                    line.push(None);
                }
            }
        }
        cells.push(line);
    }
    Ok(SweepTable {
        observed: observed_counts.to_vec(),
        m_values: m_values.to_vec(),
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{AntennaConfig, FadingParams};
    use crate::fama::SystemConfig;

    fn tiny_data() -> DatasetSplit {
        let antenna = AntennaConfig {
            n_ports: 12,
            aperture: 1.5,
        };
        let params = FadingParams::normalized(2.0, 1).unwrap();
        build_dataset(&SystemConfig::default(), &antenna, &params, 3, 1, 120, 9).unwrap()
    }

    fn tiny_space() -> SearchSpace {
        SearchSpace {
            ltc_units: (2, 6),
            dense_layers: (1, 2),
            dense_width: (4, 12),
            m_labels: vec![1, 2, 3],
            ..SearchSpace::default()
        }
    }

    fn tiny_settings(budget: usize) -> StudySettings {
        StudySettings {
            budget,
            train: TrainConfig {
                epochs: 2,
                batch_size: 32,
                ..TrainConfig::default()
            },
            ..StudySettings::default()
        }
    }

    #[test]
    fn sampling_is_deterministic_and_in_range() {
        let space = SearchSpace::default();
        assert_eq!(sample_trial(&space, 4), sample_trial(&space, 4));
        for seed in 0..500 {
            let c = sample_trial(&space, seed);
            assert!((8..=128).contains(&c.ltc_units));
            assert!((1..=3).contains(&c.dense_layers.len()));
            assert!(c.dense_layers.iter().all(|w| (16..=256).contains(w)));
            assert!((1e-4..=1e-2).contains(&c.learning_rate));
            assert!(space.m_labels.contains(&c.m_labels));
        }
    }

    #[test]
    fn every_discrete_option_appears() {
        let space = SearchSpace::default();
        let samples: Vec<TrialConfig> = (0..1000).map(|s| sample_trial(&space, s)).collect();
        for m in &space.m_labels {
            assert!(samples.iter().any(|c| c.m_labels == *m), "M = {m}");
        }
        for l in &space.losses {
            assert!(samples.iter().any(|c| c.loss == *l));
        }
        for p in &space.preprocessing {
            assert!(samples.iter().any(|c| c.preprocessing == *p));
        }
        for d in 1..=3 {
            assert!(samples.iter().any(|c| c.dense_layers.len() == d));
        }
        // log-uniform endpoints are reachable
        assert!(samples.iter().any(|c| c.ltc_units < 12));
        assert!(samples.iter().any(|c| c.ltc_units > 100));
    }

    #[test]
    fn pca_implies_dense_baseline() {
        let space = SearchSpace::default();
        for seed in 0..200 {
            let c = sample_trial(&space, seed);
            let arch = c.architecture();
            assert_eq!(arch.pca, c.preprocessing == Preprocessing::StandardizePca);
            if arch.pca {
                assert_eq!(arch.ltc_units, 0);
            }
            arch.validate().unwrap();
        }
    }

    #[test]
    fn budget_one_selects_the_sole_trial() {
        let study = run_study(&tiny_space(), &tiny_data(), &tiny_settings(1), 3, None).unwrap();
        assert_eq!(study.trials.len(), 1);
        assert_eq!(study.best, 0);
    }

    #[test]
    fn best_is_minimal_and_study_is_deterministic() {
        let data = tiny_data();
        let a = run_study(&tiny_space(), &data, &tiny_settings(4), 11, None).unwrap();
        let best = a.best_trial().objective.unwrap();
        for t in &a.trials {
            if let Some(o) = t.objective {
                assert!(best <= o);
            }
        }
        let b = run_study(&tiny_space(), &data, &tiny_settings(4), 11, None).unwrap();
        assert_eq!(a.best, b.best);
        assert_eq!(a.best_trial().config, b.best_trial().config);
        assert_eq!(a.best_model, b.best_model);
    }

    #[test]
    fn trial_order_does_not_matter() {
        let data = tiny_data();
        let space = tiny_space();
        let settings = tiny_settings(4);
        let labeled = LabeledData::new(&data, space.m_labels.clone()).unwrap();
        let forward = run_trials(&space, &labeled, &settings, 5, &[0, 1, 2, 3]);
        let reversed = run_trials(&space, &labeled, &settings, 5, &[3, 1, 0, 2]);
        for (t, model) in &forward {
            let (u, other) = reversed.iter().find(|(u, _)| u.index == t.index).unwrap();
            assert_eq!(t.config, u.config);
            assert_eq!(t.objective, u.objective);
            assert_eq!(t.validation_loss, u.validation_loss);
            assert_eq!(model, other);
        }
    }

    #[test]
    fn trial_log_has_one_line_per_trial() {
        let dir = tempfile::tempdir().unwrap();
        run_study(&tiny_space(), &tiny_data(), &tiny_settings(3), 2, Some(dir.path())).unwrap();
        let text = std::fs::read_to_string(dir.path().join("trials.jsonl")).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        for (i, line) in lines.iter().enumerate() {
            let t: Trial = serde_json::from_str(line).unwrap();
            assert_eq!(t.index, i);
        }
    }

    #[test]
    fn failed_trials_are_recorded() {
        // M = 20 exceeds the 12 ports, so relabeling fails for that choice
        let mut space = tiny_space();
        space.m_labels = vec![1, 20];
        let data = tiny_data();
        let labeled = LabeledData::new(&data, [1]).unwrap();
        let results = run_trials(&space, &labeled, &tiny_settings(8), 1, &(0..8).collect::<Vec<_>>());
        assert!(results.iter().any(|(t, _)| !t.succeeded() && t.error.is_some()));
        assert!(results.iter().any(|(t, _)| t.succeeded()));
    }

    #[test]
    fn sweep_table_argmin_matches_rows() {
        let c = |p: f64| Some(OutageEstimate::from_counts((p * 1000.0) as u64, 1000));
        let table = SweepTable {
            observed: vec![5, 10],
            m_values: vec![1, 2, 3],
            cells: vec![vec![c(0.2), c(0.1), c(0.1)], vec![None, c(0.05), c(0.01)]],
        };
        assert_eq!(table.best_m(0), Some(2));
        assert_eq!(table.best_m(1), Some(3));
        let csv = table.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "observed_ports,M=1,M=2,M=3,best_m");
        assert_eq!(lines[1], "5,0.2,0.1,0.1,2");
        assert_eq!(lines[2], "10,NA,0.05,0.01,3");
    }

    #[test]
    fn small_sweep_has_table_shape() {
        let scenario = Scenario {
            system: SystemConfig::default(),
            antenna: AntennaConfig {
                n_ports: 12,
                aperture: 1.5,
            },
            params: FadingParams::normalized(2.0, 1).unwrap(),
        };
        let table = class_count_sweep(
            &scenario,
            100,
            &[3, 4],
            &[1, 2],
            &tiny_space(),
            &tiny_settings(1),
            7,
            None,
        )
        .unwrap();
        assert_eq!(table.cells.len(), 2);
        for row in 0..2 {
            let j = table.row_argmin(row).unwrap();
            let min = table.cells[row]
                .iter()
                .flatten()
                .map(|c| c.probability)
                .fold(f64::INFINITY, f64::min);
            assert_eq!(table.cells[row][j].unwrap().probability, min);
        }
    }
}
