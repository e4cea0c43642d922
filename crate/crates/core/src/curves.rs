//! Outage curves over the number of observed ports, and their CSV form.
//!
//! Within one curve every row is estimated on the same realization stream,
//! so differences between rows are paired comparisons.

use std::path::Path;

use log::info;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fama::{estimate_outage_paired, OutageEstimate};
use crate::predictor::TrainedModel;
use crate::scenario::Scenario;
use crate::selection::{Policy, PolicyEvaluator, PolicyKind};

/// Column order is part of the file format.
pub const CURVE_COLUMNS: [&str; 12] = [
    "m_observed",
    "policy",
    "j_budget",
    "k_combine",
    "alpha",
    "mu",
    "gamma_th_db",
    "op",
    "ci_low",
    "ci_high",
    "trials",
    "seed",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub m_observed: usize,
    pub policy: PolicyKind,
    /// 0 for policies without a predictor.
    pub j_budget: usize,
    pub k_combine: usize,
    pub alpha: f64,
    pub mu: u32,
    #[serde(with = "crate::serde_ext::extended_f64")]
    pub gamma_th_db: f64,
    pub op: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub trials: u64,
    pub seed: u64,
}

impl CurveRow {
    fn new(m_observed: usize, policy: &Policy, scenario: &Scenario, est: &OutageEstimate, seed: u64) -> Self {
        Self {
            m_observed,
            policy: policy.kind,
            j_budget: if policy.kind == PolicyKind::ModelAssisted {
                policy.lookup_budget
            } else {
                0
            },
            k_combine: policy.k,
            alpha: scenario.params.alpha,
            mu: scenario.params.mu,
            gamma_th_db: scenario.system.gamma_th_db,
            op: est.probability,
            ci_low: est.ci_low,
            ci_high: est.ci_high,
            trials: est.trials,
            seed,
        }
    }

    pub fn estimate(&self) -> OutageEstimate {
        OutageEstimate {
            probability: self.op,
            ci_low: self.ci_low,
            ci_high: self.ci_high,
            trials: self.trials,
            outages: (self.op * self.trials as f64).round() as u64,
        }
    }
}

pub fn write_curve_csv(path: &Path, rows: &[CurveRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    if rows.is_empty() {
        w.write_record(CURVE_COLUMNS).map_err(|e| csv_error(path, e))?;
    }
    for row in rows {
        w.serialize(row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_curve_csv(path: &Path) -> Result<Vec<CurveRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let headers = r.headers().map_err(|e| csv_error(path, e))?;
    if headers.iter().ne(CURVE_COLUMNS) {
        return Err(Error::format(path, "curve columns do not match the schema"));
    }
    r.deserialize()
        .map(|row| row.map_err(|e| csv_error(path, e)))
        .collect()
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            _ => unreachable!(),
        }
    } else {
        Error::format(path, e.to_string())
    }
}

/// Supplies a trained predictor for a scenario and observed-port count.
pub type ModelSource<'a> = dyn FnMut(&Scenario, usize) -> Result<TrainedModel> + 'a;

fn sorted(values: &[usize]) -> Vec<usize> {
    let mut v = values.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

/// Estimates every policy at every `m` in one paired pass per `m`.
fn paired_rows(
    scenario: &Scenario,
    m_values: &[usize],
    trials: u64,
    seed: u64,
    models: Option<&mut ModelSource<'_>>,
    policies: impl Fn(usize) -> Vec<Policy>,
) -> Result<Vec<CurveRow>> {
    let generator = scenario.generator()?;
    let n = scenario.antenna.n_ports;
    let mut models = models;
    let mut rows = Vec::new();
    for m in sorted(m_values) {
        let wanted = policies(m);
        let model = if wanted.iter().any(|p| p.kind == PolicyKind::ModelAssisted) {
            let source = models
                .as_mut()
                .ok_or_else(|| Error::config("model-assisted rows need a model source"))?;
            Some(source(scenario, m)?)
        } else {
            None
        };
        let evaluators = wanted
            .iter()
            .map(|p| {
                let predictor = model.as_ref().map(|m| m as &dyn crate::selection::PortPredictor);
                PolicyEvaluator::uniform(*p, n, m, predictor)
            })
            .collect::<Result<Vec<_>>>()?;
        let estimates = estimate_outage_paired(&generator, &scenario.system, &evaluators, trials, seed)?;
        for (p, est) in wanted.iter().zip(&estimates) {
            rows.push(CurveRow::new(m, p, scenario, est, seed));
        }
        info!(
            "m = {m}: {}",
            wanted
                .iter()
                .zip(&estimates)
                .map(|(p, e)| format!("{}(J={},K={})={:.3e}", p.kind, p.lookup_budget, p.k, e.probability))
                .collect::<Vec<_>>()
                .join(" ")
        );
    }
    Ok(rows)
}

/// Ideal, reference and model-assisted (one row per `J`) selection, K = 1.
pub fn observed_curve(
    scenario: &Scenario,
    m_values: &[usize],
    j_values: &[usize],
    trials: u64,
    seed: u64,
    models: &mut ModelSource<'_>,
) -> Result<Vec<CurveRow>> {
    paired_rows(scenario, m_values, trials, seed, Some(models), |_| {
        [Policy::ideal(), Policy::reference()]
            .into_iter()
            .chain(j_values.iter().map(|&j| Policy::model_assisted(j)))
            .collect()
    })
}

/// MRC over the `K` best permitted ports. Model-assisted rows look up
/// `J = K` predicted ports; reference rows with `K > m` are skipped.
pub fn mrc_curve(
    scenario: &Scenario,
    m_values: &[usize],
    k_values: &[usize],
    with_model: bool,
    trials: u64,
    seed: u64,
    models: Option<&mut ModelSource<'_>>,
) -> Result<Vec<CurveRow>> {
    paired_rows(scenario, m_values, trials, seed, models, |m| {
        let mut out = Vec::new();
        for &k in k_values {
            out.push(Policy::ideal().with_k(k));
            if k <= m {
                out.push(Policy::reference().with_k(k));
            }
            if with_model {
                out.push(Policy::model_assisted(k).with_k(k));
            }
        }
        out
    })
}

/// Which fading shapes a fading sweep visits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FadingSweep {
    /// α values, each at `fixed_mu`.
    pub alpha_values: Vec<f64>,
    pub fixed_mu: u32,
    /// μ values, each at `fixed_alpha`.
    pub mu_values: Vec<u32>,
    pub fixed_alpha: f64,
}

impl Default for FadingSweep {
    fn default() -> Self {
        Self {
            alpha_values: vec![1.5, 2.0, 3.0],
            fixed_mu: 2,
            mu_values: vec![1, 2, 3],
            fixed_alpha: 2.0,
        }
    }
}

impl FadingSweep {
    /// Distinct `(α, μ)` pairs, α sweep first.
    pub fn points(&self) -> Vec<(f64, u32)> {
        let mut out: Vec<(f64, u32)> = Vec::new();
        let alpha_sweep = self.alpha_values.iter().map(|&a| (a, self.fixed_mu));
        let mu_sweep = self.mu_values.iter().map(|&m| (self.fixed_alpha, m));
        for p in alpha_sweep.chain(mu_sweep) {
            if !out.contains(&p) {
                out.push(p);
            }
        }
        out
    }
}

/// Ideal and reference rows (plus model-assisted rows at `J = j_budget`
/// when a model source is given) for every fading shape of `sweep`.
pub fn fading_curve(
    base: &Scenario,
    sweep: &FadingSweep,
    m_values: &[usize],
    j_budget: usize,
    trials: u64,
    seed: u64,
    mut models: Option<&mut ModelSource<'_>>,
) -> Result<Vec<CurveRow>> {
    let with_model = models.is_some();
    let mut rows = Vec::new();
    for (alpha, mu) in sweep.points() {
        let scenario = base.with_fading(alpha, mu)?;
        rows.extend(paired_rows(&scenario, m_values, trials, seed, models.as_deref_mut(), |_| {
            let mut p = vec![Policy::ideal(), Policy::reference()];
            if with_model {
                p.push(Policy::model_assisted(j_budget));
            }
            p
        })?);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::AntennaConfig;

    fn small() -> Scenario {
        Scenario {
            antenna: AntennaConfig {
                n_ports: 20,
                aperture: 1.0,
            },
            ..Scenario::default()
        }
    }

    #[test]
    fn csv_round_trip_with_infinite_threshold() {
        let mut s = small();
        s.system.gamma_th_db = f64::NEG_INFINITY;
        let rows = mrc_curve(&s, &[4], &[1, 2], false, 200, 3, None).unwrap();
        assert!(rows.iter().all(|r| r.op == 0.0));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.csv");
        write_curve_csv(&path, &rows).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().next().unwrap(), CURVE_COLUMNS.join(","));
        assert!(text.contains(",-inf,"));
        assert_eq!(read_curve_csv(&path).unwrap(), rows);
    }

    #[test]
    fn header_mismatch_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.csv");
        std::fs::write(&path, "m,policy\n1,ideal\n").unwrap();
        assert!(matches!(read_curve_csv(&path), Err(Error::Format { .. })));
    }

    #[test]
    fn reference_rows_skip_k_above_m() {
        let rows = mrc_curve(&small(), &[2], &[1, 2, 4], false, 50, 1, None).unwrap();
        let refs: Vec<usize> = rows
            .iter()
            .filter(|r| r.policy == PolicyKind::Reference)
            .map(|r| r.k_combine)
            .collect();
        assert_eq!(refs, vec![1, 2]);
    }

    #[test]
    fn fading_points_are_distinct() {
        let pts = FadingSweep::default().points();
        assert_eq!(pts, vec![(1.5, 2), (2.0, 2), (3.0, 2), (2.0, 1), (2.0, 3)]);
    }

    #[test]
    fn model_rows_require_a_source() {
        let mut source = |_: &Scenario, _: usize| -> Result<TrainedModel> { Err(Error::config("none")) };
        assert!(observed_curve(&small(), &[4], &[1], 10, 1, &mut source).is_err());
    }
}
