//! Per-port and MRC-combined SINR, and Monte Carlo outage probability.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{AntennaConfig, ChannelGenerator, ChannelRealization, FadingParams};
use crate::error::{Error, Result};
use crate::selection::{self, ObservedPort, PolicyEvaluator};

/// How interferers enter the MRC denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterferenceMode {
    /// Interferer terms summed coherently inside each port's term.
    #[default]
    AsWritten,
    /// Per-interferer combiner output power, `Σ_ũ |Σ_n g_n* g̃_n|²`.
    Incoherent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemConfig {
    pub n_users: usize,
    pub signal_power: f64,
    pub noise_power: f64,
    #[serde(with = "crate::serde_ext::extended_f64")]
    pub gamma_th_db: f64,
    pub interference_mode: InterferenceMode,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            n_users: 2,
            signal_power: 1.0,
            noise_power: 1e-4,
            gamma_th_db: -2.0,
            interference_mode: InterferenceMode::AsWritten,
        }
    }
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_users == 0 {
            return Err(Error::config("n_users must be at least 1"));
        }
        if !(self.signal_power > 0.0 && self.signal_power.is_finite()) {
            return Err(Error::config("signal_power must be positive"));
        }
        if !(self.noise_power > 0.0 && self.noise_power.is_finite()) {
            return Err(Error::config("noise_power must be positive"));
        }
        if self.gamma_th_db.is_nan() {
            return Err(Error::config("gamma_th_db is NaN"));
        }
        Ok(())
    }

    /// Outage threshold in linear scale; `±∞` dB map to `0` and `∞`.
    pub fn threshold_linear(&self) -> f64 {
        10f64.powf(self.gamma_th_db / 10.0)
    }

    /// Average SNR `σ_s² / σ_η²` in dB.
    pub fn snr_db(&self) -> f64 {
        10.0 * (self.signal_power / self.noise_power).log10()
    }
}

/// Linear SINR at every port of the desired user.
#[derive(Debug, Clone, PartialEq)]
pub struct SinrVector {
    pub values: Vec<f64>,
    pub user_index: usize,
}

fn check_dims(realization: &ChannelRealization, system: &SystemConfig) -> Result<()> {
    if realization.n_users() != system.n_users {
        return Err(Error::shape(format!(
            "realization has {} BS antennas, system expects {}",
            realization.n_users(),
            system.n_users
        )));
    }
    Ok(())
}

/// SINR of user 0 at every port.
pub fn sinr_per_port(realization: &ChannelRealization, system: &SystemConfig) -> Result<SinrVector> {
    check_dims(realization, system)?;
    let own = realization.row(0);
    let mut interference = vec![0.0; realization.n_ports()];
    for u in 1..realization.n_users() {
        for (acc, g) in interference.iter_mut().zip(realization.row(u)) {
            *acc += g.norm_sqr();
        }
    }
    let values = own
        .iter()
        .zip(&interference)
        .map(|(g, i)| {
            system.signal_power * g.norm_sqr() / (system.signal_power * i + system.noise_power)
        })
        .collect();
    Ok(SinrVector {
        values,
        user_index: 0,
    })
}

/// Post-combining SINR when the ports in `selected` are combined by MRC.
pub fn sinr_mrc(
    realization: &ChannelRealization,
    system: &SystemConfig,
    selected: &[usize],
) -> Result<f64> {
    check_dims(realization, system)?;
    if selected.is_empty() {
        return Err(Error::Selection("MRC needs at least one port".into()));
    }
    let n = realization.n_ports();
    let mut seen = vec![false; n];
    for &p in selected {
        if p >= n {
            return Err(Error::Selection(format!("port {p} out of range 0..{n}")));
        }
        if std::mem::replace(&mut seen[p], true) {
            return Err(Error::Selection(format!("port {p} selected twice")));
        }
    }

    let own = realization.row(0);
    let signal: f64 = selected.iter().map(|&p| own[p].norm_sqr()).sum();
    let interference: f64 = match system.interference_mode {
        InterferenceMode::AsWritten => selected
            .iter()
            .map(|&p| {
                let coherent: Complex64 = (1..realization.n_users())
                    .map(|u| own[p].conj() * realization.gain(u, p))
                    .sum();
                coherent.norm_sqr()
            })
            .sum(),
        InterferenceMode::Incoherent => (1..realization.n_users())
            .map(|u| {
                let combined: Complex64 = selected
                    .iter()
                    .map(|&p| own[p].conj() * realization.gain(u, p))
                    .sum();
                combined.norm_sqr()
            })
            .sum(),
    };
    let denom = system.signal_power * interference + system.noise_power * signal;
    Ok(system.signal_power * signal * signal / denom)
}

/// Outage probability with a 95% Wilson score interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutageEstimate {
    pub probability: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub trials: u64,
    pub outages: u64,
}

const Z_95: f64 = 1.959_963_984_540_054;

impl OutageEstimate {
    pub fn from_counts(outages: u64, trials: u64) -> Self {
        assert!(trials > 0 && outages <= trials);
        let n = trials as f64;
        let p = outages as f64 / n;
        let z2 = Z_95 * Z_95;
        let denom = 1.0 + z2 / n;
        let center = (p + z2 / (2.0 * n)) / denom;
        let half = Z_95 / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
        Self {
            probability: p,
            ci_low: (center - half).clamp(0.0, p),
            ci_high: (center + half).clamp(p, 1.0),
            trials,
            outages,
        }
    }

    /// True when this estimate is significantly above `other` (disjoint CIs).
    pub fn significantly_above(&self, other: &OutageEstimate) -> bool {
        self.ci_low > other.ci_high
    }
}

/// Outage counts of several policies on one shared realization stream.
///
/// Realization `i` is always drawn from stream `i` of `master_seed`, so the
/// result does not depend on the rayon pool size.
pub fn estimate_outage_paired(
    generator: &ChannelGenerator,
    system: &SystemConfig,
    evaluators: &[PolicyEvaluator<'_>],
    trials: u64,
    master_seed: u64,
) -> Result<Vec<OutageEstimate>> {
    if trials == 0 {
        return Err(Error::config("trials must be at least 1"));
    }
    system.validate()?;
    for ev in evaluators {
        ev.validate(generator.antenna().n_ports)?;
    }
    const CHUNK: u64 = 512;
    let chunks: Vec<(u64, u64)> = (0..trials)
        .step_by(CHUNK as usize)
        .map(|start| (start, (start + CHUNK).min(trials)))
        .collect();
    let threshold = system.threshold_linear();

    let per_chunk: Vec<Vec<u64>> = chunks
        .par_iter()
        .map(|&(start, end)| {
            let realizations: Vec<ChannelRealization> = (start..end)
                .map(|i| generator.realization(master_seed, i))
                .collect();
            let sinrs = realizations
                .iter()
                .map(|r| sinr_per_port(r, system).map(|s| s.values))
                .collect::<Result<Vec<_>>>()?;
            let mut counts = vec![0u64; evaluators.len()];
            let mut cache = PredictionCache::default();
            for (slot, ev) in counts.iter_mut().zip(evaluators) {
                let scores = cache.scores(ev, &sinrs)?;
                for (t, sinr) in sinrs.iter().enumerate() {
                    let score = scores.map(|s| s[t].as_slice());
                    let selected = ev.select(sinr, score)?;
                    let value = if selected.len() == 1 {
                        sinr[selected[0]]
                    } else {
                        sinr_mrc(&realizations[t], system, &selected)?
                    };
                    if value < threshold {
                        *slot += 1;
                    }
                }
            }
            Ok(counts)
        })
        .collect::<Result<_>>()?;

    let mut totals = vec![0u64; evaluators.len()];
    for counts in per_chunk {
        for (t, c) in totals.iter_mut().zip(counts) {
            *t += c;
        }
    }
    Ok(totals
        .into_iter()
        .map(|k| OutageEstimate::from_counts(k, trials))
        .collect())
}

/// Single-policy convenience wrapper around [`estimate_outage_paired`].
pub fn estimate_outage(
    evaluator: &PolicyEvaluator<'_>,
    system: &SystemConfig,
    antenna: &AntennaConfig,
    params: &FadingParams,
    trials: u64,
    master_seed: u64,
) -> Result<OutageEstimate> {
    let generator = ChannelGenerator::new(system, antenna, params)?;
    Ok(estimate_outage_paired(
        &generator,
        system,
        std::slice::from_ref(evaluator),
        trials,
        master_seed,
    )?[0])
}

/// Per-port outage (K = 1) over precomputed ground-truth SINR vectors.
pub fn outage_on_sinr(
    evaluator: &PolicyEvaluator<'_>,
    sinrs: &[Vec<f64>],
    gamma_th_db: f64,
) -> Result<OutageEstimate> {
    if sinrs.is_empty() {
        return Err(Error::config("no samples to evaluate"));
    }
    if evaluator.policy.k != 1 {
        return Err(Error::config("outage on stored SINR supports K = 1 only"));
    }
    evaluator.validate(sinrs[0].len())?;
    let threshold = 10f64.powf(gamma_th_db / 10.0);
    let mut cache = PredictionCache::default();
    let scores = cache.scores(evaluator, sinrs)?;
    let mut outages = 0;
    for (t, sinr) in sinrs.iter().enumerate() {
        let selected = evaluator.select(sinr, scores.map(|s| s[t].as_slice()))?;
        if sinr[selected[0]] < threshold {
            outages += 1;
        }
    }
    Ok(OutageEstimate::from_counts(outages, sinrs.len() as u64))
}

/// Shares model predictions between evaluators that use the same predictor
/// and the same observed ports.
#[derive(Default)]
struct PredictionCache {
    entries: Vec<(usize, Vec<usize>, Vec<Vec<f64>>)>,
}

impl PredictionCache {
    fn scores(
        &mut self,
        ev: &PolicyEvaluator<'_>,
        sinrs: &[Vec<f64>],
    ) -> Result<Option<&Vec<Vec<f64>>>> {
        let Some(predictor) = ev.predictor else {
            return Ok(None);
        };
        if !ev.needs_predictions() {
            return Ok(None);
        }
        let key = predictor as *const dyn selection::PortPredictor as *const () as usize;
        let pos = self
            .entries
            .iter()
            .position(|(k, obs, _)| *k == key && *obs == ev.observed);
        let pos = match pos {
            Some(p) => p,
            None => {
                let batch: Vec<Vec<ObservedPort>> = sinrs
                    .iter()
                    .map(|s| ObservedPort::collect(s, &ev.observed))
                    .collect();
                let scores = predictor.predict_batch(&batch)?;
                self.entries.push((key, ev.observed.clone(), scores));
                self.entries.len() - 1
            }
        };
        Ok(Some(&self.entries[pos].2))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ChannelRealization;
    use crate::selection::{Policy, PolicyKind};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn sys(users: usize, noise: f64) -> SystemConfig {
        SystemConfig {
            n_users: users,
            signal_power: 1.0,
            noise_power: noise,
            ..Default::default()
        }
    }

    #[test]
    fn single_user_unit_gain() {
        let r = ChannelRealization::from_rows(vec![vec![c(1.0)]], 0).unwrap();
        let s = sinr_per_port(&r, &sys(1, 1.0)).unwrap();
        assert_eq!(s.values, vec![1.0]);
    }

    #[test]
    fn two_user_arithmetic() {
        let r = ChannelRealization::from_rows(vec![vec![c(1.0)], vec![c(0.5)]], 0).unwrap();
        let s = sinr_per_port(&r, &sys(2, 0.1)).unwrap();
        assert!((s.values[0] - 1.0 / 0.35).abs() < 1e-12);
    }

    #[test]
    fn sinr_drops_with_stronger_interferer() {
        let weak = ChannelRealization::from_rows(vec![vec![c(1.0)], vec![c(0.3)]], 0).unwrap();
        let strong = ChannelRealization::from_rows(vec![vec![c(1.0)], vec![c(0.4)]], 0).unwrap();
        let a = sinr_per_port(&weak, &sys(2, 0.01)).unwrap().values[0];
        let b = sinr_per_port(&strong, &sys(2, 0.01)).unwrap().values[0];
        assert!(b < a);
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let r = ChannelRealization::from_rows(vec![vec![c(1.0)]], 0).unwrap();
        assert!(matches!(sinr_per_port(&r, &sys(2, 1.0)), Err(Error::Shape(_))));
    }

    #[test]
    fn mrc_hand_arithmetic() {
        let r = ChannelRealization::from_rows(vec![vec![c(1.0), c(1.0)]], 0).unwrap();
        let v = sinr_mrc(&r, &sys(1, 1.0), &[0, 1]).unwrap();
        assert!((v - 2.0).abs() < 1e-15);
    }

    #[test]
    fn mrc_rejects_bad_sets() {
        let r = ChannelRealization::from_rows(vec![vec![c(1.0), c(1.0)]], 0).unwrap();
        assert!(sinr_mrc(&r, &sys(1, 1.0), &[]).is_err());
        assert!(sinr_mrc(&r, &sys(1, 1.0), &[1, 1]).is_err());
        assert!(sinr_mrc(&r, &sys(1, 1.0), &[2]).is_err());
    }

    #[test]
    fn mrc_without_interference_is_snr_sum() {
        let gains = vec![Complex64::new(0.3, -1.2), Complex64::new(0.8, 0.1), c(2.0)];
        let r = ChannelRealization::from_rows(vec![gains.clone()], 0).unwrap();
        let system = SystemConfig {
            n_users: 1,
            signal_power: 2.0,
            noise_power: 0.5,
            ..Default::default()
        };
        let v = sinr_mrc(&r, &system, &[0, 2]).unwrap();
        let expect = 4.0 * (gains[0].norm_sqr() + gains[2].norm_sqr());
        assert!((v - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn interference_modes_differ_beyond_two_users() {
        let r = ChannelRealization::from_rows(
            vec![vec![c(1.0)], vec![c(0.5)], vec![c(-0.5)]],
            0,
        )
        .unwrap();
        let mut system = sys(3, 0.1);
        let written = sinr_mrc(&r, &system, &[0]).unwrap();
        system.interference_mode = InterferenceMode::Incoherent;
        let incoherent = sinr_mrc(&r, &system, &[0]).unwrap();
        let per_port = sinr_per_port(&r, &system).unwrap().values[0];
        // coherent sum cancels the two interferers
        assert!((written - 10.0).abs() < 1e-12);
        assert!((incoherent - per_port).abs() < 1e-12);
    }

    #[test]
    fn wilson_interval_brackets_estimate() {
        for &(k, n) in &[(0, 10), (10, 10), (3, 1000), (500, 1000)] {
            let e = OutageEstimate::from_counts(k, n);
            assert!(e.ci_low <= e.probability && e.probability <= e.ci_high);
            assert!(e.ci_low >= 0.0 && e.ci_high <= 1.0);
        }
        // textbook value: 5 of 100 -> [0.0215, 0.1118]
        let e = OutageEstimate::from_counts(5, 100);
        assert!((e.ci_low - 0.021_544).abs() < 1e-5);
        assert!((e.ci_high - 0.111_752).abs() < 1e-5);
    }

    #[test]
    fn infinite_thresholds() {
        let antenna = AntennaConfig {
            n_ports: 10,
            aperture: 2.0,
        };
        let params = FadingParams::normalized(2.0, 2).unwrap();
        let ideal = PolicyEvaluator::new(Policy::new(PolicyKind::Ideal, 1, 1), None, None);
        for (db, expect) in [(f64::NEG_INFINITY, 0.0), (f64::INFINITY, 1.0)] {
            let system = SystemConfig {
                gamma_th_db: db,
                ..Default::default()
            };
            let e = estimate_outage(&ideal, &system, &antenna, &params, 500, 3).unwrap();
            assert_eq!(e.probability, expect);
        }
    }
}
