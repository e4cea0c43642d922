//! Observed-port placement and the port selection policies.
//!
//! A policy only reads the SINR entries it is permitted to see: every port
//! for the ideal policy, the observed set `M` for the reference policy, and
//! `M` plus the `J` ports ranked highest by a predictor for the
//! model-assisted policy. Within the permitted set the `K` best ports win.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fama::SinrVector;
use crate::rank::{top_k_among, top_k_indices};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    Ideal,
    Reference,
    #[serde(rename = "model", alias = "model_assisted")]
    ModelAssisted,
}

impl PolicyKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            PolicyKind::Ideal => "ideal",
            PolicyKind::Reference => "reference",
            PolicyKind::ModelAssisted => "model",
        }
    }
}

impl std::fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ideal" => Ok(PolicyKind::Ideal),
            "reference" => Ok(PolicyKind::Reference),
            "model_assisted" | "model" => Ok(PolicyKind::ModelAssisted),
            other => Err(Error::config(format!("unknown policy '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Policy {
    pub kind: PolicyKind,
    /// Number of predicted ports whose SINR is additionally observed (J).
    pub lookup_budget: usize,
    /// Number of ports handed to the combiner (K).
    pub k: usize,
}

impl Policy {
    pub fn new(kind: PolicyKind, lookup_budget: usize, k: usize) -> Self {
        Self {
            kind,
            lookup_budget,
            k,
        }
    }

    pub fn ideal() -> Self {
        Self::new(PolicyKind::Ideal, 1, 1)
    }

    pub fn reference() -> Self {
        Self::new(PolicyKind::Reference, 1, 1)
    }

    pub fn model_assisted(lookup_budget: usize) -> Self {
        Self::new(PolicyKind::ModelAssisted, lookup_budget, 1)
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }
}

/// Index sets `M` (observed), `Z` (unobserved) and `K` (selected).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PortSets {
    pub observed: Vec<usize>,
    pub unobserved: Vec<usize>,
    pub selected: Vec<usize>,
    pub k: usize,
}

impl PortSets {
    pub fn new(n_ports: usize, mut observed: Vec<usize>) -> Result<Self> {
        observed.sort_unstable();
        observed.dedup();
        if let Some(&last) = observed.last() {
            if last >= n_ports {
                return Err(Error::Selection(format!(
                    "observed port {last} out of range 0..{n_ports}"
                )));
            }
        }
        let mut is_observed = vec![false; n_ports];
        for &p in &observed {
            is_observed[p] = true;
        }
        let unobserved = (0..n_ports).filter(|&p| !is_observed[p]).collect();
        Ok(Self {
            observed,
            unobserved,
            selected: Vec::new(),
            k: 0,
        })
    }

    /// Uniformly spread observation, see [`observed_indices`].
    pub fn uniform(n_ports: usize, m_observed: usize) -> Result<Self> {
        Self::new(n_ports, observed_indices(n_ports, m_observed)?)
    }

    pub fn n_ports(&self) -> usize {
        self.observed.len() + self.unobserved.len()
    }

    fn with_selected(mut self, selected: Vec<usize>) -> Self {
        self.k = selected.len();
        self.selected = selected;
        self
    }
}

/// `m` ports spread evenly over the aperture, both endpoints included.
///
/// Index `i` is `round(i (N-1) / (m-1))` with halves rounded up; a collision
/// is pushed to the next free index.
pub fn observed_indices(n_ports: usize, m_observed: usize) -> Result<Vec<usize>> {
    if m_observed < 2 || m_observed > n_ports {
        return Err(Error::config(format!(
            "observed port count must lie in 2..={n_ports}, got {m_observed}"
        )));
    }
    let span = (n_ports - 1) as f64 / (m_observed - 1) as f64;
    let mut out: Vec<usize> = Vec::with_capacity(m_observed);
    for i in 0..m_observed {
        let mut idx = (i as f64 * span + 0.5).floor() as usize;
        if let Some(&prev) = out.last() {
            if idx <= prev {
                idx = prev + 1;
            }
        }
        out.push(idx.min(n_ports - 1));
    }
    Ok(out)
}

/// Observed port index with its measured SINR (linear).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservedPort {
    pub index: usize,
    pub sinr: f64,
}

impl ObservedPort {
    pub fn collect(sinr: &[f64], observed: &[usize]) -> Vec<ObservedPort> {
        observed
            .iter()
            .map(|&index| ObservedPort {
                index,
                sinr: sinr[index],
            })
            .collect()
    }
}

/// Anything that maps an observed-port sequence to `N` port scores.
pub trait PortPredictor: Send + Sync {
    fn n_ports(&self) -> usize;

    fn predict_batch(&self, batch: &[Vec<ObservedPort>]) -> Result<Vec<Vec<f64>>>;

    fn predict(&self, observed: &[ObservedPort]) -> Result<Vec<f64>> {
        let mut out = self.predict_batch(&[observed.to_vec()])?;
        out.pop()
            .ok_or_else(|| Error::shape("predictor returned an empty batch"))
    }
}

/// Ports a policy may rank, ascending.
pub fn permitted_ports(
    policy: &Policy,
    ports: &PortSets,
    scores: Option<&[f64]>,
) -> Result<Vec<usize>> {
    let n = ports.n_ports();
    match policy.kind {
        PolicyKind::Ideal => Ok((0..n).collect()),
        PolicyKind::Reference => Ok(ports.observed.clone()),
        PolicyKind::ModelAssisted => {
            let scores = scores.ok_or_else(|| {
                Error::Selection("model-assisted policy requires a predictor".into())
            })?;
            if scores.len() != n {
                return Err(Error::shape(format!(
                    "predictor returned {} scores for {n} ports",
                    scores.len()
                )));
            }
            let mut permitted = ports.observed.clone();
            permitted.extend(top_k_indices(scores, policy.lookup_budget));
            permitted.sort_unstable();
            permitted.dedup();
            Ok(permitted)
        }
    }
}

/// The `k` highest-SINR ports of the permitted set, best first.
pub fn select_with_scores(
    policy: &Policy,
    sinr: &[f64],
    ports: &PortSets,
    scores: Option<&[f64]>,
    k: usize,
) -> Result<Vec<usize>> {
    if sinr.len() != ports.n_ports() {
        return Err(Error::shape(format!(
            "SINR vector has {} entries, port sets cover {}",
            sinr.len(),
            ports.n_ports()
        )));
    }
    if k == 0 {
        return Err(Error::Selection("k must be at least 1".into()));
    }
    let permitted = permitted_ports(policy, ports, scores)?;
    if k > permitted.len() {
        return Err(Error::Selection(format!(
            "cannot combine {k} ports, the {} policy may rank only {}",
            policy.kind,
            permitted.len()
        )));
    }
    Ok(top_k_among(sinr, &permitted, k))
}

fn scores_for(
    policy: &Policy,
    sinr: &SinrVector,
    ports: &PortSets,
    predictor: Option<&dyn PortPredictor>,
) -> Result<Option<Vec<f64>>> {
    if policy.kind != PolicyKind::ModelAssisted {
        return Ok(None);
    }
    let predictor = predictor
        .ok_or_else(|| Error::Selection("model-assisted policy requires a predictor".into()))?;
    let observed = ObservedPort::collect(&sinr.values, &ports.observed);
    predictor.predict(&observed).map(Some)
}

/// Single-port selection (K = 1).
pub fn select_port(
    policy: &Policy,
    sinr: &SinrVector,
    ports: &PortSets,
    predictor: Option<&dyn PortPredictor>,
) -> Result<usize> {
    let scores = scores_for(policy, sinr, ports, predictor)?;
    Ok(select_with_scores(policy, &sinr.values, ports, scores.as_deref(), 1)?[0])
}

/// Top-`k` selection for MRC; returns the filled-in [`PortSets`].
pub fn select_topk_mrc(
    policy: &Policy,
    sinr: &SinrVector,
    ports: &PortSets,
    predictor: Option<&dyn PortPredictor>,
    k: usize,
) -> Result<PortSets> {
    let scores = scores_for(policy, sinr, ports, predictor)?;
    let selected = select_with_scores(policy, &sinr.values, ports, scores.as_deref(), k)?;
    Ok(ports.clone().with_selected(selected))
}

/// A policy bound to its observed ports and optional predictor, as used by
/// the outage estimators.
#[derive(Clone)]
pub struct PolicyEvaluator<'a> {
    pub policy: Policy,
    pub observed: Vec<usize>,
    pub predictor: Option<&'a dyn PortPredictor>,
}

impl<'a> PolicyEvaluator<'a> {
    pub fn new(
        policy: Policy,
        observed: Option<Vec<usize>>,
        predictor: Option<&'a dyn PortPredictor>,
    ) -> Self {
        Self {
            policy,
            observed: observed.unwrap_or_default(),
            predictor,
        }
    }

    /// Evaluator observing `m_observed` uniformly spread ports.
    pub fn uniform(
        policy: Policy,
        n_ports: usize,
        m_observed: usize,
        predictor: Option<&'a dyn PortPredictor>,
    ) -> Result<Self> {
        let observed = if policy.kind == PolicyKind::Ideal {
            Vec::new()
        } else {
            observed_indices(n_ports, m_observed)?
        };
        Ok(Self {
            policy,
            observed,
            predictor,
        })
    }

    pub fn needs_predictions(&self) -> bool {
        self.policy.kind == PolicyKind::ModelAssisted
    }

    pub fn validate(&self, n_ports: usize) -> Result<()> {
        let p = &self.policy;
        if p.k == 0 || p.k > n_ports {
            return Err(Error::Selection(format!("k = {} outside 1..={n_ports}", p.k)));
        }
        if self.observed.iter().any(|&i| i >= n_ports) {
            return Err(Error::Selection("observed port index out of range".into()));
        }
        match p.kind {
            PolicyKind::Ideal => Ok(()),
            PolicyKind::Reference => {
                if p.k > self.observed.len() {
                    return Err(Error::Selection(format!(
                        "cannot combine {} ports from {} observed",
                        p.k,
                        self.observed.len()
                    )));
                }
                Ok(())
            }
            PolicyKind::ModelAssisted => {
                let predictor = self.predictor.ok_or_else(|| {
                    Error::Selection("model-assisted policy requires a predictor".into())
                })?;
                if predictor.n_ports() != n_ports {
                    return Err(Error::shape(format!(
                        "predictor covers {} ports, antenna has {n_ports}",
                        predictor.n_ports()
                    )));
                }
                if p.lookup_budget == 0 {
                    return Err(Error::Selection("lookup budget J must be at least 1".into()));
                }
                if p.k > self.observed.len().max(p.lookup_budget) {
                    return Err(Error::Selection(format!(
                        "cannot combine {} ports with {} observed and J = {}",
                        p.k,
                        self.observed.len(),
                        p.lookup_budget
                    )));
                }
                Ok(())
            }
        }
    }

    /// Selected ports for one realization, best first.
    pub fn select(&self, sinr: &[f64], scores: Option<&[f64]>) -> Result<Vec<usize>> {
        match self.policy.kind {
            PolicyKind::Ideal => Ok(top_k_indices(sinr, self.policy.k)),
            _ => {
                let ports = PortSets::new(sinr.len(), self.observed.clone())?;
                select_with_scores(&self.policy, sinr, &ports, scores, self.policy.k)
            }
        }
    }
}
