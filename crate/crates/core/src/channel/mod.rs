//! Spatially correlated α-μ channels for a linear fluid antenna.
//!
//! Each BS antenna contributes one row of `N` complex port gains. A row is
//! built from `2μ` independent Gaussian layers, each correlated across ports
//! by the Cholesky factor of the Jakes correlation matrix. The envelope at a
//! port is `(σ² Σ z²)^(1/α)` and the phase comes from the first in-phase /
//! quadrature pair, so both inherit the spatial correlation.

mod bessel;
mod correlation;

pub use bessel::j0;
pub use correlation::{
    build_correlation_matrix, factorize_correlation, CorrelationFactor, JITTER_LADDER,
};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::fama::SystemConfig;
use crate::rng::stream_rng;

/// α-μ fading parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FadingParams {
    pub alpha: f64,
    pub mu: u32,
    /// α-root mean value, `E[R^α]^(1/α)`.
    pub rhat: f64,
}

impl FadingParams {
    /// Parameters with `rhat` chosen so that `E[R²] = 1`.
    pub fn normalized(alpha: f64, mu: u32) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::config(format!("alpha must be positive, got {alpha}")));
        }
        if mu == 0 {
            return Err(Error::config("mu must be at least 1"));
        }
        let m = f64::from(mu);
        // rhat² = μ^(2/α) Γ(μ) / Γ(μ + 2/α)
        let ln_rhat2 = (2.0 / alpha) * m.ln() + ln_gamma(m) - ln_gamma(m + 2.0 / alpha);
        Ok(Self {
            alpha,
            mu,
            rhat: (0.5 * ln_rhat2).exp(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::config(format!("alpha must be positive, got {}", self.alpha)));
        }
        if self.mu == 0 {
            return Err(Error::config("mu must be at least 1"));
        }
        if !(self.rhat > 0.0 && self.rhat.is_finite()) {
            return Err(Error::config(format!("rhat must be positive, got {}", self.rhat)));
        }
        Ok(())
    }

    /// Number of Gaussian layers, `2μ`.
    pub fn layers(&self) -> usize {
        2 * self.mu as usize
    }

    /// `E[R^k] = rhat^k Γ(μ + k/α) / (μ^(k/α) Γ(μ))`.
    pub fn moment(&self, k: f64) -> f64 {
        let m = f64::from(self.mu);
        let s = k / self.alpha;
        (k * self.rhat.ln() + ln_gamma(m + s) - s * m.ln() - ln_gamma(m)).exp()
    }
}

/// Port count and normalized aperture (in wavelengths).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AntennaConfig {
    pub n_ports: usize,
    pub aperture: f64,
}

impl AntennaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_ports < 2 {
            return Err(Error::config(format!(
                "antenna needs at least 2 ports, got {}",
                self.n_ports
            )));
        }
        if !(self.aperture > 0.0 && self.aperture.is_finite()) {
            return Err(Error::config(format!(
                "aperture must be positive, got {}",
                self.aperture
            )));
        }
        Ok(())
    }
}

/// Complex port gains for every BS antenna during one coherence interval.
///
/// Row 0 is the desired user's own BS antenna; rows `1..U` interfere.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    gains: Vec<Complex64>,
    n_users: usize,
    n_ports: usize,
    pub seed: u64,
}

impl ChannelRealization {
    pub fn from_rows(rows: Vec<Vec<Complex64>>, seed: u64) -> Result<Self> {
        let n_users = rows.len();
        let n_ports = rows.first().map_or(0, Vec::len);
        if n_users == 0 || n_ports == 0 || rows.iter().any(|r| r.len() != n_ports) {
            return Err(Error::shape("realization rows must be non-empty and equal length"));
        }
        if rows.iter().flatten().any(|g| !g.re.is_finite() || !g.im.is_finite()) {
            return Err(Error::numeric("non-finite channel gain"));
        }
        Ok(Self {
            gains: rows.into_iter().flatten().collect(),
            n_users,
            n_ports,
            seed,
        })
    }

    pub fn n_users(&self) -> usize {
        self.n_users
    }

    pub fn n_ports(&self) -> usize {
        self.n_ports
    }

    /// Gains from BS antenna `user` to every port.
    pub fn row(&self, user: usize) -> &[Complex64] {
        &self.gains[user * self.n_ports..(user + 1) * self.n_ports]
    }

    pub fn gain(&self, user: usize, port: usize) -> Complex64 {
        self.gains[user * self.n_ports + port]
    }
}

/// Turns `2μ` rows of correlated standard Gaussians into envelopes and phases.
///
/// `z` is `2μ × N`; returns `(envelope, phase)`, each of length `N`.
pub fn envelope_from_gaussians(
    z: &DMatrix<f64>,
    params: &FadingParams,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if z.nrows() != params.layers() {
        return Err(Error::shape(format!(
            "expected {} Gaussian rows for mu = {}, got {}",
            params.layers(),
            params.mu,
            z.nrows()
        )));
    }
    let sigma2 = params.rhat.powf(params.alpha) / params.layers() as f64;
    let inv_alpha = 1.0 / params.alpha;
    let envelope = z
        .column_iter()
        .map(|col| (sigma2 * col.norm_squared()).powf(inv_alpha))
        .collect();
    let phase = (0..z.ncols()).map(|n| z[(1, n)].atan2(z[(0, n)])).collect();
    Ok((envelope, phase))
}

/// Draws `count` independent α-μ envelopes (no spatial correlation).
pub fn sample_envelopes<R: Rng>(params: &FadingParams, count: usize, rng: &mut R) -> Vec<f64> {
    let layers = params.layers();
    let sigma2 = params.rhat.powf(params.alpha) / layers as f64;
    let inv_alpha = 1.0 / params.alpha;
    (0..count)
        .map(|_| {
            let sum: f64 = (0..layers)
                .map(|_| {
                    let g: f64 = rng.sample(StandardNormal);
                    g * g
                })
                .sum();
            (sigma2 * sum).powf(inv_alpha)
        })
        .collect()
}

/// Reusable generator holding the factorized correlation.
#[derive(Debug, Clone)]
pub struct ChannelGenerator {
    n_users: usize,
    antenna: AntennaConfig,
    params: FadingParams,
    factor: CorrelationFactor,
}

impl ChannelGenerator {
    pub fn new(system: &SystemConfig, antenna: &AntennaConfig, params: &FadingParams) -> Result<Self> {
        let matrix = build_correlation_matrix(antenna)?;
        let factor = factorize_correlation(&matrix)?;
        Self::with_factor(system, antenna, params, factor)
    }

    pub fn with_factor(
        system: &SystemConfig,
        antenna: &AntennaConfig,
        params: &FadingParams,
        factor: CorrelationFactor,
    ) -> Result<Self> {
        system.validate()?;
        antenna.validate()?;
        params.validate()?;
        if factor.n_ports() != antenna.n_ports {
            return Err(Error::shape(format!(
                "correlation factor is for {} ports, antenna has {}",
                factor.n_ports(),
                antenna.n_ports
            )));
        }
        Ok(Self {
            n_users: system.n_users,
            antenna: *antenna,
            params: *params,
            factor,
        })
    }

    pub fn antenna(&self) -> &AntennaConfig {
        &self.antenna
    }

    pub fn params(&self) -> &FadingParams {
        &self.params
    }

    pub fn factor(&self) -> &CorrelationFactor {
        &self.factor
    }

    /// Correlated Gaussian layers for all users, `N × (U·2μ)`; columns
    /// `u·2μ .. (u+1)·2μ` belong to BS antenna `u`.
    pub fn gaussian_layers<R: Rng>(&self, rng: &mut R) -> DMatrix<f64> {
        let n = self.antenna.n_ports;
        let cols = self.n_users * self.params.layers();
        let white = DMatrix::from_fn(n, cols, |_, _| rng.sample::<f64, _>(StandardNormal));
        &self.factor.factor * white
    }

    /// Realization number `index` of the stream rooted at `master_seed`.
    pub fn realization(&self, master_seed: u64, index: u64) -> ChannelRealization {
        let mut rng = stream_rng(master_seed, index);
        let layers = self.gaussian_layers(&mut rng);
        let n = self.antenna.n_ports;
        let per_user = self.params.layers();
        let sigma2 = self.params.rhat.powf(self.params.alpha) / per_user as f64;
        let inv_alpha = 1.0 / self.params.alpha;
        let mut gains = Vec::with_capacity(self.n_users * n);
        for u in 0..self.n_users {
            let block = layers.columns(u * per_user, per_user);
            for port in 0..n {
                let row = block.row(port);
                let envelope = (sigma2 * row.norm_squared()).powf(inv_alpha);
                let phase = row[1].atan2(row[0]);
                gains.push(Complex64::from_polar(envelope, phase));
            }
        }
        ChannelRealization {
            gains,
            n_users: self.n_users,
            n_ports: n,
            seed: index,
        }
    }
}

/// One realization from stream 0 of `rng_seed`.
pub fn generate_realization(
    system: &SystemConfig,
    antenna: &AntennaConfig,
    params: &FadingParams,
    factor: &CorrelationFactor,
    rng_seed: u64,
) -> Result<ChannelRealization> {
    let generator = ChannelGenerator::with_factor(system, antenna, params, factor.clone())?;
    Ok(generator.realization(rng_seed, 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    fn system(users: usize) -> SystemConfig {
        SystemConfig {
            n_users: users,
            ..SystemConfig::default()
        }
    }

    #[test]
    fn hand_computed_envelope() {
        let params = FadingParams {
            alpha: 2.0,
            mu: 1,
            rhat: 1.0,
        };
        let z = DMatrix::from_row_slice(2, 1, &[1.0, 0.0]);
        let (env, phase) = envelope_from_gaussians(&z, &params).unwrap();
        assert!((env[0] - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(phase[0], 0.0);
    }

    #[test]
    fn wrong_layer_count_rejected() {
        let params = FadingParams::normalized(2.0, 2).unwrap();
        let z = DMatrix::zeros(2, 3);
        assert!(matches!(envelope_from_gaussians(&z, &params), Err(Error::Shape(_))));
    }

    #[test]
    fn normalized_rhat_gives_unit_power() {
        for &alpha in &[0.7, 1.5, 2.0, 3.0, 4.5] {
            for mu in 1..=4 {
                let p = FadingParams::normalized(alpha, mu).unwrap();
                assert!((p.moment(2.0) - 1.0).abs() < 1e-12, "alpha {alpha} mu {mu}");
            }
        }
        // Rayleigh: rhat = 1 already
        assert!((FadingParams::normalized(2.0, 1).unwrap().rhat - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rayleigh_special_case_second_moment() {
        let params = FadingParams::normalized(2.0, 1).unwrap();
        let mut rng = stream_rng(11, 0);
        let r = sample_envelopes(&params, 200_000, &mut rng);
        let m2 = r.iter().map(|v| v * v).sum::<f64>() / r.len() as f64;
        assert!((m2 - 1.0).abs() < 0.02);
        // Rayleigh: E[R] = sqrt(pi)/2 for unit power
        let m1 = r.iter().sum::<f64>() / r.len() as f64;
        assert!((m1 - std::f64::consts::PI.sqrt() / 2.0).abs() < 0.01);
    }

    #[test]
    fn deterministic_given_seed() {
        let antenna = AntennaConfig {
            n_ports: 20,
            aperture: 2.0,
        };
        let params = FadingParams::normalized(2.0, 2).unwrap();
        let f = factorize_correlation(&build_correlation_matrix(&antenna).unwrap()).unwrap();
        let a = generate_realization(&system(3), &antenna, &params, &f, 42).unwrap();
        let b = generate_realization(&system(3), &antenna, &params, &f, 42).unwrap();
        let c = generate_realization(&system(3), &antenna, &params, &f, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.n_users(), 3);
        assert_eq!(a.n_ports(), 20);
    }

    #[test]
    fn factor_size_mismatch_rejected() {
        let antenna = AntennaConfig {
            n_ports: 8,
            aperture: 1.0,
        };
        let other = AntennaConfig {
            n_ports: 6,
            aperture: 1.0,
        };
        let params = FadingParams::normalized(2.0, 1).unwrap();
        let f = factorize_correlation(&build_correlation_matrix(&other).unwrap()).unwrap();
        assert!(matches!(
            generate_realization(&system(2), &antenna, &params, &f, 1),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn unit_power_per_port() {
        let antenna = AntennaConfig {
            n_ports: 16,
            aperture: 3.0,
        };
        let params = FadingParams::normalized(1.5, 2).unwrap();
        let gen = ChannelGenerator::new(&system(1), &antenna, &params).unwrap();
        let trials = 40_000;
        let mut power = vec![0.0; 16];
        for i in 0..trials {
            let r = gen.realization(5, i);
            for (p, g) in power.iter_mut().zip(r.row(0)) {
                *p += g.norm_sqr();
            }
        }
        for p in power {
            assert!((p / trials as f64 - 1.0).abs() < 0.03, "{p}");
        }
    }
}
