//! A complete simulation setup: system, antenna and fading.

use crate::channel::{AntennaConfig, ChannelGenerator, FadingParams};
use crate::error::Result;
use crate::fama::SystemConfig;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub system: SystemConfig,
    pub antenna: AntennaConfig,
    pub params: FadingParams,
}

impl Default for Scenario {
    /// N = 100 ports over 5 wavelengths, two users, unit-power α = 2, μ = 2.
    fn default() -> Self {
        Self {
            system: SystemConfig::default(),
            antenna: AntennaConfig {
                n_ports: 100,
                aperture: 5.0,
            },
            params: FadingParams::normalized(2.0, 2).expect("valid defaults"),
        }
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        self.antenna.validate()?;
        self.params.validate()
    }

    pub fn generator(&self) -> Result<ChannelGenerator> {
        ChannelGenerator::new(&self.system, &self.antenna, &self.params)
    }

    /// Same scenario with different fading shape, renormalized to unit power.
    pub fn with_fading(&self, alpha: f64, mu: u32) -> Result<Self> {
        Ok(Self {
            params: FadingParams::normalized(alpha, mu)?,
            ..*self
        })
    }
}
