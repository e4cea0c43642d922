//! Fluid antenna multiple access (FAMA) over correlated α-μ fading, with a
//! liquid time-constant network that predicts which unobserved ports are
//! worth a lookup.

pub mod channel;
pub mod cli;
pub mod container;
pub mod curves;
pub mod dataset;
pub mod error;
pub mod fama;
pub mod hpo;
pub mod nn;
pub mod predictor;
pub mod rank;
pub mod rng;
pub mod scenario;
pub mod selection;
pub mod serde_ext;

pub use error::{Error, Result};
