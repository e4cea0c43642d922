//! The whole workflow through the command layer: per-m hyperparameter
//! studies, the observed-port, MRC and fading curves, and a resolved-config
//! snapshot for each. Pass `--full` for the default scale (10^4 samples per
//! dataset, 20 trials per study, 10^5 realizations per curve point);
//! without it the same steps run at smoke-test scale.

use std::path::PathBuf;
use std::time::Instant;

use fama_lnn::cli::{dispatch, Command, RunConfig};

pub fn pipeline_config(full: bool, out: PathBuf) -> RunConfig {
    let mut cfg = RunConfig { output_dir: Some(out), ..RunConfig::default() };
    if !full {
        cfg.dataset.size = 600;
        cfg.hpo.budget = 2;
        cfg.hpo.epochs = 2;
        cfg.hpo.space.ltc_units = (4, 16);
        cfg.hpo.space.dense_width = (16, 32);
        cfg.eval.trials = 2_000;
        cfg.eval.m_values = vec![5, 10];
        cfg.system.gamma_th_db = 3.0;
    }
    cfg
}

pub fn run_pipeline(cfg: &RunConfig) -> fama_lnn::Result<()> {
    for command in [Command::CurveObserved, Command::CurveMrc, Command::CurveFading] {
        let started = Instant::now();
        dispatch(command, cfg)?;
        println!("{:15} {:7.1}s", command.name(), started.elapsed().as_secs_f64());
    }
    Ok(())
}

pub fn run_example() -> fama_lnn::Result<()> {
    let full = std::env::args().any(|a| a == "--full");
    let out = std::env::temp_dir().join(if full { "fama-lnn-full" } else { "fama-lnn-smoke" });
    let _ = std::fs::remove_dir_all(&out);
    let started = Instant::now();
    run_pipeline(&pipeline_config(full, out.clone()))?;
    println!("total {:.1}s, outputs in {}", started.elapsed().as_secs_f64(), out.display());
    Ok(())
}

#[allow(dead_code)]
fn main() -> fama_lnn::Result<()> {
    run_example()
}
