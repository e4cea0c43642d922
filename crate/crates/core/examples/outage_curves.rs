//! Observed-port, MRC and fading curves with a fixed small architecture,
//! written in the curve CSV format.

use fama_lnn::curves::{fading_curve, mrc_curve, observed_curve, write_curve_csv, FadingSweep};
use fama_lnn::dataset::build_dataset;
use fama_lnn::nn::TrainConfig;
use fama_lnn::predictor::{fit, Architecture, TrainedModel};
use fama_lnn::scenario::Scenario;

pub fn run_example() -> fama_lnn::Result<()> {
    let mut s = Scenario::default();
    s.system.gamma_th_db = 3.0;
    let mut models = |sc: &Scenario, m: usize| -> fama_lnn::Result<TrainedModel> {
        let data = build_dataset(&sc.system, &sc.antenna, &sc.params, m, 3, 1_500, 8)?;
        let arch = Architecture { ltc_units: 8, dense_layers: vec![32], ..Architecture::default() };
        Ok(fit(&data, &arch, &TrainConfig { epochs: 4, learning_rate: 1e-2, ..TrainConfig::default() })?.0)
    };
    let m_values = [4, 8];
    let mut rows = observed_curve(&s, &m_values, &[1, 2, 4], 5_000, 3, &mut models)?;
    rows.extend(mrc_curve(&s, &m_values, &[1, 2, 4], false, 5_000, 3, None)?);
    let sweep = FadingSweep { alpha_values: vec![2.0, 3.0], mu_values: vec![1, 2], ..FadingSweep::default() };
    rows.extend(fading_curve(&s, &sweep, &m_values, 1, 5_000, 3, None)?);
    for r in &rows {
        println!(
            "m={:2} {:9} J={} K={} α={} μ={}  op={:.4}",
            r.m_observed, r.policy.as_str(), r.j_budget, r.k_combine, r.alpha, r.mu, r.op
        );
    }
    let path = std::env::temp_dir().join("fama-lnn-curves.csv");
    write_curve_csv(&path, &rows)?;
    println!("wrote {}", path.display());
    Ok(())
}

#[allow(dead_code)]
fn main() -> fama_lnn::Result<()> {
    run_example()
}
