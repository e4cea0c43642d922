//! Train a liquid-network port predictor and compare selection policies.

use fama_lnn::dataset::build_dataset;
use fama_lnn::fama::{estimate_outage_paired, outage_on_sinr};
use fama_lnn::dataset::Split;
use fama_lnn::nn::TrainConfig;
use fama_lnn::predictor::{fit, Architecture};
use fama_lnn::scenario::Scenario;
use fama_lnn::selection::{Policy, PolicyEvaluator, PortPredictor};

pub fn run_example() -> fama_lnn::Result<()> {
    let mut s = Scenario::default();
    s.system.gamma_th_db = 3.0;
    let m = 5;
    let data = build_dataset(&s.system, &s.antenna, &s.params, m, 3, 3_000, 1)?;
    let arch = Architecture { ltc_units: 16, dense_layers: vec![64], ..Architecture::default() };
    let config = TrainConfig { epochs: 8, learning_rate: 1e-2, ..TrainConfig::default() };
    let (model, outcome) = fit(&data, &arch, &config)?;
    for r in &outcome.history {
        println!("epoch {:2}: train {:.4}  validation {:.4}", r.epoch, r.train_loss, r.validation_loss);
    }

    let n = s.antenna.n_ports;
    let test_truth = data.ground_truth(Split::Test)?;
    let model_ev = PolicyEvaluator::uniform(Policy::model_assisted(1), n, m, Some(&model as &dyn PortPredictor))?;
    println!("test-split outage (J = 1): {:.4}", outage_on_sinr(&model_ev, &test_truth, s.system.gamma_th_db)?.probability);

    let evaluators = [
        PolicyEvaluator::uniform(Policy::ideal(), n, m, None)?,
        PolicyEvaluator::uniform(Policy::reference(), n, m, None)?,
        model_ev,
        PolicyEvaluator::uniform(Policy::model_assisted(4), n, m, Some(&model as &dyn PortPredictor))?,
    ];
    let est = estimate_outage_paired(&s.generator()?, &s.system, &evaluators, 10_000, 99)?;
    for (name, e) in ["ideal", "reference", "model J=1", "model J=4"].iter().zip(&est) {
        println!("{name:10} {:.4}  [{:.4}, {:.4}]", e.probability, e.ci_low, e.ci_high);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> fama_lnn::Result<()> {
    run_example()
}
