//! Ideal versus reference selection on a shared realization stream.

use fama_lnn::fama::estimate_outage_paired;
use fama_lnn::scenario::Scenario;
use fama_lnn::selection::{observed_indices, Policy, PolicyEvaluator};

pub fn run_example() -> fama_lnn::Result<()> {
    let mut scenario = Scenario::default();
    // a harder threshold than the default so a short run sees outages
    scenario.system.gamma_th_db = 3.0;
    let generator = scenario.generator()?;
    let n = scenario.antenna.n_ports;
    println!("observed ports for m = 5: {:?}", observed_indices(n, 5)?);
    println!("   m   ideal       reference");
    for m in [2, 5, 10, 20] {
        let evaluators = [
            PolicyEvaluator::uniform(Policy::ideal(), n, m, None)?,
            PolicyEvaluator::uniform(Policy::reference(), n, m, None)?,
        ];
        let est = estimate_outage_paired(&generator, &scenario.system, &evaluators, 20_000, 5)?;
        println!("{m:4}   {:.5}     {:.5}  [{:.5}, {:.5}]", est[0].probability, est[1].probability, est[1].ci_low, est[1].ci_high);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> fama_lnn::Result<()> {
    run_example()
}
