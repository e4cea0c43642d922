//! Test outage by observed ports and class count, in the sweep table layout.

use fama_lnn::channel::AntennaConfig;
use fama_lnn::hpo::{class_count_sweep, SearchSpace, StudySettings};
use fama_lnn::nn::TrainConfig;
use fama_lnn::scenario::Scenario;

pub fn run_example() -> fama_lnn::Result<()> {
    let mut s = Scenario { antenna: AntennaConfig { n_ports: 40, aperture: 2.0 }, ..Scenario::default() };
    s.system.gamma_th_db = 3.0;
    let space = SearchSpace { ltc_units: (4, 16), dense_layers: (1, 1), dense_width: (16, 32), ..SearchSpace::default() };
    let settings = StudySettings {
        budget: 1,
        train: TrainConfig { epochs: 3, ..TrainConfig::default() },
        gamma_th_db: s.system.gamma_th_db,
        ..StudySettings::default()
    };
    let table = class_count_sweep(&s, 1_000, &[4, 8], &[1, 2, 3, 5], &space, &settings, 2, None)?;
    print!("{}", table.to_csv());
    Ok(())
}

#[allow(dead_code)]
fn main() -> fama_lnn::Result<()> {
    run_example()
}
