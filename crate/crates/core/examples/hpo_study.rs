//! A small random-search study; the trial log lands in a temp directory.

use fama_lnn::dataset::build_dataset;
use fama_lnn::hpo::{run_study, SearchSpace, StudySettings};
use fama_lnn::nn::TrainConfig;
use fama_lnn::scenario::Scenario;

pub fn run_example() -> fama_lnn::Result<()> {
    let mut s = Scenario::default();
    s.system.gamma_th_db = 3.0;
    let data = build_dataset(&s.system, &s.antenna, &s.params, 5, 3, 1_500, 4)?;
    let space = SearchSpace { ltc_units: (4, 32), dense_width: (16, 64), ..SearchSpace::default() };
    let settings = StudySettings {
        budget: 4,
        train: TrainConfig { epochs: 4, ..TrainConfig::default() },
        gamma_th_db: s.system.gamma_th_db,
        ..StudySettings::default()
    };
    let dir = std::env::temp_dir().join("fama-lnn-study-example");
    let _ = std::fs::remove_dir_all(&dir);
    let study = run_study(&space, &data, &settings, 17, Some(&dir))?;
    for t in &study.trials {
        println!(
            "trial {}: H={:3} dense={:?} lr={:.1e} {:?} {:?} M={} -> {:?}",
            t.index,
            t.config.ltc_units,
            t.config.dense_layers,
            t.config.learning_rate,
            t.config.loss,
            t.config.preprocessing,
            t.config.m_labels,
            t.objective
        );
    }
    println!("best trial {} (log in {})", study.best, dir.display());
    Ok(())
}

#[allow(dead_code)]
fn main() -> fama_lnn::Result<()> {
    run_example()
}
