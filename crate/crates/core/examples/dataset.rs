//! Generate a labeled dataset, store it, read it back and export CSV.

use fama_lnn::dataset::{build_dataset, export_csv, load_dataset, save_dataset};
use fama_lnn::scenario::Scenario;

pub fn run_example() -> fama_lnn::Result<()> {
    let s = Scenario::default();
    let data = build_dataset(&s.system, &s.antenna, &s.params, 10, 3, 2_000, 11)?;
    println!(
        "{} train / {} validation / {} test samples, {} features each",
        data.train.len(),
        data.validation.len(),
        data.test.len(),
        data.train[0].features.len()
    );
    let first = &data.train[0];
    let hot: Vec<usize> = (0..first.labels.len()).filter(|&i| first.labels[i] == 1).collect();
    println!("sample {} has label ports {hot:?}", first.index);

    let dir = std::env::temp_dir().join("fama-lnn-dataset-example");
    std::fs::create_dir_all(&dir).map_err(|e| fama_lnn::Error::io(&dir, e))?;
    let path = dir.join("dataset.bin");
    save_dataset(&data, &path)?;
    let back = load_dataset(&path)?;
    assert_eq!(back, data);
    export_csv(&back, &dir.join("dataset.csv"))?;
    println!("wrote {}", dir.display());
    Ok(())
}

#[allow(dead_code)]
fn main() -> fama_lnn::Result<()> {
    run_example()
}
