//! Per-port SINR of one realization and the SINR after combining the best
//! K ports.

use fama_lnn::fama::{sinr_mrc, sinr_per_port, InterferenceMode};
use fama_lnn::rank::top_k_indices;
use fama_lnn::scenario::Scenario;

pub fn run_example() -> fama_lnn::Result<()> {
    let mut scenario = Scenario::default();
    let realization = scenario.generator()?.realization(42, 0);
    let sinr = sinr_per_port(&realization, &scenario.system)?;
    let best = top_k_indices(&sinr.values, 6);
    println!("snr {} dB, best ports {best:?}", scenario.system.snr_db());
    for &p in &best {
        println!("  port {p:3}: {:7.2} dB", 10.0 * sinr.values[p].log10());
    }

    for mode in [InterferenceMode::AsWritten, InterferenceMode::Incoherent] {
        scenario.system.interference_mode = mode;
        print!("{mode:?}:");
        for k in [1, 2, 4, 6] {
            let combined = sinr_mrc(&realization, &scenario.system, &best[..k])?;
            print!("  K={k} {:6.2} dB", 10.0 * combined.log10());
        }
        println!();
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> fama_lnn::Result<()> {
    run_example()
}
