//! Empirical α-μ moments against the closed form, and port correlation
//! against the Jakes model.

use fama_lnn::channel::{j0, sample_envelopes, AntennaConfig, ChannelGenerator, FadingParams};
use fama_lnn::fama::SystemConfig;
use fama_lnn::rng::stream_rng;

pub fn run_example() -> fama_lnn::Result<()> {
    const SAMPLES: usize = 200_000;
    println!("alpha  mu   k   empirical  theory");
    for (alpha, mu) in [(1.5, 1), (2.0, 1), (2.0, 2), (3.0, 3)] {
        let params = FadingParams::normalized(alpha, mu)?;
        let r = sample_envelopes(&params, SAMPLES, &mut stream_rng(7, 0));
        for k in [1.0, 2.0, 4.0] {
            let empirical = r.iter().map(|v| v.powf(k)).sum::<f64>() / SAMPLES as f64;
            println!("{alpha:5} {mu:3} {k:3}   {empirical:9.4}  {:6.4}", params.moment(k));
        }
    }

    // correlation between the first Gaussian layer at port 0 and port d
    let antenna = AntennaConfig { n_ports: 20, aperture: 2.0 };
    let generator = ChannelGenerator::new(&SystemConfig::default(), &antenna, &FadingParams::normalized(2.0, 1)?)?;
    let draws = 20_000;
    let mut acc = vec![0.0; antenna.n_ports];
    let mut rng = stream_rng(3, 0);
    for _ in 0..draws {
        let g = generator.gaussian_layers(&mut rng);
        for d in 0..antenna.n_ports {
            acc[d] += g[(0, 0)] * g[(d, 0)];
        }
    }
    println!("\nlag  empirical  J0 target");
    for d in [0, 1, 2, 5, 10, 19] {
        let target = j0(2.0 * std::f64::consts::PI * d as f64 * antenna.aperture / (antenna.n_ports - 1) as f64);
        println!("{d:3}  {:9.4}  {target:9.4}", acc[d] / draws as f64);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> fama_lnn::Result<()> {
    run_example()
}
