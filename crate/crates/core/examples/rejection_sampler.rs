//! Stationary draws from taboo samples by size-biased rejection.
//!
//! `cargo run --release --example rejection_sampler`

use doeblin::estimators::rejection_stationary_sample;
use doeblin::sampler::sample_taboo;
use doeblin::{derive_seed, ChainModel, CouplingMode, NoiseField};

fn main() -> doeblin::Result<()> {
    // eta uniform on {1, 2}: taboo mass is at most 2, stationary law (2/3, 1/3)
    let model: ChainModel = "renewal:emp:1=0.5,2=0.5".parse()?;
    let n = 20_000;
    let mut counts = [0u64; 2];
    let mut attempts = 0;
    for j in 0..n {
        let seed = derive_seed(5, j);
        let pick = NoiseField::new(seed, CouplingMode::TotallyIndependent, 2);
        let acc = rejection_stationary_sample(
            |a| Ok(sample_taboo(&model, &model.noise(derive_seed(seed, a + 1), CouplingMode::TotallyIndependent), 5, 64)?.atoms),
            3,
            1000,
            &pick,
        )?;
        counts[acc.state as usize] += 1;
        attempts += acc.attempts;
    }
    println!(
        "P(0) = {:.4}, P(1) = {:.4}, acceptance rate {:.3}",
        counts[0] as f64 / n as f64,
        counts[1] as f64 / n as f64,
        n as f64 / attempts as f64
    );
    Ok(())
}
