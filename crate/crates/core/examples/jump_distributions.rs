//! Jump laws: parsing, moments and inversion sampling.
//!
//! `cargo run --example jump_distributions`

use doeblin::{sample_jump, JumpDistribution, NoiseField, CouplingMode};

fn main() -> doeblin::Result<()> {
    let noise = NoiseField::new(1, CouplingMode::TotallyIndependent, 1);
    for spec in ["geo:0.5", "zeta:1.5", "zeta:0.75", "poi:3", "emp:1=0.5,2=0.5"] {
        let d: JumpDistribution = spec.parse()?;
        let draws: Vec<u64> = (0..10).map(|t| sample_jump(&d, noise.uniform(t, 0, 0))).collect();
        println!(
            "{spec:>16}  mean {:?}  P(eta=1) {:.4}  P(eta>100) {:.3e}  draws {draws:?}",
            d.mean(),
            d.pmf(1),
            d.tail(100)
        );
    }
    Ok(())
}
