//! Taboo samples of the renewal chain from the recurrence-time forest; the
//! mean measure against the excursion oracle.
//!
//! `cargo run --release --example renewal_taboo`

use doeblin::estimators::{invariant_measure_oracle, mean_measure, pooled_z};
use doeblin::sampler::sample_taboo;
use doeblin::{derive_seed, ChainModel, CountingMeasure, CouplingMode};

fn main() -> doeblin::Result<()> {
    let model: ChainModel = "renewal:geo:0.5".parse()?;
    let k = 6;
    let samples: Vec<CountingMeasure> = (0..20_000)
        .map(|i| sample_taboo(&model, &model.noise(derive_seed(3, i), CouplingMode::Common), k, 1 << 20).map(|s| s.atoms))
        .collect::<doeblin::Result<_>>()?;
    let mean = mean_measure(&samples, k)?;
    let oracle = invariant_measure_oracle(&model, k, 20_000, &model.noise(4, CouplingMode::TotallyIndependent))?;
    println!("state   mean(taboo)   oracle   0.5^j   z");
    for (a, b) in mean.rows.iter().zip(&oracle.rows) {
        println!(
            "{:>5} {:>12.4} {:>9.4} {:>7.4} {:>5.2}",
            a.state,
            a.estimate,
            b.estimate,
            0.5f64.powi(a.state as i32),
            pooled_z(a, b)
        );
    }
    Ok(())
}
