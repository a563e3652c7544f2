//! Meeting frequency of two walks on the family forest across tail indices.
//!
//! `cargo run --release --example eft_connectivity`

use doeblin::renewal::meeting_experiment;
use doeblin::{CouplingMode, JumpDistribution, NoiseField};

fn main() -> doeblin::Result<()> {
    let noise = NoiseField::new(2, CouplingMode::TotallyIndependent, 1);
    for alpha in [0.9, 0.75, 0.6, 0.5, 0.4, 0.25] {
        let d: JumpDistribution = format!("zeta:{alpha}").parse()?;
        let e = meeting_experiment(&d, 1, 10_000, 400, &noise)?;
        println!(
            "alpha {alpha:<5} meeting frequency {:.3}  [{:.3}, {:.3}]",
            e.frequency, e.ci_low, e.ci_high
        );
    }
    Ok(())
}
