//! Invariant measure from excursions away from s*.
//!
//! `cargo run --release --example invariant_oracle -- [model]`

use doeblin::estimators::invariant_measure_oracle;
use doeblin::{ChainModel, CouplingMode};

fn main() -> doeblin::Result<()> {
    let spec = std::env::args().nth(1).unwrap_or_else(|| "queue:geo:0.3:geo:0.2".into());
    let model: ChainModel = spec.parse()?;
    let report = invariant_measure_oracle(&model, 10, 50_000, &model.noise(1, CouplingMode::TotallyIndependent))?;
    report.write_csv(std::io::stdout().lock())?;
    Ok(())
}
