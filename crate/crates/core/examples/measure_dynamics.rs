//! The taboo and potential updates reproduce the bridge columns.
//!
//! `cargo run --example measure_dynamics`

use doeblin::bridge::{build_bridge, multiplicities};
use doeblin::{iterate_dynamics, ChainModel, CountingMeasure, CouplingMode, DynamicsKind};

fn main() -> doeblin::Result<()> {
    let model: ChainModel = "queue:geo:0.2:geo:0.2".parse()?;
    let noise = model.noise(5, CouplingMode::Common);
    let bridge = build_bridge(&model, &noise, -200, 1)?;
    for kind in [DynamicsKind::Taboo, DynamicsKind::Potential] {
        // run the dynamics from a single unit at s* at the window start
        let streamed = iterate_dynamics(&CountingMeasure::delta(0), kind, &model, &noise, -200, 201)?;
        let column = multiplicities(&bridge, 1, kind)?;
        println!(
            "{kind:?}: mass {} on {} states, equal to bridge column 1: {}",
            streamed.total_mass(),
            streamed.len(),
            streamed == column
        );
    }
    Ok(())
}
