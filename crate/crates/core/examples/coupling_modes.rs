//! The lazy walk under the three couplings: bridge sizes and taboo
//! multiplicities change, the taboo mean does not. Its transition rule is
//! already translation-equivariant, so common and maximal-shift noise drive
//! it identically.
//!
//! `cargo run --release --example coupling_modes`

use doeblin::bridge::{build_bridge, multiplicities};
use doeblin::estimators::mean_measure;
use doeblin::{derive_seed, ChainModel, CouplingMode, DynamicsKind};

fn main() -> doeblin::Result<()> {
    let model: ChainModel = "lazyrw".parse()?;
    for mode in [CouplingMode::TotallyIndependent, CouplingMode::Common, CouplingMode::MaximalShift] {
        let mut vertices = 0;
        let samples = (0..2000)
            .map(|s| {
                let b = build_bridge(&model, &model.noise(derive_seed(6, s), mode), -400, 0)?;
                vertices += b.vertex_count();
                multiplicities(&b, 0, DynamicsKind::Taboo)
            })
            .collect::<doeblin::Result<Vec<_>>>()?;
        let mean = mean_measure(&samples, 3)?;
        let est: Vec<String> = mean.rows.iter().map(|r| format!("{:.2}", r.estimate)).collect();
        println!(
            "{mode:<20} mean vertices {:>7}  windowed taboo mean on 0..=3: {}",
            vertices / 2000,
            est.join(" ")
        );
    }
    Ok(())
}
