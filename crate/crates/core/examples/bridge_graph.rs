//! Builds a bridge graph, lists its S-set and writes the vertex table.
//!
//! `cargo run --example bridge_graph -- [model] [coupling]`

use doeblin::bridge::{build_bridge, multiplicities, s_set};
use doeblin::{ChainModel, CouplingMode, DynamicsKind};

fn main() -> doeblin::Result<()> {
    let mut args = std::env::args().skip(1);
    let model: ChainModel = args.next().as_deref().unwrap_or("reflectedrw").parse()?;
    let mode: CouplingMode = args.next().as_deref().unwrap_or("totally_independent").parse()?;
    let bridge = build_bridge(&model, &model.noise(42, mode), -30, 0)?;

    println!("{model} under {mode}: {} vertices", bridge.vertex_count());
    println!("S-set at time 0: {:?}", s_set(&bridge, 0)?);
    for kind in [DynamicsKind::Taboo, DynamicsKind::Potential] {
        let m = multiplicities(&bridge, 0, kind)?;
        println!("{kind:?}: {:?}", m.iter().collect::<Vec<_>>());
    }
    let path = std::env::temp_dir().join("bridge.csv");
    bridge.write_csv(std::fs::File::create(&path)?)?;
    println!("vertex table written to {}", path.display());
    Ok(())
}
