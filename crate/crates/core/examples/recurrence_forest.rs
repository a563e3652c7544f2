//! The recurrence-time forest coupled to a renewal bridge graph: edge
//! lengths, flying-over-zero edges and the S-set.
//!
//! `cargo run --example recurrence_forest`

use doeblin::bridge::{build_bridge, multiplicities, recurrence_times, s_set};
use doeblin::renewal::{couple_bridge_eft, descendant_count, flying_edges};
use doeblin::{ChainModel, CouplingMode, DynamicsKind};

fn main() -> doeblin::Result<()> {
    let model: ChainModel = "renewal:zeta:1.5".parse()?;
    // first seed whose window has a jump over 0
    let (noise, bridge, eff) = (0..)
        .map(|seed| {
            let noise = model.noise(seed, CouplingMode::TotallyIndependent);
            let bridge = build_bridge(&model, &noise, -2000, 0)?;
            let eff = couple_bridge_eft(&bridge)?;
            Ok((noise, bridge, eff))
        })
        .find(|r: &doeblin::Result<_>| r.as_ref().map_or(true, |(_, _, eff)| flying_edges(eff).is_ok_and(|f| f.len() > 1)))
        .expect("unbounded search")?;
    let rt = recurrence_times(&model, &noise, -2000, 0, 1 << 40)?;
    let agree = eff.edges().zip(&rt.times).all(|((i, j), t)| (j - i) as u64 == t.0);
    println!("edge lengths equal first-return times: {agree}");

    let flying = flying_edges(&eff)?;
    println!("flying-over-zero edges: {flying:?}");
    println!("S-set at 0: {:?}", s_set(&bridge, 0)?);
    println!("taboo: {:?}", multiplicities(&bridge, 0, DynamicsKind::Taboo)?.iter().collect::<Vec<_>>());
    let (n, censored) = descendant_count(&eff, -1, 10_000)?;
    println!("descendants of -1 in the window: {n} (capped: {censored})");
    Ok(())
}
