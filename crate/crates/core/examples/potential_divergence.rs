//! The potential at s* of a null recurrent renewal chain keeps growing with
//! the window depth.
//!
//! `cargo run --release --example potential_divergence`

use doeblin::sampler::{sample_potential, SearchStrategy};
use doeblin::{derive_seed, ChainModel, CouplingMode};

fn main() -> doeblin::Result<()> {
    let model: ChainModel = "renewal:zeta:0.75".parse()?;
    for depth in [100u64, 1_000, 10_000, 100_000] {
        let runs = 100;
        let mut sum = 0;
        for r in 0..runs {
            let noise = model.noise(derive_seed(depth, r), CouplingMode::Common);
            sum += sample_potential(&model, &noise, 0, depth, SearchStrategy::ExponentialSearch)?.atoms.get(0);
        }
        println!("depth {depth:>7}: mean pi(s*) = {:.1}", sum as f64 / runs as f64);
    }
    Ok(())
}
