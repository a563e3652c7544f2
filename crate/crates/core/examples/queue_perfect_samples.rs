//! Perfect taboo and potential samples of the critical GI/GI/1 workload on
//! [0, 1000], both read off the same Loynes sequence.
//!
//! `cargo run --release --example queue_perfect_samples -- [seed]`

use doeblin::sampler::{record_decomposition, sample_potential, sample_taboo, SearchStrategy};
use doeblin::{ChainModel, CouplingMode};

fn main() -> doeblin::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(7);
    let model: ChainModel = "queue:geo:0.2:geo:0.2".parse()?;
    let noise = model.noise(seed, CouplingMode::Common);
    let k = 1000;
    let taboo = sample_taboo(&model, &noise, k, 10_000_000)?;
    let potential = sample_potential(&model, &noise, k, 10_000_000, SearchStrategy::ExponentialSearch)?;
    let dec = record_decomposition(&model, &noise, k, 10_000_000, SearchStrategy::ExponentialSearch)?;

    println!("status {:?}, terminal index {:?}", taboo.status, dec.terminal_index);
    println!("Loynes indices evaluated: {}", dec.evaluations);
    println!("taboo: {} atoms, mass {}", taboo.atoms.len(), taboo.atoms.total_mass());
    println!("potential: {} atoms, mass {}", potential.atoms.len(), potential.atoms.total_mass());
    println!("first records (value, index, run):");
    for r in dec.records.iter().take(10) {
        println!("  {:>5} {:>8} {:>8}", r.value, r.index, r.run);
    }
    Ok(())
}
