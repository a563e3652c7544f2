//! Linear scan against exponential search over the Loynes sequence.
//!
//! `cargo run --release --example exponential_search`

use doeblin::sampler::{record_decomposition, SearchStrategy};
use doeblin::{derive_seed, ChainModel, CouplingMode};

fn main() -> doeblin::Result<()> {
    let model: ChainModel = "queue:geo:0.2:geo:0.2".parse()?;
    println!("{:>6} {:>10} {:>8} {:>8}", "seed", "terminal", "linear", "exp");
    for s in 0..12 {
        let noise = model.noise(derive_seed(1, s), CouplingMode::Common);
        let lin = record_decomposition(&model, &noise, 50, 1_000_000, SearchStrategy::Linear)?;
        let exp = record_decomposition(&model, &noise, 50, 1_000_000, SearchStrategy::ExponentialSearch)?;
        assert_eq!(lin.records, exp.records);
        println!(
            "{s:>6} {:>10} {:>8} {:>8}",
            lin.terminal_index.map_or("-".into(), |n| n.to_string()),
            lin.evaluations,
            exp.evaluations
        );
    }
    Ok(())
}
