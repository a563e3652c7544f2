//! K_i(r) on taboo samples of the critical queue and on independent
//! thinning, where it is 1.
//!
//! `cargo run --release --example k_function`

use doeblin::estimators::{k_function, KConvention};
use doeblin::sampler::{sample_taboo, SampleStatus};
use doeblin::{derive_seed, ChainModel, CountingMeasure, CouplingMode, NoiseField};

fn main() -> doeblin::Result<()> {
    let thinning: Vec<CountingMeasure> = (0..5000)
        .map(|s| {
            let noise = NoiseField::new(derive_seed(8, s), CouplingMode::TotallyIndependent, 1);
            (0..=200).filter(|&x| noise.uniform(0, x, 0) < 0.3).map(|x| (x, 1)).collect()
        })
        .collect();
    let model: ChainModel = "queue:geo:0.2:geo:0.2".parse()?;
    let mut queue = Vec::new();
    for s in 0..300 {
        let t = sample_taboo(&model, &model.noise(derive_seed(9, s), CouplingMode::Common), 200, 1_000_000)?;
        if t.status == SampleStatus::Exact {
            queue.push(t.atoms);
        }
    }
    println!("   r   thinning         queue");
    for r in [2, 5, 10, 20, 50] {
        let a = k_function(&thinning, 100, r, KConvention::Punctured)?;
        let b = k_function(&queue, 100, r, KConvention::Punctured);
        println!(
            "{r:>4}   {:.3}+-{:.3}   {}",
            a.value,
            a.stderr,
            b.map_or("undefined".into(), |k| format!("{:.3}+-{:.3}", k.value, k.stderr))
        );
    }
    Ok(())
}
