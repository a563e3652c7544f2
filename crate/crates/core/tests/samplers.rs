//! Record samplers against bridge graphs and the long-run behaviour of the
//! Loynes sequence.

use doeblin::bridge::{build_bridge, multiplicities};
use doeblin::sampler::{
    loynes_value, sample_potential, sample_taboo, LoynesSequence, SampleStatus, SearchStrategy,
};
use doeblin::{derive_seed, Chain, ChainModel, CouplingMode, DynamicsKind};

#[test]
fn record_samples_match_bridges() {
    for spec in ["queue:geo:0.2:geo:0.2", "queue:geo:0.25:geo:0.3", "reflectedrw"] {
        let m: ChainModel = spec.parse().unwrap();
        let mut compared = 0;
        for seed in 0..200 {
            let noise = m.noise(derive_seed(9, seed), CouplingMode::Common);
            let t = sample_taboo(&m, &noise, 8, 2000).unwrap();
            if t.status != SampleStatus::Exact {
                continue;
            }
            let p = sample_potential(&m, &noise, 8, 2000, SearchStrategy::Linear).unwrap();
            let b = build_bridge(&m, &noise, -(t.depth_used as i64) - 1, 0).unwrap();
            assert_eq!(t.atoms, multiplicities(&b, 0, DynamicsKind::Taboo).unwrap().restrict(0, 8));
            assert_eq!(p.atoms, multiplicities(&b, 0, DynamicsKind::Potential).unwrap().restrict(0, 8));
            compared += 1;
        }
        assert!(compared > 100, "{spec}: only {compared} exact samples");
    }
}

#[test]
fn exact_samples_do_not_depend_on_the_cap() {
    let m: ChainModel = "queue:geo:0.2:geo:0.2".parse().unwrap();
    for seed in 0..300 {
        let noise = m.noise(derive_seed(21, seed), CouplingMode::Common);
        let a = sample_taboo(&m, &noise, 15, 5000).unwrap();
        if a.status != SampleStatus::Exact {
            continue;
        }
        for cap in [10_000, 100_000] {
            let b = sample_taboo(&m, &noise, 15, cap).unwrap();
            assert_eq!(a, b, "seed {seed} changed with cap {cap}");
            let pa = sample_potential(&m, &noise, 15, 5000, SearchStrategy::ExponentialSearch).unwrap();
            let pb = sample_potential(&m, &noise, 15, cap, SearchStrategy::ExponentialSearch).unwrap();
            assert_eq!(pa.atoms, pb.atoms);
        }
    }
}

#[test]
fn renewal_exact_label_is_stable_under_deeper_windows() {
    let m: ChainModel = "renewal:geo:0.5".parse().unwrap();
    for seed in 0..200 {
        let noise = m.noise(seed, CouplingMode::Common);
        let a = sample_taboo(&m, &noise, 20, 1 << 20).unwrap();
        assert_eq!(a.status, SampleStatus::Exact);
        let deeper = doeblin::renewal::renewal_taboo_sample(m.renewal_jumps().unwrap(), &noise, 20, 4 * a.depth_used);
        assert_eq!(a.atoms, deeper.atoms);
    }
}

// In a stable queue L_n settles at a finite L_inf, distributed as the
// stationary workload. Its atom at 0 is checked against the fraction of time
// a long forward run spends at 0.
#[test]
fn stable_queue_loynes_limit() {
    let m: ChainModel = "queue:geo:0.5:geo:0.3".parse().unwrap();
    let seeds = 4000u64;
    let mut at_zero = 0u64;
    for seed in 0..seeds {
        let noise = m.noise(derive_seed(31, seed), CouplingMode::Common);
        let mut seq = LoynesSequence::new(&m, &noise).unwrap();
        let a = seq.value(2000);
        assert_eq!(a, seq.value(20_000), "seed {seed}: L_n still moving");
        at_zero += u64::from(a == 0);
    }
    let p_hat = at_zero as f64 / seeds as f64;

    let noise = m.noise(77, CouplingMode::TotallyIndependent);
    let steps = 2_000_000i64;
    let mut x = 0;
    let mut visits = 0u64;
    for t in 0..steps {
        x = doeblin::step(&m, x, &noise.noise_at(t, 0)).unwrap();
        visits += u64::from(x == 0);
    }
    let p_time = visits as f64 / steps as f64;
    let se = (p_hat * (1.0 - p_hat) / seeds as f64).sqrt();
    assert!((p_hat - p_time).abs() <= 4.0 * se + 0.005, "P(L_inf = 0) {p_hat} vs time at 0 {p_time}");
    assert_eq!(loynes_value(&m, &m.noise(1, CouplingMode::Common), 0).unwrap(), 0);
}
