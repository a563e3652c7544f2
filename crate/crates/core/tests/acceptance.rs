//! Acceptance suite. Runs every criterion at its stated tolerance, prints one
//! PASS/FAIL line per criterion and exits nonzero if any fails.
//!
//! Built with `harness = false`; run it with `cargo test --test acceptance`.

use std::time::Instant;

use doeblin::bridge::{build_bridge, build_bridge_with_budget, multiplicities, recurrence_times, s_set};
use doeblin::estimators::{
    invariant_measure_oracle, k_function, mean_measure, pooled_z, rejection_stationary_sample, EstimatorReport,
    KConvention, ReportRow,
};
use doeblin::renewal::{couple_bridge_eft, flying_edges, meeting_experiment, renewal_exact_depth, sample_eff, RENEWAL_EXACT_TOL};
use doeblin::sampler::{record_decomposition, sample_potential, sample_taboo, SampleStatus, SearchStrategy};
use doeblin::{
    derive_seed, iterate_dynamics, potential_step, Error, taboo_step, Chain, ChainModel, CountingMeasure, CouplingMode, DynamicsKind,
    JumpDistribution, NoiseField, Result, State,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome {
        pass,
        detail: detail.into(),
    })
}

fn model(spec: &str) -> ChainModel {
    spec.parse().expect("built-in model spec")
}

fn dist(spec: &str) -> JumpDistribution {
    spec.parse().expect("built-in distribution spec")
}

// Models and couplings of the pathwise fixed-point checks.
fn fixed_point_cases() -> Vec<(ChainModel, CouplingMode)> {
    vec![
        (model("renewal:geo:0.5"), CouplingMode::TotallyIndependent),
        (model("queue:geo:0.2:geo:0.2"), CouplingMode::Common),
    ]
}

fn fixed_point(kind: DynamicsKind) -> Result<Outcome> {
    const SEEDS: u64 = 1000;
    const N: i64 = 200;
    let mut checked = 0u64;
    let mut mismatches = 0u64;
    for (m, mode) in fixed_point_cases() {
        for s in 0..SEEDS {
            let noise = m.noise(derive_seed(0xF1, s), mode);
            let bridge = build_bridge(&m, &noise, -N, 1)?;
            let col0 = multiplicities(&bridge, 0, kind)?;
            let col1 = multiplicities(&bridge, 1, kind)?;
            let stepped = match kind {
                DynamicsKind::Taboo => taboo_step(&col0, &m, &noise, 0)?,
                DynamicsKind::Potential => potential_step(&col0, &m, &noise, 0)?,
            };
            checked += 1;
            mismatches += u64::from(stepped != col1);
        }
    }
    outcome(
        mismatches == 0,
        format!("{checked} windows (N={N}), {mismatches} mismatches"),
    )
}

fn report_z_max(a: &EstimatorReport, b: &EstimatorReport) -> (f64, State) {
    a.rows
        .iter()
        .map(|r| (pooled_z(r, b.row(r.state).expect("same region")), r.state))
        .fold((0.0, 0), |acc, x| if x.0 > acc.0 { x } else { acc })
}

fn criterion_3() -> Result<Outcome> {
    const SAMPLES: u64 = 100_000;
    const K: State = 5;
    let m = model("renewal:geo:0.5");
    let samples: Vec<_> = (0..SAMPLES)
        .map(|i| sample_taboo(&m, &m.noise(derive_seed(0x33, i), CouplingMode::Common), K, 1 << 20))
        .collect::<Result<_>>()?;
    let exact = samples.iter().all(|s| s.status == SampleStatus::Exact);
    let atoms: Vec<CountingMeasure> = samples.into_iter().map(|s| s.atoms).collect();
    let mean = mean_measure(&atoms, K)?;
    let oracle = invariant_measure_oracle(&m, K, SAMPLES, &m.noise(0x34, CouplingMode::TotallyIndependent))?;
    let (z, at) = report_z_max(&mean, &oracle);
    // closed form 0.5^j against the mean measure, within 3 standard errors
    let closed_ok = mean.rows.iter().all(|r| {
        let want = 0.5f64.powi(r.state as i32);
        (r.estimate - want).abs() <= 3.0 * r.stderr.max(f64::MIN_POSITIVE) || r.estimate == want
    });
    outcome(
        exact && z <= 3.0 && closed_ok,
        format!(
            "max pooled z {z:.2} at state {at}; closed form 0.5^j {}; all exact: {exact}; mean(1)={:.4}",
            if closed_ok { "ok" } else { "violated" },
            mean.rows[1].estimate
        ),
    )
}

fn criterion_4() -> Result<Outcome> {
    let mut total = 0u64;
    let mut bad = 0u64;
    // record and forest samplers
    let cases: [(&str, u64, State, u64); 5] = [
        ("renewal:geo:0.5", 1000, 50, 1 << 20),
        ("renewal:zeta:1.5", 200, 50, 1 << 16),
        ("queue:geo:0.2:geo:0.2", 1000, 50, 1_000_000),
        ("queue:geo:0.3:geo:0.2", 200, 10, 100_000),
        ("reflectedrw", 200, 20, 10_000),
    ];
    for (spec, seeds, k, max_n) in cases {
        let m = model(spec);
        for s in 0..seeds {
            let t = sample_taboo(&m, &m.noise(derive_seed(0x44, s), CouplingMode::Common), k, max_n)?;
            total += 1;
            bad += u64::from(t.atoms.get(m.reference_state()) != 1);
        }
    }
    // bridge multiplicities for every model, including the non-monotone walk
    for spec in ["renewal:geo:0.5", "lazyrw", "reflectedrw", "queue:geo:0.2:geo:0.2"] {
        let m = model(spec);
        for mode in [CouplingMode::TotallyIndependent, CouplingMode::Common] {
            for s in 0..200 {
                let b = build_bridge(&m, &m.noise(derive_seed(0x45, s), mode), -100, 0)?;
                let t = multiplicities(&b, 0, DynamicsKind::Taboo)?;
                total += 1;
                bad += u64::from(t.get(m.reference_state()) != 1);
            }
        }
    }
    outcome(bad == 0, format!("{total} taboo samples, {bad} with tau(s*) != 1"))
}

fn criterion_5() -> Result<Outcome> {
    const SEEDS: u64 = 500;
    const K: State = 20;
    let mut compared = 0u64;
    let mut mismatches = 0u64;
    let mut censored = 0u64;
    let mut streamed = 0u64;

    let m = model("renewal:geo:0.5");
    let d = m.renewal_jumps().expect("renewal");
    let depth = renewal_exact_depth(d, K, RENEWAL_EXACT_TOL).expect("light tail");
    for s in 0..SEEDS {
        let noise = m.noise(derive_seed(0x55, s), CouplingMode::Common);
        let t = sample_taboo(&m, &noise, K, 1 << 20)?;
        let p = sample_potential(&m, &noise, K, depth, SearchStrategy::ExponentialSearch)?;
        let b = build_bridge(&m, &noise, -(depth as i64), 0)?;
        compared += 2;
        mismatches += u64::from(t.atoms != multiplicities(&b, 0, DynamicsKind::Taboo)?.restrict(0, K));
        mismatches += u64::from(p.atoms != multiplicities(&b, 0, DynamicsKind::Potential)?.restrict(0, K));
    }

    // seeds whose queue sample is censored are not exact samples; they are
    // skipped and counted, and seeds are drawn until 500 exact ones are seen
    let m = model("queue:geo:0.2:geo:0.2");
    let mut exact_seeds = 0u64;
    let mut s = 0u64;
    while exact_seeds < SEEDS {
        let noise = m.noise(derive_seed(0x56, s), CouplingMode::Common);
        s += 1;
        let t = sample_taboo(&m, &noise, K, 1_000_000)?;
        let p = sample_potential(&m, &noise, K, 1_000_000, SearchStrategy::ExponentialSearch)?;
        if t.status != SampleStatus::Exact || p.status != SampleStatus::Exact {
            censored += 1;
            continue;
        }
        exact_seeds += 1;
        // every start at or before the terminal index sits above K at time 0
        let t_min = -(t.depth_used as i64) - 1;
        let (taboo, potential) = match build_bridge_with_budget(&m, &noise, t_min, 0, 5_000_000) {
            Ok(b) => (
                multiplicities(&b, 0, DynamicsKind::Taboo)?,
                multiplicities(&b, 0, DynamicsKind::Potential)?,
            ),
            Err(Error::Resource(_)) => {
                // same columns, streamed one at a time
                streamed += 1;
                let n = t_min.unsigned_abs();
                let start = CountingMeasure::delta(0);
                (
                    iterate_dynamics(&start, DynamicsKind::Taboo, &m, &noise, t_min, n)?,
                    iterate_dynamics(&start, DynamicsKind::Potential, &m, &noise, t_min, n)?,
                )
            }
            Err(e) => return Err(e),
        };
        compared += 2;
        mismatches += u64::from(t.atoms != taboo.restrict(0, K));
        mismatches += u64::from(p.atoms != potential.restrict(0, K));
    }
    outcome(
        mismatches == 0,
        format!(
            "{compared} sample/graph pairs over {SEEDS} seeds per model, {mismatches} mismatches \
             ({censored} censored queue seeds skipped; {streamed} deep queue windows streamed column by column)"
        ),
    )
}

fn criterion_6() -> Result<Outcome> {
    const SEEDS: u64 = 500;
    const K: State = 20;
    let m = model("queue:geo:0.2:geo:0.2");
    let mut differ = 0u64;
    let mut deep = 0u64;
    let mut fewer = 0u64;
    for s in 0..SEEDS {
        let noise = m.noise(derive_seed(0x66, s), CouplingMode::Common);
        let lin = record_decomposition(&m, &noise, K, 1_000_000, SearchStrategy::Linear)?;
        let exp = record_decomposition(&m, &noise, K, 1_000_000, SearchStrategy::ExponentialSearch)?;
        let pot = |d: &doeblin::sampler::RecordDecomposition| -> CountingMeasure {
            d.records.iter().map(|r| (r.value, r.run)).collect()
        };
        differ += u64::from(
            pot(&lin) != pot(&exp) || lin.status != exp.status || lin.terminal_index != exp.terminal_index,
        );
        if lin.terminal_index.is_some_and(|n| n >= 64) {
            deep += 1;
            fewer += u64::from(exp.evaluations < lin.evaluations);
        }
    }
    let frac = fewer as f64 / deep.max(1) as f64;
    outcome(
        differ == 0 && deep > 0 && frac >= 0.9,
        format!(
            "{differ}/{SEEDS} seeds differ; fewer evaluations on {fewer}/{deep} seeds with terminal index >= 64 ({:.1}%)",
            100.0 * frac
        ),
    )
}

fn criterion_7() -> Result<Outcome> {
    const RUNS: u64 = 200;
    let m = model("renewal:zeta:0.75");
    let mut means = Vec::new();
    for (c, cap) in [1_000u64, 10_000, 100_000].into_iter().enumerate() {
        let mut sum = 0u64;
        for r in 0..RUNS {
            let noise = m.noise(derive_seed(0x77 + c as u64, r), CouplingMode::Common);
            sum += sample_potential(&m, &noise, 0, cap, SearchStrategy::ExponentialSearch)?.atoms.get(0);
        }
        means.push(sum as f64 / RUNS as f64);
    }
    outcome(
        means.windows(2).all(|w| w[1] > w[0]),
        format!(
            "mean pi(s*) at depth 1e3/1e4/1e5: {:.1} / {:.1} / {:.1}",
            means[0], means[1], means[2]
        ),
    )
}

fn criterion_8() -> Result<Outcome> {
    let noise = NoiseField::new(0x88, CouplingMode::TotallyIndependent, 1);
    let mut freqs = Vec::new();
    for a in ["zeta:0.9", "zeta:0.75", "zeta:0.5", "zeta:0.25"] {
        freqs.push(meeting_experiment(&dist(a), 1, 100_000, 1000, &noise)?.frequency);
    }
    let monotone = freqs.windows(2).all(|w| w[1] <= w[0]);
    let gap = freqs[0] - freqs[3];
    outcome(
        monotone && gap >= 0.2,
        format!(
            "meeting frequency at alpha 0.9/0.75/0.5/0.25: {:.3} / {:.3} / {:.3} / {:.3}",
            freqs[0], freqs[1], freqs[2], freqs[3]
        ),
    )
}

fn criterion_9() -> Result<Outcome> {
    let m = model("renewal:geo:0.5");
    let r = recurrence_times(&m, &m.noise(0x99, CouplingMode::TotallyIndependent), -1_000_000, 0, 1 << 40)?;
    let (mean, n) = r.mean_uncensored();
    outcome(
        n == 1_000_000 && (mean - 2.0).abs() <= 0.02 * 2.0,
        format!("mean first-return time {mean:.4} over {n} excursions"),
    )
}

fn criterion_10() -> Result<Outcome> {
    const SEEDS: u64 = 1000;
    const W: i64 = 10_000;
    let m = model("renewal:geo:0.5");
    let d = m.renewal_jumps().expect("renewal").clone();
    let mut bad_eff = 0u64;
    let mut bad_return = 0u64;
    let mut bad_bijection = 0u64;
    let mut literal_count_mismatch = 0u64;
    for s in 0..SEEDS {
        let noise = m.noise(derive_seed(0xA0, s), CouplingMode::TotallyIndependent);
        let bridge = build_bridge(&m, &noise, -W, 0)?;
        let eff = couple_bridge_eft(&bridge)?;
        bad_eff += u64::from(eff != sample_eff(&d, -W, -1, &noise)?);
        let rt = recurrence_times(&m, &noise, -W, 0, 1 << 40)?;
        bad_return += u64::from(
            eff.edges()
                .zip(&rt.times)
                .any(|((i, j), &(t, cens))| cens || (j - i) as u64 != t),
        );
        let flying = flying_edges(&eff)?;
        let mut ends: Vec<State> = flying.iter().map(|e| e.1).collect();
        ends.sort_unstable();
        ends.dedup();
        let s_minus: Vec<State> = s_set(&bridge, 0)?.into_iter().filter(|&x| x != 0).collect();
        let taboo = multiplicities(&bridge, 0, DynamicsKind::Taboo)?;
        bad_bijection += u64::from(ends != s_minus || flying.len() as u64 != taboo.total_mass() - 1);
        literal_count_mismatch += u64::from(flying.len() != s_minus.len());
    }
    outcome(
        bad_eff + bad_return + bad_bijection == 0,
        format!(
            "{SEEDS} windows of {W}: {bad_eff} forest, {bad_return} return-time, {bad_bijection} bijection failures \
             (edge count differs from |S \\ {{s*}}| on {literal_count_mismatch} windows where paths coalesce)"
        ),
    )
}

fn criterion_11() -> Result<Outcome> {
    const ACCEPTANCES: u64 = 100_000;
    let m = model("renewal:emp:1=0.5,2=0.5");
    let mut counts = [0u64; 2];
    let mut attempts = 0u64;
    for j in 0..ACCEPTANCES {
        let seed = derive_seed(0xB0, j);
        let pick = NoiseField::new(seed, CouplingMode::TotallyIndependent, 2);
        let acc = rejection_stationary_sample(
            |a| Ok(sample_taboo(&m, &m.noise(derive_seed(seed, a + 1), CouplingMode::TotallyIndependent), 5, 64)?.atoms),
            3,
            1000,
            &pick,
        )?;
        counts[acc.state as usize] += 1;
        attempts += acc.attempts;
    }
    let p0 = counts[0] as f64 / ACCEPTANCES as f64;
    let p1 = counts[1] as f64 / ACCEPTANCES as f64;
    let tv = 0.5 * ((p0 - 2.0 / 3.0).abs() + (p1 - 1.0 / 3.0).abs());
    outcome(
        tv <= 0.01,
        format!(
            "frequencies ({p0:.4}, {p1:.4}), TV {tv:.4}, acceptance rate {:.3}",
            ACCEPTANCES as f64 / attempts as f64
        ),
    )
}

fn criterion_12() -> Result<Outcome> {
    const SAMPLES: u64 = 10_000;
    const K: State = 100;
    const I: State = 50;
    let thin = |s: u64| -> CountingMeasure {
        let noise = NoiseField::new(derive_seed(0xC0, s), CouplingMode::TotallyIndependent, 1);
        (0..=K).filter(|&x| noise.uniform(0, x, 0) < 0.3).map(|x| (x, 1)).collect()
    };
    let samples: Vec<CountingMeasure> = (0..SAMPLES).map(thin).collect();
    let mut pass = true;
    let mut parts = Vec::new();
    for r in [2, 5, 10, 25] {
        let k = k_function(&samples, I, r, KConvention::Punctured)?;
        let z = (k.value - 1.0).abs() / k.stderr;
        pass &= z <= 3.0;
        parts.push(format!("K({r})={:.3}+-{:.3}", k.value, k.stderr));
    }

    // critical queue on [0, 1000]: reported only
    let m = model("queue:geo:0.2:geo:0.2");
    let mut queue = Vec::new();
    for s in 0..300 {
        let t = sample_taboo(&m, &m.noise(derive_seed(0xC1, s), CouplingMode::Common), 1000, 1_000_000)?;
        if t.status == SampleStatus::Exact {
            queue.push(t.atoms);
        }
    }
    let mut q = Vec::new();
    for r in [2, 5, 20, 100] {
        match k_function(&queue, 500, r, KConvention::Punctured) {
            Ok(k) => q.push(format!("{:.2}", k.value)),
            Err(_) => q.push("undefined".into()),
        }
    }
    outcome(
        pass,
        format!(
            "thinning {}; critical queue K_500(2/5/20/100) = {} over {} exact samples (reported)",
            parts.join(", "),
            q.join(" / "),
            queue.len()
        ),
    )
}

fn criterion_13() -> Result<Outcome> {
    const SAMPLES: u64 = 10_000;
    const K: State = 5;
    let m = model("renewal:geo:0.5");
    let mean_under = |mode: CouplingMode| -> Result<Vec<ReportRow>> {
        let atoms: Vec<CountingMeasure> = (0..SAMPLES)
            .map(|i| sample_taboo(&m, &m.noise(derive_seed(0xD0, i), mode), K, 1 << 20).map(|s| s.atoms))
            .collect::<Result<_>>()?;
        Ok(mean_measure(&atoms, K)?.rows)
    };
    let ti = mean_under(CouplingMode::TotallyIndependent)?;
    let common = mean_under(CouplingMode::Common)?;
    let z = ti
        .iter()
        .zip(&common)
        .map(|(a, b)| pooled_z(a, b))
        .fold(0.0, f64::max);
    outcome(z <= 3.0, format!("max pooled z {z:.2} over states 0..={K}"))
}

fn main() {
    type Criterion = fn() -> Result<Outcome>;
    let criteria: [(&str, Criterion); 13] = [
        ("taboo fixed point", || fixed_point(DynamicsKind::Taboo)),
        ("potential fixed point", || fixed_point(DynamicsKind::Potential)),
        ("mean measure equals invariant measure", criterion_3),
        ("unit mass at s*", criterion_4),
        ("samplers agree with bridge multiplicities", criterion_5),
        ("exponential search equivalence", criterion_6),
        ("potential divergence", criterion_7),
        ("connectivity threshold", criterion_8),
        ("recurrence-time mean", criterion_9),
        ("coupling audit", criterion_10),
        ("rejection sampler", criterion_11),
        ("K-function benchmark", criterion_12),
        ("coupling independence of the taboo mean", criterion_13),
    ];
    let only: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let id = i + 1;
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let (pass, detail) = match f() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!pass);
        println!(
            "{} [{id:02}] {name}: {detail} ({:.1}s)",
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
