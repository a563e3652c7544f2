//! Estimators built on samples of the taboo and potential processes.
//!
//! The invariant measure normalized by `sigma(s*) = 1` is the expected number
//! of visits to each state during an excursion from `s*`; the taboo process
//! has that same mean measure. Both sides are estimated here, together with
//! a local second-order diagnostic and the stationary-distribution sampler
//! that biases taboo samples by their mass.

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::CountingMeasure;
use crate::model::{advance, check_noise, Chain, State};
use crate::noise::{derive_seed, NoiseField};

/// Longest excursion followed before it is reported censored.
pub const EXCURSION_CAP: u64 = 10_000_000;

/// One state's estimate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub state: State,
    pub estimate: f64,
    pub stderr: f64,
    pub n: u64,
    pub censored_fraction: f64,
}

/// Per-state estimates with free-form metadata.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EstimatorReport {
    pub rows: Vec<ReportRow>,
    pub metadata: BTreeMap<String, String>,
}

impl EstimatorReport {
    pub fn row(&self, state: State) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.state == state)
    }

    pub fn with_meta(mut self, key: &str, value: impl ToString) -> Self {
        self.metadata.insert(key.to_string(), value.to_string());
        self
    }

    /// `state,estimate,stderr,n,censored_fraction`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "state,estimate,stderr,n,censored_fraction")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{}",
                r.state, r.estimate, r.stderr, r.n, r.censored_fraction
            )?;
        }
        Ok(())
    }
}

/// `|a - b|` in units of the pooled standard error `sqrt(se_a^2 + se_b^2)`.
/// Equal estimates score 0 even when both errors vanish.
pub fn pooled_z(a: &ReportRow, b: &ReportRow) -> f64 {
    let d = (a.estimate - b.estimate).abs();
    if d == 0.0 {
        return 0.0;
    }
    d / (a.stderr.powi(2) + b.stderr.powi(2)).sqrt()
}

// Integer sums keep aggregation exact and independent of thread count.
#[derive(Clone)]
struct Moments {
    sum: Vec<u64>,
    sumsq: Vec<u128>,
    n: u64,
    censored: u64,
}

impl Moments {
    fn new(len: usize) -> Self {
        Moments {
            sum: vec![0; len],
            sumsq: vec![0; len],
            n: 0,
            censored: 0,
        }
    }

    fn push(&mut self, counts: &[u64], censored: bool) {
        for (i, &c) in counts.iter().enumerate() {
            self.sum[i] += c;
            self.sumsq[i] += (c as u128) * (c as u128);
        }
        self.n += 1;
        self.censored += u64::from(censored);
    }

    fn merge(mut self, other: Moments) -> Moments {
        for i in 0..self.sum.len() {
            self.sum[i] += other.sum[i];
            self.sumsq[i] += other.sumsq[i];
        }
        self.n += other.n;
        self.censored += other.censored;
        self
    }

    fn rows(&self, first_state: State) -> Vec<ReportRow> {
        let n = self.n as f64;
        (0..self.sum.len())
            .map(|i| {
                let mean = self.sum[i] as f64 / n;
                let var = if self.n > 1 {
                    ((self.sumsq[i] as f64 - n * mean * mean) / (n - 1.0)).max(0.0)
                } else {
                    0.0
                };
                ReportRow {
                    state: first_state + i as State,
                    estimate: mean,
                    stderr: (var / n).sqrt(),
                    n: self.n,
                    censored_fraction: self.censored as f64 / n,
                }
            })
            .collect()
    }
}

/// Visits to `0..=k` during one excursion from `s*`, started with a unit at
/// `s*`. Returns the counts and whether the cap was hit.
fn excursion<C: Chain + ?Sized>(model: &C, noise: &NoiseField, k: State, cap: u64) -> (Vec<u64>, bool) {
    let star = model.reference_state();
    let mut counts = vec![0u64; k as usize + 1];
    let mut x = star;
    for t in 0..cap {
        if (0..=k).contains(&x) {
            counts[x as usize] += 1;
        }
        x = advance(model, noise, t as i64, x);
        if x == star {
            return (counts, false);
        }
    }
    (counts, true)
}

/// Mean number of visits to each `j` in `0..=k` per excursion from `s*`,
/// over `n_excursions` excursions; excursion `i` runs on
/// `noise.replicate(i)`. Censored excursions keep the visits seen before the
/// cap and are reported in `censored_fraction`.
pub fn invariant_measure_oracle<C: Chain + ?Sized>(
    model: &C,
    k: State,
    n_excursions: u64,
    noise: &NoiseField,
) -> Result<EstimatorReport> {
    if k < 0 {
        return Err(Error::Usage(format!("region bound must be nonnegative, got {k}")));
    }
    if n_excursions == 0 {
        return Err(Error::Usage("at least one excursion is needed".into()));
    }
    check_noise(model, noise)?;
    let len = k as usize + 1;
    let m = (0..n_excursions)
        .into_par_iter()
        .fold(
            || Moments::new(len),
            |mut acc, i| {
                let (c, cens) = excursion(model, &noise.replicate(i), k, EXCURSION_CAP);
                acc.push(&c, cens);
                acc
            },
        )
        .reduce(|| Moments::new(len), Moments::merge);
    Ok(EstimatorReport {
        rows: m.rows(0),
        metadata: BTreeMap::new(),
    }
    .with_meta("model", model.name())
    .with_meta("seed", noise.seed())
    .with_meta("excursions", n_excursions))
}

/// Per-state mean and standard error of `samples` on `0..=k`.
pub fn mean_measure(samples: &[CountingMeasure], k: State) -> Result<EstimatorReport> {
    if samples.len() < 2 {
        return Err(Error::Usage("a mean measure needs at least two samples".into()));
    }
    if k < 0 {
        return Err(Error::Usage(format!("region bound must be nonnegative, got {k}")));
    }
    let mut m = Moments::new(k as usize + 1);
    let mut counts = vec![0u64; k as usize + 1];
    for s in samples {
        for (j, c) in counts.iter_mut().enumerate() {
            *c = s.get(j as State);
        }
        m.push(&counts, false);
    }
    Ok(EstimatorReport {
        rows: m.rows(0),
        metadata: BTreeMap::new(),
    }
    .with_meta("samples", samples.len()))
}

/// How the atom at `i` itself enters `M(i - r, i + r)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KConvention {
    /// Count every atom with `i - r < state < i + r`, `i` included.
    Inclusive,
    /// Leave the atom at `i` out of both numerator and denominator, so that
    /// independent placement gives exactly 1.
    Punctured,
}

/// `K_i(r)` with a jackknife standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KEstimate {
    pub value: f64,
    pub stderr: f64,
    /// Samples with `M(i) = 1`.
    pub conditioned: usize,
    pub samples: usize,
}

/// `E[M(i-r, i+r) | M(i) = 1] / E[M(i-r, i+r)]` estimated by sample means.
/// The conditioning event is "multiplicity at `i` is exactly 1".
pub fn k_function(
    samples: &[CountingMeasure],
    i: State,
    r: State,
    convention: KConvention,
) -> Result<KEstimate> {
    if r < 1 {
        return Err(Error::Usage(format!("radius must be at least 1, got {r}")));
    }
    if samples.len() < 2 {
        return Err(Error::Usage("K-function needs at least two samples".into()));
    }
    let window = |m: &CountingMeasure| -> f64 {
        let all = m.mass_between(i - r, i + r);
        (match convention {
            KConvention::Inclusive => all,
            KConvention::Punctured => all - m.get(i),
        }) as f64
    };
    let obs: Vec<(f64, bool)> = samples.iter().map(|m| (window(m), m.get(i) == 1)).collect();
    let n = obs.len();
    let total: f64 = obs.iter().map(|o| o.0).sum();
    let cond_sum: f64 = obs.iter().filter(|o| o.1).map(|o| o.0).sum();
    let cond_n = obs.iter().filter(|o| o.1).count();
    let ratio = |total: f64, n: usize, cond_sum: f64, cond_n: usize| -> Option<f64> {
        (cond_n > 0 && total > 0.0).then(|| (cond_sum / cond_n as f64) / (total / n as f64))
    };
    let value = ratio(total, n, cond_sum, cond_n).ok_or_else(|| {
        Error::Undefined(if cond_n == 0 {
            format!("no sample has multiplicity 1 at {i}")
        } else {
            format!("no mass in ({}, {}) across samples", i - r, i + r)
        })
    })?;
    // delete-one jackknife
    let mut loo = Vec::with_capacity(n);
    for &(w, c) in &obs {
        let (cs, cn) = if c { (cond_sum - w, cond_n - 1) } else { (cond_sum, cond_n) };
        if let Some(v) = ratio(total - w, n - 1, cs, cn) {
            loo.push(v);
        }
    }
    let stderr = if loo.len() > 1 {
        let m = loo.iter().sum::<f64>() / loo.len() as f64;
        let ss: f64 = loo.iter().map(|v| (v - m).powi(2)).sum();
        ((loo.len() - 1) as f64 / loo.len() as f64 * ss).sqrt()
    } else {
        f64::NAN
    };
    Ok(KEstimate {
        value,
        stderr,
        conditioned: cond_n,
        samples: n,
    })
}

/// A state drawn with probability proportional to its multiplicity: the
/// first state whose cumulative mass exceeds `u * total`.
pub fn biased_point_sample(sample: &CountingMeasure, u: f64) -> Result<State> {
    let total = sample.total_mass();
    if total == 0 {
        return Err(Error::Usage("cannot pick a point from an empty sample".into()));
    }
    let target = u * total as f64;
    let mut acc = 0u64;
    for (s, c) in sample.iter() {
        acc += c;
        if acc as f64 > target {
            return Ok(s);
        }
    }
    Ok(sample.max_state().expect("nonempty"))
}

/// Result of the rejection sampler.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Acceptance {
    pub state: State,
    pub attempts: u64,
}

/// Draws taboo samples `T` (attempt `a` calls `taboo_sampler(a)`), picks a
/// point of `T` proportionally to multiplicity and accepts it with
/// probability `m(T) / m_bound`. The accepted point is stationary.
///
/// The sampler must return an independent sample on each call; reusing
/// noise across attempts biases the output.
pub fn rejection_stationary_sample<F>(
    mut taboo_sampler: F,
    m_bound: u64,
    max_attempts: u64,
    noise: &NoiseField,
) -> Result<Acceptance>
where
    F: FnMut(u64) -> Result<CountingMeasure>,
{
    if m_bound == 0 {
        return Err(Error::Usage("mass bound must be positive".into()));
    }
    for a in 0..max_attempts {
        let t = taboo_sampler(a)?;
        let mass = t.total_mass();
        if mass > m_bound {
            return Err(Error::InvalidBound { mass, bound: m_bound });
        }
        let y = biased_point_sample(&t, noise.uniform(a as i64, 0, 0))?;
        if noise.uniform(a as i64, 0, 1) * (m_bound as f64) < mass as f64 {
            return Ok(Acceptance {
                state: y,
                attempts: a + 1,
            });
        }
    }
    Err(Error::Censored {
        attempts: max_attempts,
    })
}

/// Runs `f(index, seed)` for `index in 0..n` with per-index seeds derived
/// from `seed`; the output order and values do not depend on the number of
/// threads.
pub fn replicate<T, F>(n: u64, seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, u64) -> T + Sync + Send,
{
    (0..n)
        .into_par_iter()
        .map(|i| f(i, derive_seed(seed, i)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ChainModel;
    use crate::noise::CouplingMode;

    fn noise(seed: u64) -> NoiseField {
        NoiseField::new(seed, CouplingMode::TotallyIndependent, 2)
    }

    #[test]
    fn oracle_renewal_geometric() {
        let m: ChainModel = "renewal:geo:0.5".parse().unwrap();
        let r = invariant_measure_oracle(&m, 5, 100_000, &noise(1)).unwrap();
        assert_eq!(r.row(0).unwrap().estimate, 1.0);
        assert_eq!(r.row(0).unwrap().stderr, 0.0);
        for j in 1..=5 {
            let row = r.row(j).unwrap();
            let exact = 0.5f64.powi(j as i32);
            assert!((row.estimate - exact).abs() < 3.0 * row.stderr + 1e-12, "{row:?}");
        }
    }

    #[test]
    fn oracle_two_point_renewal() {
        let m: ChainModel = "renewal:emp:1=0.5,2=0.5".parse().unwrap();
        let r = invariant_measure_oracle(&m, 3, 50_000, &noise(2)).unwrap();
        assert_eq!(r.row(0).unwrap().estimate, 1.0);
        let s1 = r.row(1).unwrap();
        assert!((s1.estimate - 0.5).abs() < 3.0 * s1.stderr);
        assert_eq!(r.row(2).unwrap().estimate, 0.0);
    }

    #[test]
    fn mean_measure_basics() {
        let s = vec![CountingMeasure::from_pairs([(0, 1), (2, 2)]), CountingMeasure::delta(0)];
        let r = mean_measure(&s, 3).unwrap();
        assert_eq!(r.row(0).unwrap().estimate, 1.0);
        assert_eq!(r.row(0).unwrap().stderr, 0.0);
        assert_eq!(r.row(2).unwrap().estimate, 1.0);
        assert!((r.row(2).unwrap().stderr - 1.0).abs() < 1e-12);
        assert!(mean_measure(&s[..1], 3).is_err());
    }

    #[test]
    fn k_function_examples() {
        let same = vec![CountingMeasure::delta(4); 5];
        let k = k_function(&same, 4, 2, KConvention::Inclusive).unwrap();
        assert_eq!(k.value, 1.0);
        let mixed = vec![
            CountingMeasure::from_pairs([(4, 1), (5, 1)]),
            CountingMeasure::delta(5),
        ];
        assert!(k_function(&mixed, 4, 2, KConvention::Inclusive).unwrap().value > 1.0);
        let none = vec![CountingMeasure::delta(9); 3];
        assert!(matches!(
            k_function(&none, 4, 2, KConvention::Inclusive),
            Err(Error::Undefined(_))
        ));
        assert!(matches!(
            k_function(&same, 4, 2, KConvention::Punctured),
            Err(Error::Undefined(_))
        ));
    }

    #[test]
    fn biased_pick_examples() {
        let m = CountingMeasure::from_pairs([(0, 1), (3, 3)]);
        assert_eq!(biased_point_sample(&m, 0.1).unwrap(), 0);
        assert_eq!(biased_point_sample(&m, 0.5).unwrap(), 3);
        assert_eq!(biased_point_sample(&CountingMeasure::delta(7), 0.99).unwrap(), 7);
        assert!(biased_point_sample(&CountingMeasure::new(), 0.5).is_err());
    }

    #[test]
    fn rejection_with_a_deterministic_law() {
        let nf = noise(5);
        let n = 20_000;
        let mut attempts = 0;
        for i in 0..n {
            let a = rejection_stationary_sample(|_| Ok(CountingMeasure::delta(0)), 2, 1000, &nf.replicate(i))
                .unwrap();
            assert_eq!(a.state, 0);
            attempts += a.attempts;
        }
        let rate = n as f64 / attempts as f64;
        assert!((rate - 0.5).abs() < 0.02, "rate {rate}");
    }

    #[test]
    fn rejection_bound_violation() {
        let t = CountingMeasure::from_pairs([(0, 1), (1, 3)]);
        let err = rejection_stationary_sample(|_| Ok(t.clone()), 2, 10, &noise(0)).unwrap_err();
        assert!(matches!(err, Error::InvalidBound { mass: 4, bound: 2 }));
    }

    #[test]
    fn rejection_censors() {
        let err = rejection_stationary_sample(|_| Ok(CountingMeasure::delta(0)), 1 << 40, 5, &noise(0))
            .unwrap_err();
        assert!(matches!(err, Error::Censored { attempts: 5 }));
    }

    #[test]
    fn replicate_is_ordered() {
        let v = replicate(100, 9, |i, s| (i, s));
        assert!(v.iter().enumerate().all(|(k, &(i, s))| k as u64 == i && s == derive_seed(9, i)));
    }

    #[test]
    fn csv_report() {
        let r = mean_measure(&[CountingMeasure::delta(0), CountingMeasure::delta(0)], 1).unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), "state,estimate,stderr,n,censored_fraction");
        assert_eq!(text.lines().count(), 3);
    }
}
