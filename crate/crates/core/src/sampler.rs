//! Perfect sampling of the taboo and potential processes on `[s*, K]` for
//! monotone chains under common noise.
//!
//! The Loynes value `L_n` is the state at time 0 of the path started at
//! `(-n, s*)`, where `s*` is the minimum state. Monotonicity makes `L_n`
//! nondecreasing, and the path from `(-n, s*)` sits at `L_n` at time 0, so
//! the potential measure is the run-length encoding of `(L_n)` and the
//! sample on `[s*, K]` is settled once some `L_n` exceeds `K`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::CountingMeasure;
use crate::model::{Chain, State};
use crate::noise::{NoiseField, Uniforms};

/// Whether a sample is the exact restriction to `[s*, K]` or a windowed
/// value cut off by the depth cap.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleStatus {
    Exact,
    Censored,
}

/// How record boundaries are located.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchStrategy {
    /// Evaluate `L_0, L_1, ...` in order.
    Linear,
    /// Find the end of each run by doubling, then bisection.
    ExponentialSearch,
}

/// A maximal run of equal Loynes values.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Record {
    pub value: State,
    /// First index of the run.
    pub index: u64,
    /// Number of indices in the run.
    pub run: u64,
}

/// The runs of `(L_n)` with values at most `K`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordDecomposition {
    pub records: Vec<Record>,
    pub status: SampleStatus,
    /// First index with `L_n > K`, when found within the cap.
    pub terminal_index: Option<u64>,
    /// Distinct Loynes indices evaluated.
    pub evaluations: u64,
}

impl RecordDecomposition {
    /// Last index covered: the terminal index, or the cap when censored.
    pub fn depth_used(&self) -> u64 {
        match self.terminal_index {
            Some(n) => n,
            None => self.records.last().map(|r| r.index + r.run - 1).unwrap_or(0),
        }
    }

    /// Checks the structural invariants: strictly increasing values and
    /// indices, positive runs, contiguous coverage from index 0.
    pub fn is_consistent(&self) -> bool {
        let mut next_index = 0;
        let mut last_value = None;
        for r in &self.records {
            if r.run == 0 || r.index != next_index || last_value.is_some_and(|v| r.value <= v) {
                return false;
            }
            next_index = r.index + r.run;
            last_value = Some(r.value);
        }
        self.terminal_index.is_none_or(|t| t == next_index)
    }
}

/// A sample with its provenance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sample {
    pub atoms: CountingMeasure,
    pub status: SampleStatus,
    pub depth_used: u64,
    pub records: Vec<Record>,
}

fn check_monotone<C: Chain + ?Sized>(model: &C, noise: &NoiseField) -> Result<()> {
    if !model.is_monotone() {
        return Err(Error::Usage(format!(
            "model {} is not monotone; the record construction does not apply",
            model.name()
        )));
    }
    if model.min_state() != Some(model.reference_state()) {
        return Err(Error::Usage(format!(
            "model {} needs s* to be the minimum state",
            model.name()
        )));
    }
    if !noise.mode().is_shared() {
        return Err(Error::Usage(
            "the record construction needs common noise".into(),
        ));
    }
    crate::model::check_noise(model, noise)
}

/// Lazily evaluated Loynes sequence with memoized noise columns.
pub struct LoynesSequence<'a, C: Chain + ?Sized> {
    model: &'a C,
    noise: &'a NoiseField,
    star: State,
    /// `columns[j - 1]` drives the step from time `-j`.
    columns: Vec<Uniforms>,
    /// Running maxima of the workload random walk, when available.
    lindley: Option<Lindley>,
    values: HashMap<u64, State>,
    /// `(j, x) -> (state at time 0, whether s* is visited in (-j, 0])` for
    /// vertices already followed; later paths stop when they merge.
    vertices: HashMap<(u64, State), (State, bool)>,
}

struct Lindley {
    sum: i64,
    maxima: Vec<State>,
}

impl<'a, C: Chain + ?Sized> LoynesSequence<'a, C> {
    pub fn new(model: &'a C, noise: &'a NoiseField) -> Result<Self> {
        check_monotone(model, noise)?;
        let lindley = model.workload_laws().map(|_| Lindley {
            sum: 0,
            maxima: vec![0],
        });
        Ok(LoynesSequence {
            model,
            noise,
            star: model.reference_state(),
            columns: Vec::new(),
            lindley,
            values: HashMap::new(),
            vertices: HashMap::new(),
        })
    }

    fn column(&mut self, j: u64) -> Uniforms {
        while (self.columns.len() as u64) < j {
            let t = -(self.columns.len() as i64) - 1;
            self.columns.push(self.noise.noise_at(t, 0));
        }
        self.columns[(j - 1) as usize]
    }

    /// Distinct indices evaluated so far.
    pub fn evaluations(&self) -> u64 {
        self.values.len() as u64
    }

    /// `L_n`.
    pub fn value(&mut self, n: u64) -> State {
        if let Some(&v) = self.values.get(&n) {
            return v;
        }
        let v = if self.lindley.is_some() {
            self.lindley_value(n)
        } else {
            self.follow(n).0
        };
        self.values.insert(n, v);
        v
    }

    // L_n = max(0, S_1, ..., S_n) with S_k the sum of the increments at
    // times -1, ..., -k.
    fn lindley_value(&mut self, n: u64) -> State {
        let model: &'a C = self.model;
        let (service, interarrival) = model.workload_laws().expect("workload model");
        loop {
            let have = self.lindley.as_ref().expect("workload").maxima.len() as u64;
            if have > n {
                break;
            }
            let u = self.column(have);
            let inc = crate::distribution::sample_jump(service, u[0]) as i64
                - crate::distribution::sample_jump(interarrival, u[1]) as i64;
            let l = self.lindley.as_mut().expect("workload");
            l.sum = l.sum.saturating_add(inc);
            let prev = *l.maxima.last().expect("nonempty");
            l.maxima.push(prev.max(l.sum));
        }
        self.lindley.as_ref().expect("workload").maxima[n as usize]
    }

    /// Whether the path from `(-n, s*)` visits `s*` at some time in
    /// `(-n, 0]`.
    pub fn returns_before_zero(&mut self, n: u64) -> bool {
        self.follow(n).1
    }

    // Follows the path from (-n, s*) until it reaches time 0 or a vertex
    // already followed, then records the outcome on every vertex it passed.
    fn follow(&mut self, n: u64) -> (State, bool) {
        let mut trail = Vec::new();
        let mut x = self.star;
        let mut j = n;
        let (fin, mut hit) = loop {
            if j == 0 {
                break (x, false);
            }
            if let Some(&known) = self.vertices.get(&(j, x)) {
                break known;
            }
            trail.push((j, x));
            let u = self.column(j);
            x = self.model.transition(x, &u);
            j -= 1;
        };
        // walk back; `succ` is the successor of each trail vertex in turn
        let mut succ = x;
        for &(j, y) in trail.iter().rev() {
            hit = hit || succ == self.star;
            self.vertices.insert((j, y), (fin, hit));
            succ = y;
        }
        (fin, hit)
    }
}

/// The state at time 0 of the path started at `(-n, s*)`.
pub fn loynes_value<C: Chain + ?Sized>(model: &C, noise: &NoiseField, n: u64) -> Result<State> {
    Ok(LoynesSequence::new(model, noise)?.value(n))
}

/// Runs of `(L_n)_{0 <= n <= max_n}` with values at most `k`, stopping at
/// the first index whose value exceeds `k`.
pub fn record_decomposition<C: Chain + ?Sized>(
    model: &C,
    noise: &NoiseField,
    k: State,
    max_n: u64,
    strategy: SearchStrategy,
) -> Result<RecordDecomposition> {
    let mut seq = LoynesSequence::new(model, noise)?;
    Ok(decompose(&mut seq, k, max_n, strategy))
}

fn decompose<C: Chain + ?Sized>(
    seq: &mut LoynesSequence<'_, C>,
    k: State,
    max_n: u64,
    strategy: SearchStrategy,
) -> RecordDecomposition {
    let mut records = Vec::new();
    let mut start = 0u64;
    let mut terminal_index = None;
    loop {
        let v = seq.value(start);
        if v > k {
            terminal_index = Some(start);
            break;
        }
        // last index of the run of value `v` within the cap, and the next
        // index (if any, within the cap) with a larger value
        let (end, next) = match strategy {
            SearchStrategy::Linear => {
                let mut n = start;
                loop {
                    if n == max_n {
                        break (n, None);
                    }
                    if seq.value(n + 1) != v {
                        break (n, Some(n + 1));
                    }
                    n += 1;
                }
            }
            SearchStrategy::ExponentialSearch => {
                let mut lo = start;
                let mut step = 1u64;
                let hi = loop {
                    if lo == max_n {
                        break None;
                    }
                    let probe = start.saturating_add(step).min(max_n);
                    if seq.value(probe) != v {
                        break Some(probe);
                    }
                    lo = probe;
                    step = step.saturating_mul(2);
                };
                match hi {
                    None => (lo, None),
                    Some(mut hi) => {
                        while hi - lo > 1 {
                            let mid = lo + (hi - lo) / 2;
                            if seq.value(mid) == v {
                                lo = mid;
                            } else {
                                hi = mid;
                            }
                        }
                        (lo, Some(hi))
                    }
                }
            }
        };
        records.push(Record {
            value: v,
            index: start,
            run: end - start + 1,
        });
        match next {
            Some(n) => start = n,
            None => break,
        }
    }
    RecordDecomposition {
        records,
        status: if terminal_index.is_some() {
            SampleStatus::Exact
        } else {
            SampleStatus::Censored
        },
        terminal_index,
        evaluations: seq.evaluations(),
    }
}

/// The potential process on `[s*, k]`: each record value weighted by its
/// run length, the index 0 supplying the unit at `s*`.
pub fn sample_potential_pp<C: Chain + ?Sized>(
    model: &C,
    noise: &NoiseField,
    k: State,
    max_n: u64,
    strategy: SearchStrategy,
) -> Result<Sample> {
    let dec = record_decomposition(model, noise, k, max_n, strategy)?;
    let atoms = dec.records.iter().map(|r| (r.value, r.run)).collect();
    Ok(Sample {
        atoms,
        status: dec.status,
        depth_used: dec.depth_used(),
        records: dec.records,
    })
}

/// The taboo process on `[s*, k]`.
///
/// Each start `-n` with `L_n <= k` is followed forward and counted iff it
/// does not revisit `s*` before time 0. For the workload chain the count is
/// known to be one per record, and that shortcut is used instead.
pub fn sample_taboo_pp<C: Chain + ?Sized>(
    model: &C,
    noise: &NoiseField,
    k: State,
    max_n: u64,
) -> Result<Sample> {
    let mut seq = LoynesSequence::new(model, noise)?;
    let dec = decompose(&mut seq, k, max_n, SearchStrategy::ExponentialSearch);
    let atoms = if model.workload_laws().is_some() {
        taboo_from_records(&dec)
    } else {
        let mut m = CountingMeasure::delta(seq.star);
        for r in &dec.records {
            for n in r.index.max(1)..r.index + r.run {
                if !seq.returns_before_zero(n) {
                    m.add(r.value, 1);
                }
            }
        }
        m
    };
    Ok(Sample {
        atoms,
        status: dec.status,
        depth_used: dec.depth_used(),
        records: dec.records,
    })
}

/// Taboo sample on `[s*, k]` for any built-in model that supports one: the
/// forest construction for the renewal chain, records for monotone chains.
/// For the renewal chain `max_n` caps the window depth.
pub fn sample_taboo<C: Chain + ?Sized>(
    model: &C,
    noise: &NoiseField,
    k: State,
    max_n: u64,
) -> Result<Sample> {
    match model.renewal_jumps() {
        Some(dist) => {
            crate::model::check_noise(model, noise)?;
            let depth = crate::renewal::renewal_exact_depth(dist, k, crate::renewal::RENEWAL_EXACT_TOL)
                .map_or(max_n, |d| d.min(max_n));
            Ok(crate::renewal::renewal_taboo_sample(dist, noise, k, depth))
        }
        None => sample_taboo_pp(model, noise, k, max_n),
    }
}

/// Potential sample on `[s*, k]`; windowed at depth `max_n` for the renewal
/// chain, records otherwise.
pub fn sample_potential<C: Chain + ?Sized>(
    model: &C,
    noise: &NoiseField,
    k: State,
    max_n: u64,
    strategy: SearchStrategy,
) -> Result<Sample> {
    match model.renewal_jumps() {
        Some(dist) => {
            crate::model::check_noise(model, noise)?;
            Ok(crate::renewal::renewal_potential_sample(dist, noise, k, max_n))
        }
        None => sample_potential_pp(model, noise, k, max_n, strategy),
    }
}

/// One unit at each record value: the simple measure the record formula
/// predicts for the taboo process.
pub fn taboo_from_records(dec: &RecordDecomposition) -> CountingMeasure {
    dec.records.iter().map(|r| (r.value, 1)).collect()
}

/// Gap between successive record-creating start indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gap {
    pub length: u64,
    /// The next record was not seen before the cap.
    pub censored: bool,
}

/// Up to `n_events` gaps between successive record indices of `(L_n)`,
/// scanning `n <= max_n`. A final gap cut by the cap is flagged censored.
pub fn backward_gap_stats<C: Chain + ?Sized>(
    model: &C,
    noise: &NoiseField,
    n_events: usize,
    max_n: u64,
) -> Result<Vec<Gap>> {
    let mut seq = LoynesSequence::new(model, noise)?;
    let mut gaps = Vec::new();
    let mut last_record = 0u64;
    let mut best = seq.value(0);
    let mut n = 0u64;
    while gaps.len() < n_events {
        if n == max_n {
            gaps.push(Gap {
                length: max_n - last_record,
                censored: true,
            });
            break;
        }
        n += 1;
        let v = seq.value(n);
        if v > best {
            gaps.push(Gap {
                length: n - last_record,
                censored: false,
            });
            best = v;
            last_record = n;
        }
    }
    Ok(gaps)
}
