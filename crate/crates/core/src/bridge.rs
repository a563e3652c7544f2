//! Windowed bridge graphs: the union of the paths started from `(t, s*)`.
//!
//! A [`BridgeGraph`] over `[t_min, t_max]` stores one sparse column per time,
//! holding only the occupied states. Paths that meet are stored once from
//! the meeting point on, so memory is the number of distinct vertices, not
//! the number of (start, time) pairs.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;

use crate::dynamics::DynamicsKind;
use crate::error::{Error, Result};
use crate::measure::CountingMeasure;
use crate::model::{advance, check_noise, Chain, State, Time};
use crate::noise::NoiseField;

/// Default cap on stored vertices for [`build_bridge`].
pub const DEFAULT_VERTEX_BUDGET: usize = 50_000_000;

/// The path of the chain started at `(start, s*)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Path {
    pub start: Time,
    /// States at times `start, start + 1, ..., horizon`.
    pub states: Vec<State>,
    /// First time strictly after `start` at which the path is at `s*`.
    pub first_return: Option<Time>,
}

impl Path {
    pub fn state_at(&self, t: Time) -> Option<State> {
        let i = t.checked_sub(self.start)?;
        usize::try_from(i).ok().and_then(|i| self.states.get(i).copied())
    }
}

/// Follows the path from `(start, s*)` up to time `horizon`.
pub fn trace_path<C: Chain + ?Sized>(
    model: &C,
    noise: &NoiseField,
    start: Time,
    horizon: Time,
) -> Result<Path> {
    if start >= horizon {
        return Err(Error::Usage(format!(
            "path start {start} must precede horizon {horizon}"
        )));
    }
    check_noise(model, noise)?;
    let star = model.reference_state();
    let mut states = Vec::with_capacity((horizon - start + 1) as usize);
    let mut x = star;
    let mut first_return = None;
    states.push(x);
    for t in start..horizon {
        x = advance(model, noise, t, x);
        states.push(x);
        if x == star && first_return.is_none() {
            first_return = Some(t + 1);
        }
    }
    Ok(Path {
        start,
        states,
        first_return,
    })
}

/// A vertex of a bridge graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Vertex {
    /// State at the next time, or `None` in the last column.
    pub next: Option<State>,
    /// Number of window starts whose path occupies this vertex, the start
    /// at this vertex included.
    pub starts: u64,
    /// Those starts whose path has not visited `s*` since leaving it.
    pub unreturned: u64,
}

/// The union of the paths from `(t, s*)`, `t_min <= t <= t_max`, truncated at
/// `t_max`. The start at `t_max` is the lone vertex `(t_max, s*)`.
#[derive(Clone, Debug)]
pub struct BridgeGraph {
    t_min: Time,
    t_max: Time,
    star: State,
    columns: Vec<BTreeMap<State, Vertex>>,
}

/// Builds the bridge graph on `[t_min, t_max]` with the default vertex budget.
pub fn build_bridge<C: Chain + ?Sized>(
    model: &C,
    noise: &NoiseField,
    t_min: Time,
    t_max: Time,
) -> Result<BridgeGraph> {
    build_bridge_with_budget(model, noise, t_min, t_max, DEFAULT_VERTEX_BUDGET)
}

/// Builds the bridge graph, failing once more than `budget` vertices would
/// be stored.
pub fn build_bridge_with_budget<C: Chain + ?Sized>(
    model: &C,
    noise: &NoiseField,
    t_min: Time,
    t_max: Time,
    budget: usize,
) -> Result<BridgeGraph> {
    if t_min >= t_max {
        return Err(Error::Usage(format!(
            "bridge window [{t_min}, {t_max}] is empty"
        )));
    }
    check_noise(model, noise)?;
    let star = model.reference_state();
    let len = (t_max - t_min + 1) as usize;
    let mut columns: Vec<BTreeMap<State, Vertex>> = Vec::with_capacity(len);
    let mut first = BTreeMap::new();
    first.insert(
        star,
        Vertex {
            next: None,
            starts: 1,
            unreturned: 1,
        },
    );
    columns.push(first);
    let mut stored = 1usize;
    let shared = noise.mode().is_shared();
    for t in t_min..t_max {
        let col = columns.last_mut().expect("at least one column");
        let mut next_col: BTreeMap<State, Vertex> = BTreeMap::new();
        let common = shared.then(|| noise.noise_at(t, 0));
        for (&x, v) in col.iter_mut() {
            let y = match &common {
                Some(u) => model.transition(x, u),
                None => advance(model, noise, t, x),
            };
            v.next = Some(y);
            let w = next_col.entry(y).or_insert(Vertex {
                next: None,
                starts: 0,
                unreturned: 0,
            });
            w.starts += v.starts;
            if y != star {
                w.unreturned += v.unreturned;
            }
        }
        let s = next_col.entry(star).or_insert(Vertex {
            next: None,
            starts: 0,
            unreturned: 0,
        });
        s.starts += 1;
        s.unreturned = 1;
        stored += next_col.len();
        if stored > budget {
            return Err(Error::Resource(format!(
                "bridge graph exceeds {budget} vertices at column t = {}",
                t + 1
            )));
        }
        columns.push(next_col);
    }
    Ok(BridgeGraph {
        t_min,
        t_max,
        star,
        columns,
    })
}

impl BridgeGraph {
    pub fn window(&self) -> (Time, Time) {
        (self.t_min, self.t_max)
    }

    pub fn reference_state(&self) -> State {
        self.star
    }

    fn check_time(&self, at: Time) -> Result<usize> {
        if at < self.t_min || at > self.t_max {
            return Err(Error::Usage(format!(
                "time {at} outside the bridge window [{}, {}]",
                self.t_min, self.t_max
            )));
        }
        Ok((at - self.t_min) as usize)
    }

    /// The occupied vertices at time `at`, in increasing state order.
    pub fn column(&self, at: Time) -> Result<&BTreeMap<State, Vertex>> {
        Ok(&self.columns[self.check_time(at)?])
    }

    pub fn vertex(&self, t: Time, x: State) -> Option<&Vertex> {
        let i = self.check_time(t).ok()?;
        self.columns[i].get(&x)
    }

    /// State reached at `t + 1` by the path leaving `(t, s*)`.
    pub fn jump_at(&self, t: Time) -> Option<State> {
        self.vertex(t, self.star).and_then(|v| v.next)
    }

    pub fn vertex_count(&self) -> usize {
        self.columns.iter().map(BTreeMap::len).sum()
    }

    /// Per-start view of column `at`: for each window start `s < at`, the
    /// state of its path at `at` and whether it visited `s*` in `(s, at]`.
    /// Computed by following successor links backward from `at`, without
    /// the aggregated counts stored on vertices.
    pub fn start_positions(&self, at: Time) -> Result<Vec<(Time, State, bool)>> {
        let end = self.check_time(at)?;
        let mut ahead: HashMap<State, (State, bool)> = self.columns[end]
            .keys()
            .map(|&x| (x, (x, false)))
            .collect();
        let mut out = Vec::with_capacity(end);
        for i in (0..end).rev() {
            let mut here = HashMap::with_capacity(self.columns[i].len());
            for (&x, v) in &self.columns[i] {
                let y = v.next.expect("interior vertices have a successor");
                let (fin, seen) = ahead[&y];
                here.insert(x, (fin, seen || y == self.star));
            }
            let (fin, seen) = here[&self.star];
            out.push((self.t_min + i as Time, fin, seen));
            ahead = here;
        }
        out.reverse();
        Ok(out)
    }

    /// Writes one row per vertex:
    /// `time,state,parent_time,parent_state,n_starts_through,taboo_flag`.
    /// The parent is the vertex the edge points to; it is empty in the last
    /// column.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "time,state,parent_time,parent_state,n_starts_through,taboo_flag"
        )?;
        for (i, col) in self.columns.iter().enumerate() {
            let t = self.t_min + i as Time;
            for (x, v) in col {
                match v.next {
                    Some(y) => write!(out, "{t},{x},{},{y}", t + 1)?,
                    None => write!(out, "{t},{x},,")?,
                }
                writeln!(out, ",{},{}", v.starts, u8::from(v.unreturned > 0))?;
            }
        }
        Ok(())
    }
}

/// States occupied at time `at`; always contains `s*`.
pub fn s_set(bridge: &BridgeGraph, at: Time) -> Result<Vec<State>> {
    Ok(bridge.column(at)?.keys().copied().collect())
}

/// Windowed taboo or potential multiplicities at column `at`, counting the
/// starts `t_min <= s < at` one by one plus the unit at `(at, s*)`.
///
/// A start counts toward the taboo measure iff its first return to `s*`
/// after leaving it comes strictly after `at`.
pub fn multiplicities(bridge: &BridgeGraph, at: Time, kind: DynamicsKind) -> Result<CountingMeasure> {
    let mut m = CountingMeasure::delta(bridge.star);
    for (_, y, returned) in bridge.start_positions(at)? {
        if kind == DynamicsKind::Potential || !returned {
            m.add(y, 1);
        }
    }
    Ok(m)
}

/// First-return times of the paths from `(t, s*)` over a window.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecurrenceTimes {
    pub t_min: Time,
    pub t_max: Time,
    pub horizon_cap: u64,
    /// `(T_t, censored)` for `t = t_min, ..., t_max - 1`; a censored entry
    /// holds the cap.
    pub times: Vec<(u64, bool)>,
}

impl RecurrenceTimes {
    pub fn get(&self, t: Time) -> Option<(u64, bool)> {
        let i = usize::try_from(t.checked_sub(self.t_min)?).ok()?;
        self.times.get(i).copied()
    }

    pub fn censored_fraction(&self) -> f64 {
        let c = self.times.iter().filter(|x| x.1).count();
        c as f64 / self.times.len().max(1) as f64
    }

    /// Mean over uncensored entries, with their count.
    pub fn mean_uncensored(&self) -> (f64, usize) {
        let (sum, n) = self
            .times
            .iter()
            .filter(|x| !x.1)
            .fold((0.0, 0usize), |(s, n), x| (s + x.0 as f64, n + 1));
        (if n > 0 { sum / n as f64 } else { f64::NAN }, n)
    }
}

/// `T_t` for each start `t_min <= t < t_max`, censored at `horizon_cap`.
///
/// For the renewal chain the descent after a jump is deterministic, so
/// `T_t` is read off the jump; other chains are traced step by step.
pub fn recurrence_times<C: Chain + ?Sized>(
    model: &C,
    noise: &NoiseField,
    t_min: Time,
    t_max: Time,
    horizon_cap: u64,
) -> Result<RecurrenceTimes> {
    if horizon_cap == 0 {
        return Err(Error::Usage("horizon cap must be at least 1".into()));
    }
    if t_min >= t_max {
        return Err(Error::Usage(format!("window [{t_min}, {t_max}) is empty")));
    }
    check_noise(model, noise)?;
    let star = model.reference_state();
    let renewal = model.renewal_jumps().is_some();
    let times = (t_min..t_max)
        .map(|t| {
            if renewal {
                let landed = advance(model, noise, t, star);
                let r = (landed as u64).saturating_add(1);
                return if r > horizon_cap { (horizon_cap, true) } else { (r, false) };
            }
            let mut x = star;
            for k in 1..=horizon_cap {
                x = advance(model, noise, t + k as Time - 1, x);
                if x == star {
                    return (k, false);
                }
            }
            (horizon_cap, true)
        })
        .collect();
    Ok(RecurrenceTimes {
        t_min,
        t_max,
        horizon_cap,
        times,
    })
}
