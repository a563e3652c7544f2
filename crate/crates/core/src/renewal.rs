//! The renewal family forest and its coupling with the renewal bridge graph.
//!
//! Vertex `i` of the forest has one outgoing edge to `i + eta_i` with
//! `eta_i` i.i.d. Under the coupling used here `eta_t` is the jump drawn by
//! the renewal chain at `(t, 0)` plus one, which is the time the bridge path
//! from `(t, 0)` takes to return to the axis. Edges that jump over 0 are then
//! in bijection with the nonzero S-set states.
//!
//! Connectivity of the forest is probed with the oscillating walk: for two
//! walks along the forest, advancing whichever is behind, the difference
//! `Z = X' - X` moves by `-eta` from `Z >= 0` and by `+eta` from `Z < 0`, and
//! the walks meet exactly when `Z` hits 0.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bridge::BridgeGraph;
use crate::distribution::{sample_jump, JumpDistribution};
use crate::error::{Error, Result};
use crate::measure::CountingMeasure;
use crate::model::{State, Time};
use crate::noise::NoiseField;
use crate::sampler::{Sample, SampleStatus};

/// An integer window `[t_min, t_max]` with one edge length per vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EffGraph {
    t_min: Time,
    lengths: Vec<u64>,
}

impl EffGraph {
    pub fn from_lengths(t_min: Time, lengths: Vec<u64>) -> Result<Self> {
        if lengths.is_empty() {
            return Err(Error::Usage("empty family-forest window".into()));
        }
        if lengths.contains(&0) {
            return Err(Error::InvalidParameter("edge lengths must be at least 1".into()));
        }
        Ok(EffGraph { t_min, lengths })
    }

    pub fn window(&self) -> (Time, Time) {
        (self.t_min, self.t_min + self.lengths.len() as Time - 1)
    }

    pub fn len(&self) -> usize {
        self.lengths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lengths.is_empty()
    }

    /// `eta_i`, for `i` in the window.
    pub fn length(&self, i: Time) -> Option<u64> {
        let k = usize::try_from(i.checked_sub(self.t_min)?).ok()?;
        self.lengths.get(k).copied()
    }

    /// `(i, i + eta_i)` for every vertex of the window.
    pub fn edges(&self) -> impl Iterator<Item = (Time, Time)> + '_ {
        self.lengths
            .iter()
            .enumerate()
            .map(|(k, &l)| {
                let i = self.t_min + k as Time;
                (i, i.saturating_add(l as Time))
            })
    }
}

/// Edge lengths for `t_min..=t_max`, vertex `i` using the uniform of noise
/// column `(i, 0)`.
pub fn sample_eff(
    dist: &JumpDistribution,
    t_min: Time,
    t_max: Time,
    noise: &NoiseField,
) -> Result<EffGraph> {
    if t_min > t_max {
        return Err(Error::Usage(format!("window [{t_min}, {t_max}] is empty")));
    }
    let lengths = (t_min..=t_max)
        .map(|i| sample_jump(dist, noise.uniform(i, 0, 0)))
        .collect();
    EffGraph::from_lengths(t_min, lengths)
}

/// The forest coupled to a renewal bridge graph: the edge at `t` has length
/// one more than the state the path from `(t, 0)` jumps to.
pub fn couple_bridge_eft(bridge: &BridgeGraph) -> Result<EffGraph> {
    let (t_min, t_max) = bridge.window();
    if bridge.reference_state() != 0 {
        return Err(Error::Usage("renewal bridge must use s* = 0".into()));
    }
    let mut lengths = Vec::with_capacity((t_max - t_min) as usize);
    for t in t_min..t_max {
        // every vertex above 0 of a renewal bridge descends by one
        for (&x, v) in bridge.column(t)? {
            if x > 0 && v.next != Some(x - 1) {
                return Err(Error::Usage(format!(
                    "bridge vertex ({t}, {x}) does not descend; not a renewal bridge"
                )));
            }
        }
        let jump = bridge.jump_at(t).expect("interior axis vertex has a successor");
        lengths.push(jump as u64 + 1);
    }
    EffGraph::from_lengths(t_min, lengths)
}

/// Edges `(i, i + eta_i)` with `i < 0 < i + eta_i`.
pub fn flying_edges(eff: &EffGraph) -> Result<Vec<(Time, Time)>> {
    let (a, b) = eff.window();
    if a >= 0 || b < -1 {
        return Err(Error::Usage(format!(
            "window [{a}, {b}] does not reach both sides of 0"
        )));
    }
    Ok(eff.edges().filter(|&(i, j)| i < 0 && j > 0).collect())
}

/// Number of window vertices whose forward orbit reaches `vertex`, capped.
/// Returns `(count, censored)`.
pub fn descendant_count(eff: &EffGraph, vertex: Time, cap: u64) -> Result<(u64, bool)> {
    let (a, b) = eff.window();
    if vertex < a || vertex > b {
        return Err(Error::Usage(format!(
            "vertex {vertex} outside window [{a}, {b}]"
        )));
    }
    let span = (vertex - a) as usize;
    // reaches[k]: vertex a + k has `vertex` on its forward orbit
    let mut reaches = vec![false; span];
    let mut count = 0u64;
    for k in (0..span).rev() {
        let i = a + k as Time;
        let j = i.saturating_add(eff.lengths[k] as Time);
        let hit = j == vertex || (j < vertex && reaches[(j - a) as usize]);
        reaches[k] = hit;
        if hit {
            count += 1;
            if count >= cap {
                return Ok((cap, true));
            }
        }
    }
    Ok((count, false))
}

/// Smallest window depth `d` with `k * P(eta > d + 1) <= tol`: starts before
/// `-d` then land in `[1, k]` with probability at most `tol`.
pub fn renewal_exact_depth(dist: &JumpDistribution, k: State, tol: f64) -> Option<u64> {
    if let Some(b) = dist.max_support() {
        return Some(b);
    }
    let k = k.max(1) as f64;
    let mut d = 1u64;
    while k * dist.tail(d + 1) > tol {
        d = d.checked_mul(2)?;
        if d > 1 << 40 {
            return None;
        }
    }
    // shrink to the smallest such depth
    let (mut lo, mut hi) = (d / 2, d);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if k * dist.tail(mid + 1) > tol {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(hi)
}

/// Tail probability below which a renewal taboo sample is reported exact.
pub const RENEWAL_EXACT_TOL: f64 = 1e-15;

fn renewal_lengths(dist: &JumpDistribution, noise: &NoiseField, depth: u64) -> Vec<u64> {
    // lengths[n - 1] = eta at time -n
    (1..=depth)
        .map(|n| sample_jump(dist, noise.uniform(-(n as Time), 0, 0)))
        .collect()
}

/// Taboo process of the renewal chain on `[0, k]` from the starts
/// `-depth, ..., -1`: the start at `t` sits at `t + eta_t` at time 0 and has
/// not yet returned iff that is positive.
///
/// The sample is reported exact when starts before `-depth` reach `[1, k]`
/// with probability at most [`RENEWAL_EXACT_TOL`] (always, for bounded jumps
/// once `depth` covers the support).
pub fn renewal_taboo_sample(
    dist: &JumpDistribution,
    noise: &NoiseField,
    k: State,
    depth: u64,
) -> Sample {
    let lengths = renewal_lengths(dist, noise, depth);
    let mut atoms = CountingMeasure::delta(0);
    for (idx, &eta) in lengths.iter().enumerate() {
        let y = (eta as i64).saturating_sub(idx as i64 + 1);
        if y >= 1 && y <= k {
            atoms.add(y, 1);
        }
    }
    let exact = renewal_exact_depth(dist, k, RENEWAL_EXACT_TOL).is_some_and(|d| depth >= d);
    Sample {
        atoms,
        status: if exact {
            SampleStatus::Exact
        } else {
            SampleStatus::Censored
        },
        depth_used: depth,
        records: Vec::new(),
    }
}

/// Potential process of the renewal chain on `[0, k]` from the starts
/// `-depth, ..., -1`, always a windowed value. A start follows its orbit
/// `t -> t + eta_t` until it reaches `[0, inf)`; it then sits at that point
/// at time 0.
pub fn renewal_potential_sample(
    dist: &JumpDistribution,
    noise: &NoiseField,
    k: State,
    depth: u64,
) -> Sample {
    let lengths = renewal_lengths(dist, noise, depth);
    // land[n - 1]: where the orbit from -n first reaches [0, inf)
    let mut land = vec![0i64; depth as usize];
    let mut atoms = CountingMeasure::delta(0);
    for n in 1..=depth as usize {
        let y = (lengths[n - 1] as i64).saturating_sub(n as i64);
        land[n - 1] = if y >= 0 { y } else { land[(-y) as usize - 1] };
        if land[n - 1] <= k {
            atoms.add(land[n - 1], 1);
        }
    }
    Sample {
        atoms,
        status: SampleStatus::Censored,
        depth_used: depth,
        records: Vec::new(),
    }
}

/// One step of the oscillating walk: `z + jump` from `z < 0`, `z - jump`
/// from `z >= 0`.
#[inline]
pub fn oscillating_step(dist: &JumpDistribution, z: i64, u: f64) -> i64 {
    let jump = sample_jump(dist, u) as i64;
    if z < 0 {
        z.saturating_add(jump)
    } else {
        z.saturating_sub(jump)
    }
}

/// Jump law, starting separation and horizon of an oscillating walk.
#[derive(Clone, Debug)]
pub struct OscillatingWalkSpec {
    pub dist: JumpDistribution,
    pub z0: i64,
    pub horizon: u64,
}

impl OscillatingWalkSpec {
    /// First `n <= horizon` with `Z_n = 0`, step `n` using the uniform of
    /// noise column `(n - 1, 0)`.
    pub fn hitting_time(&self, noise: &NoiseField) -> Option<u64> {
        let mut z = self.z0;
        for n in 1..=self.horizon {
            z = oscillating_step(&self.dist, z, noise.uniform(n as Time - 1, 0, 0));
            if z == 0 {
                return Some(n);
            }
        }
        None
    }

    /// Cross-check: runs the two forest walks from `0` and `z0` directly,
    /// always advancing the one behind, with the same jumps. Returns the
    /// number of jumps made before they occupy the same vertex.
    pub fn two_walk_meeting_time(&self, noise: &NoiseField) -> Option<u64> {
        let (mut a, mut b) = (0i64, self.z0);
        for n in 1..=self.horizon {
            let jump = sample_jump(&self.dist, noise.uniform(n as Time - 1, 0, 0)) as i64;
            if a <= b {
                a = a.saturating_add(jump);
            } else {
                b = b.saturating_add(jump);
            }
            if a == b {
                return Some(n);
            }
        }
        None
    }
}

/// Meeting frequency with a normal-approximation 95% interval.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeetingEstimate {
    pub z0: i64,
    pub horizon: u64,
    pub trials: u64,
    pub meetings: u64,
    pub frequency: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Fraction of `trials` in which the oscillating walk from `z0` hits 0
/// within `horizon` steps. Trial `i` uses `noise.replicate(i)`.
pub fn meeting_experiment(
    dist: &JumpDistribution,
    z0: i64,
    horizon: u64,
    trials: u64,
    noise: &NoiseField,
) -> Result<MeetingEstimate> {
    if z0 <= 0 {
        return Err(Error::Usage(format!("separation must be positive, got {z0}")));
    }
    if trials == 0 {
        return Err(Error::Usage("at least one trial is needed".into()));
    }
    let spec = OscillatingWalkSpec {
        dist: dist.clone(),
        z0,
        horizon,
    };
    let meetings = (0..trials)
        .into_par_iter()
        .filter(|&i| spec.hitting_time(&noise.replicate(i)).is_some())
        .count() as u64;
    let p = meetings as f64 / trials as f64;
    let half = 1.96 * (p * (1.0 - p) / trials as f64).sqrt();
    Ok(MeetingEstimate {
        z0,
        horizon,
        trials,
        meetings,
        frequency: p,
        ci_low: (p - half).max(0.0),
        ci_high: (p + half).min(1.0),
    })
}
