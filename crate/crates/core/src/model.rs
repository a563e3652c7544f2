//! Chain models driven by a [`NoiseField`].
//!
//! A model is a deterministic transition rule `h(x, u)` together with its
//! reference state `s*`. The built-in models are the renewal chain, the
//! lazy random walk on the integers, the reflected walk on the nonnegative
//! integers, and the GI/GI/1 workload chain `W' = (W + service - interarrival)^+`.

use std::fmt;
use std::str::FromStr;

use crate::distribution::{sample_jump, JumpDistribution};
use crate::error::{Error, Result};
use crate::noise::{CouplingMode, NoiseField};

/// A state of the chain. Signed so that walks on the integers fit.
pub type State = i64;

/// A time index of the Doeblin graph.
pub type Time = i64;

/// A Markov kernel realized as a deterministic function of uniforms.
pub trait Chain: Send + Sync {
    fn name(&self) -> String;

    /// The tagged state `s*`.
    fn reference_state(&self) -> State {
        0
    }

    /// Uniforms consumed by one transition.
    fn arity(&self) -> usize;

    /// `h(x, u)`. `u` has at least [`Chain::arity`] entries.
    fn transition(&self, x: State, u: &[f64]) -> State;

    /// Whether `x <= y` implies `h(x, u) <= h(y, u)` for every fixed `u`.
    fn is_monotone(&self) -> bool {
        false
    }

    /// Minimum of the state space, when it has one.
    fn min_state(&self) -> Option<State> {
        None
    }

    /// The jump law, when this is the renewal chain.
    fn renewal_jumps(&self) -> Option<&JumpDistribution> {
        None
    }

    /// `(service, interarrival)` laws, when this is the workload chain.
    fn workload_laws(&self) -> Option<(&JumpDistribution, &JumpDistribution)> {
        None
    }
}

/// One transition with an arity check.
pub fn step<C: Chain + ?Sized>(model: &C, x: State, u: &[f64]) -> Result<State> {
    if u.len() != model.arity() {
        return Err(Error::Usage(format!(
            "model {} takes {} uniforms per step, got {}",
            model.name(),
            model.arity(),
            u.len()
        )));
    }
    Ok(model.transition(x, u))
}

/// Checks that `noise` supplies enough uniforms for `model`.
pub(crate) fn check_noise<C: Chain + ?Sized>(model: &C, noise: &NoiseField) -> Result<()> {
    if noise.arity() < model.arity() {
        return Err(Error::Usage(format!(
            "noise field supplies {} uniforms but model {} needs {}",
            noise.arity(),
            model.name(),
            model.arity()
        )));
    }
    Ok(())
}

/// Advances `x` one step at time `t` using `noise`.
#[inline]
pub(crate) fn advance<C: Chain + ?Sized>(model: &C, noise: &NoiseField, t: Time, x: State) -> State {
    let u = noise.noise_at(t, x);
    model.transition(x, &u)
}

/// The built-in models.
#[derive(Clone, Debug, PartialEq)]
pub enum ChainModel {
    /// From `i > 0` go to `i - 1`; from `0` jump to `eta - 1`.
    Renewal(JumpDistribution),
    /// Stay, step up or step down with probability 1/3 each, on the integers.
    LazyWalk,
    /// On `{0, 1, ...}`: from 0 stay or go to 1, elsewhere step down or up,
    /// each with probability 1/2.
    ReflectedWalk,
    /// Workload before arrivals of a GI/GI/1 queue.
    Workload {
        service: JumpDistribution,
        interarrival: JumpDistribution,
    },
}

impl ChainModel {
    pub fn renewal(jumps: JumpDistribution) -> Result<Self> {
        if jumps.support_gcd() != 1 {
            return Err(Error::InvalidParameter(format!(
                "renewal jumps {} have support gcd {}; the chain would be periodic",
                jumps,
                jumps.support_gcd()
            )));
        }
        Ok(ChainModel::Renewal(jumps))
    }

    pub fn workload(service: JumpDistribution, interarrival: JumpDistribution) -> Self {
        ChainModel::Workload {
            service,
            interarrival,
        }
    }

    /// A noise field with this model's arity.
    pub fn noise(&self, seed: u64, mode: CouplingMode) -> NoiseField {
        NoiseField::new(seed, mode, self.arity())
    }

    /// Exact transition row from `x`, truncated to entries with probability
    /// above `min_prob`. Computed from the laws directly, independent of the
    /// uniform wiring in [`Chain::transition`].
    pub fn transition_row(&self, x: State, min_prob: f64) -> Vec<(State, f64)> {
        match self {
            ChainModel::Renewal(d) => {
                if x > 0 {
                    vec![(x - 1, 1.0)]
                } else {
                    let mut row = Vec::new();
                    let mut k = 1u64;
                    let mut mass = 0.0;
                    while mass < 1.0 - min_prob && k < 1 << 20 {
                        let p = d.pmf(k);
                        if p > min_prob {
                            row.push((k as State - 1, p));
                        }
                        mass += p;
                        k += 1;
                    }
                    row
                }
            }
            ChainModel::LazyWalk => vec![(x - 1, 1.0 / 3.0), (x, 1.0 / 3.0), (x + 1, 1.0 / 3.0)],
            ChainModel::ReflectedWalk => {
                if x == 0 {
                    vec![(0, 0.5), (1, 0.5)]
                } else {
                    vec![(x - 1, 0.5), (x + 1, 0.5)]
                }
            }
            ChainModel::Workload {
                service,
                interarrival,
            } => {
                let support = |d: &JumpDistribution| -> Vec<(i64, f64)> {
                    let mut v = Vec::new();
                    let mut k = 1u64;
                    let mut mass = 0.0;
                    while mass < 1.0 - 1e-15 && k < 1 << 16 {
                        let p = d.pmf(k);
                        if p > 0.0 {
                            v.push((k as i64, p));
                        }
                        mass += p;
                        k += 1;
                    }
                    v
                };
                let s = support(service);
                let a = support(interarrival);
                let mut acc = std::collections::BTreeMap::new();
                for &(ks, ps) in &s {
                    for &(ka, pa) in &a {
                        *acc.entry((x + ks - ka).max(0)).or_insert(0.0) += ps * pa;
                    }
                }
                acc.into_iter().filter(|&(_, p)| p > min_prob).collect()
            }
        }
    }
}

impl Chain for ChainModel {
    fn name(&self) -> String {
        self.to_string()
    }

    fn arity(&self) -> usize {
        match self {
            ChainModel::Workload { .. } => 2,
            _ => 1,
        }
    }

    #[inline]
    fn transition(&self, x: State, u: &[f64]) -> State {
        match self {
            ChainModel::Renewal(d) => {
                if x > 0 {
                    x - 1
                } else {
                    sample_jump(d, u[0]) as State - 1
                }
            }
            ChainModel::LazyWalk => {
                if u[0] < 1.0 / 3.0 {
                    x - 1
                } else if u[0] < 2.0 / 3.0 {
                    x
                } else {
                    x + 1
                }
            }
            ChainModel::ReflectedWalk => {
                if u[0] < 0.5 {
                    (x - 1).max(0)
                } else {
                    x + 1
                }
            }
            ChainModel::Workload {
                service,
                interarrival,
            } => {
                let s = sample_jump(service, u[0]) as State;
                let a = sample_jump(interarrival, u[1]) as State;
                (x + s - a).max(0)
            }
        }
    }

    fn is_monotone(&self) -> bool {
        !matches!(self, ChainModel::Renewal(_))
    }

    fn min_state(&self) -> Option<State> {
        match self {
            ChainModel::LazyWalk => None,
            _ => Some(0),
        }
    }

    fn renewal_jumps(&self) -> Option<&JumpDistribution> {
        match self {
            ChainModel::Renewal(d) => Some(d),
            _ => None,
        }
    }

    fn workload_laws(&self) -> Option<(&JumpDistribution, &JumpDistribution)> {
        match self {
            ChainModel::Workload {
                service,
                interarrival,
            } => Some((service, interarrival)),
            _ => None,
        }
    }
}

impl fmt::Display for ChainModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChainModel::Renewal(d) => write!(f, "renewal:{d}"),
            ChainModel::LazyWalk => f.write_str("lazyrw"),
            ChainModel::ReflectedWalk => f.write_str("reflectedrw"),
            ChainModel::Workload {
                service,
                interarrival,
            } => write!(f, "queue:{service}:{interarrival}"),
        }
    }
}

impl FromStr for ChainModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "lazyrw" => return Ok(ChainModel::LazyWalk),
            "reflectedrw" => return Ok(ChainModel::ReflectedWalk),
            _ => {}
        }
        if let Some(rest) = s.strip_prefix("renewal:") {
            return ChainModel::renewal(rest.parse()?);
        }
        if let Some(rest) = s.strip_prefix("queue:") {
            let parts: Vec<&str> = rest.split(':').collect();
            if parts.len() != 4 {
                return Err(Error::parse(
                    s,
                    "queue model is `queue:<kind>:<param>:<kind>:<param>`",
                ));
            }
            let service = format!("{}:{}", parts[0], parts[1]).parse()?;
            let interarrival = format!("{}:{}", parts[2], parts[3]).parse()?;
            return Ok(ChainModel::workload(service, interarrival));
        }
        Err(Error::parse(
            s,
            "model is one of renewal:<dist>, lazyrw, reflectedrw, queue:<dist>:<dist>",
        ))
    }
}
