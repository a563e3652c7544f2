//! Integer-valued counting measures on the state space.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::model::State;

/// A finite counting measure: a sparse map `state -> multiplicity` with no
/// zero entries.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CountingMeasure {
    atoms: BTreeMap<State, u64>,
}

impl CountingMeasure {
    pub fn new() -> Self {
        Self::default()
    }

    /// Unit mass at `state`.
    pub fn delta(state: State) -> Self {
        let mut m = Self::new();
        m.add(state, 1);
        m
    }

    pub fn from_pairs<I: IntoIterator<Item = (State, u64)>>(pairs: I) -> Self {
        let mut m = Self::new();
        for (s, c) in pairs {
            m.add(s, c);
        }
        m
    }

    /// Builds from pairs in any order, merging repeated states. Sorts once
    /// and bulk-loads, which beats repeated insertion on wide measures.
    pub(crate) fn from_unsorted(mut pairs: Vec<(State, u64)>) -> Self {
        pairs.sort_unstable_by_key(|p| p.0);
        let mut merged: Vec<(State, u64)> = Vec::with_capacity(pairs.len());
        for (s, c) in pairs {
            match merged.last_mut() {
                Some(last) if last.0 == s => last.1 += c,
                _ if c > 0 => merged.push((s, c)),
                _ => {}
            }
        }
        CountingMeasure {
            atoms: merged.into_iter().collect(),
        }
    }

    pub fn add(&mut self, state: State, count: u64) {
        if count > 0 {
            *self.atoms.entry(state).or_insert(0) += count;
        }
    }

    /// Overwrites the multiplicity at `state`; zero removes the atom.
    pub fn set(&mut self, state: State, count: u64) {
        if count == 0 {
            self.atoms.remove(&state);
        } else {
            self.atoms.insert(state, count);
        }
    }

    pub fn get(&self, state: State) -> u64 {
        self.atoms.get(&state).copied().unwrap_or(0)
    }

    pub fn total_mass(&self) -> u64 {
        self.atoms.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    /// Atoms in increasing state order.
    pub fn iter(&self) -> impl Iterator<Item = (State, u64)> + '_ {
        self.atoms.iter().map(|(&s, &c)| (s, c))
    }

    pub fn support(&self) -> Vec<State> {
        self.atoms.keys().copied().collect()
    }

    /// Restriction to `lo <= state <= hi`.
    pub fn restrict(&self, lo: State, hi: State) -> Self {
        CountingMeasure {
            atoms: self.atoms.range(lo..=hi).map(|(&s, &c)| (s, c)).collect(),
        }
    }

    /// Mass of the open interval `(lo, hi)`.
    pub fn mass_between(&self, lo: State, hi: State) -> u64 {
        if hi <= lo + 1 {
            return 0;
        }
        self.atoms.range(lo + 1..hi).map(|(_, &c)| c).sum()
    }

    /// Pointwise `self <= other`.
    pub fn le(&self, other: &CountingMeasure) -> bool {
        self.iter().all(|(s, c)| c <= other.get(s))
    }

    pub fn max_state(&self) -> Option<State> {
        self.atoms.keys().next_back().copied()
    }

    /// Writes `state,count` rows with a header line.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "state,count")?;
        for (s, c) in self.iter() {
            writeln!(out, "{s},{c}")?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct Atom {
    state: State,
    count: u64,
}

impl Serialize for CountingMeasure {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter().map(|(state, count)| Atom { state, count }))
    }
}

impl<'de> Deserialize<'de> for CountingMeasure {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let atoms = Vec::<Atom>::deserialize(deserializer)?;
        Ok(CountingMeasure::from_pairs(
            atoms.into_iter().map(|a| (a.state, a.count)),
        ))
    }
}

impl FromIterator<(State, u64)> for CountingMeasure {
    fn from_iter<I: IntoIterator<Item = (State, u64)>>(iter: I) -> Self {
        CountingMeasure::from_pairs(iter)
    }
}
