//! The taboo and potential updates on counting measures.
//!
//! Both push every unit of mass one step along the Doeblin graph at time
//! `t`. The taboo update then discards whatever landed on `s*` and puts a
//! single unit there; the potential update keeps it and adds one unit.

use serde::{Deserialize, Serialize};

use crate::measure::CountingMeasure;
use crate::model::{advance, check_noise, Chain, State, Time};
use crate::noise::NoiseField;
use crate::error::Result;

/// Which of the two measure-valued dynamics to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DynamicsKind {
    Taboo,
    Potential,
}

fn push_forward<C: Chain + ?Sized>(
    m: &CountingMeasure,
    model: &C,
    noise: &NoiseField,
    t: Time,
) -> CountingMeasure {
    let moved: Vec<(State, u64)> = if noise.mode().is_shared() {
        let u = noise.noise_at(t, 0);
        m.iter().map(|(x, c)| (model.transition(x, &u), c)).collect()
    } else {
        m.iter().map(|(x, c)| (advance(model, noise, t, x), c)).collect()
    };
    CountingMeasure::from_unsorted(moved)
}

/// One step of the taboo dynamics with noise column `t`.
pub fn taboo_step<C: Chain + ?Sized>(
    m: &CountingMeasure,
    model: &C,
    noise: &NoiseField,
    t: Time,
) -> Result<CountingMeasure> {
    check_noise(model, noise)?;
    let star = model.reference_state();
    let mut out = push_forward(m, model, noise, t);
    out.set(star, 1);
    Ok(out)
}

/// One step of the potential dynamics with noise column `t`.
pub fn potential_step<C: Chain + ?Sized>(
    m: &CountingMeasure,
    model: &C,
    noise: &NoiseField,
    t: Time,
) -> Result<CountingMeasure> {
    check_noise(model, noise)?;
    let mut out = push_forward(m, model, noise, t);
    out.add(model.reference_state(), 1);
    Ok(out)
}

/// Applies `n_steps` updates of `kind` using noise columns `t0, t0 + 1, ...`.
pub fn iterate_dynamics<C: Chain + ?Sized>(
    m0: &CountingMeasure,
    kind: DynamicsKind,
    model: &C,
    noise: &NoiseField,
    t0: Time,
    n_steps: u64,
) -> Result<CountingMeasure> {
    let mut m = m0.clone();
    for k in 0..n_steps {
        let t = t0 + k as Time;
        m = match kind {
            DynamicsKind::Taboo => taboo_step(&m, model, noise, t)?,
            DynamicsKind::Potential => potential_step(&m, model, noise, t)?,
        };
    }
    Ok(m)
}
