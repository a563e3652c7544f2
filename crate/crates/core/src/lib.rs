//! Doeblin coupling of countable-state Markov chains.
//!
//! Every vertex `(t, x)` of the Doeblin graph points to `(t + 1, h(x, xi_t^x))`.
//! The paths started from `(t, s*)` form the bridge graph; at time zero they
//! sit on the S-set, and counting them with or without the "has not yet
//! returned to `s*`" restriction gives the taboo and potential point
//! processes. This crate builds those objects on finite windows, runs the
//! one-step taboo and potential updates, perfectly samples both processes
//! for monotone chains, and estimates the invariant measure they encode.
//!
//! ```
//! use doeblin::{ChainModel, CouplingMode, bridge::build_bridge, bridge::multiplicities, DynamicsKind};
//!
//! let model: ChainModel = "renewal:geo:0.5".parse().unwrap();
//! let noise = model.noise(7, CouplingMode::TotallyIndependent);
//! let graph = build_bridge(&model, &noise, -200, 1).unwrap();
//! let taboo = multiplicities(&graph, 0, DynamicsKind::Taboo).unwrap();
//! assert_eq!(taboo.get(0), 1);
//! ```

pub mod bridge;
pub mod cli;
pub mod distribution;
pub mod dynamics;
pub mod error;
pub mod estimators;
pub mod measure;
pub mod model;
pub mod noise;
pub mod renewal;
pub mod sampler;

pub use distribution::{sample_jump, DistributionSpec, JumpDistribution, Mean};
pub use dynamics::{iterate_dynamics, potential_step, taboo_step, DynamicsKind};
pub use error::{Error, Result};
pub use measure::CountingMeasure;
pub use model::{step, Chain, ChainModel, State, Time};
pub use noise::{derive_seed, CouplingMode, NoiseField, Uniforms};
