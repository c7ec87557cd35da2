//! Numerical laboratory for the non-intersecting Poisson bus-route model.
//!
//! Buses on a line (or a circle) move as rate-1 Poisson walkers conditioned
//! never to collide. Their arrival times at a fixed stop form a Jacobi
//! unitary ensemble and their positions at a fixed time a Krawtchouk
//! ensemble; after unfolding, local statistics approach the GUE sine-kernel
//! laws. The crate provides the exact finite-size formulas, exact samplers,
//! GUE reference curves and the statistics pipeline that compares them.

// `!(x > 0.0)` style guards also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod circle;
pub mod equilibrium;
pub mod error;
pub mod experiment;
pub mod model_line;
pub mod multitime;
pub mod numeric;
pub mod orthopoly;
pub mod par;
pub mod rmt_reference;
pub mod rng;
pub mod sampler;
pub mod stats;

pub use error::{Error, Result};
pub use model_line::{ArrivalTimes, ModelParams, PositionConfig};
pub use numeric::LogValue;
pub use par::Execution;
pub use rng::Seed;
