//! Convex minorants of Lévy process paths: hull construction, stick-breaking
//! samplers, invariant path transforms and Monte Carlo checks of their laws.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bridge;
pub mod csv;
pub mod error;
pub mod minorant;
pub mod models;
pub mod path;
pub mod quadrature;
pub mod rng;
pub mod stats;
pub mod sticks;
pub mod transforms;
pub mod verify;

pub use error::{Error, Result};
pub use minorant::{convex_minorant, Face, MinorantDecomposition};
pub use models::{LevyModel, ModelSpec};
pub use path::GridPath;
pub use rng::RngStream;
pub use sticks::{FacePoint, StickBreak};
