//! Path signature toolkit: compute truncated signatures of piecewise linear
//! paths and invert them back into paths.
//!
//! The crate is organised around one pipeline:
//!
//! * [`tensor`] holds the dense truncated tensor algebra that signatures
//!   live in.
//! * [`path`] and [`signature`] build signatures of polylines and rescale
//!   their levels onto a common footing.
//! * [`insertion`] recovers a direction of travel from two consecutive
//!   normalised levels, and recovers both increments of a two-piece path.
//! * [`bounds`] quantifies how well insertion can do: measured gaps, a
//!   closed-form upper bound, norm decay on a lattice path, and a
//!   development-based lower bound witness.
//! * [`reconstruct`] runs insertion across a grid of clock times and
//!   integrates the estimated derivatives into a polyline.
//! * [`dataio`] parses point lists and pen trajectories and round-trips
//!   signature files.

pub mod bounds;
pub mod dataio;
pub mod error;
pub mod insertion;
pub mod path;
pub mod reconstruct;
pub mod signature;
pub mod tensor;

pub use error::{Error, Result};
pub use path::{PiecewiseLinearPath, UnitVector};
pub use tensor::{level_norm, tensor_product, NormKind, TensorBlock, TruncatedTensorSeries};
