//! Inter-user channel correlation for massive MIMO planar arrays.
//!
//! Channels are synthesized from a multipath model with correlated path
//! angles ([`synth`]), compared against the closed-form and asymptotic
//! correlation kernels ([`theory`]), and measured data is summarized with
//! the estimators in [`estimation`] over the container in [`dataset`].

pub mod dataset;
pub mod error;
pub mod estimation;
pub mod geometry;
pub mod rng;
pub mod synth;
pub mod synthetic;
pub mod theory;

pub use error::{Error, Result};
pub use geometry::{steering_vector, subsample_square, ArrayGeometry, ChannelVector, SteeringAngles};
pub use rng::RngStream;
pub use theory::{CorrelationEstimate, EstimateKind};
