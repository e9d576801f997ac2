//! Bell violation, adversary guessing probability and measurement-dependence
//! trade-offs for CHSH-based randomness expansion.
//!
//! The exact model layer ([`model`], [`optimal_models`]) and the polynomial
//! bounds are generic over [`Scalar`], so they run in `f64` for numerics and in
//! [`num_rational::Rational64`] where identities should hold exactly. The
//! aliases below fix the scalar for the common cases.

pub mod bounds;
pub mod curves;
mod error;
pub mod lp;
pub mod model;
pub mod optimal_models;
pub mod oracle;
pub mod quantum;
pub mod scalar;
pub mod simulate;

pub use bounds::{BiasedDistribution, BoundBranch, Mode};
pub use error::{Error, Result};
pub use model::{ChshBox, Component, HiddenVariableModel, ModelReport, SettingsDistribution};
pub use scalar::{Real, Scalar};

pub type Box64 = ChshBox<f64>;
pub type Settings64 = SettingsDistribution<f64>;
pub type Model64 = HiddenVariableModel<f64>;
pub type Distribution64 = BiasedDistribution<f64>;

pub type ExactBox = ChshBox<num_rational::Rational64>;
pub type ExactModel = HiddenVariableModel<num_rational::Rational64>;
