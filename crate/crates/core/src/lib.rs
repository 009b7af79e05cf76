//! Exact plan-time analysis of small zero-sum partially observable
//! stochastic games: sufficient statistics over joint action-observation
//! histories, their value functions, best-response value vectors, and
//! executable checks of the value structure.
//!
//! All numeric types are generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the scalar for common use.

pub mod bg;
pub mod checks;
pub mod error;
pub mod model;
pub mod nosg;
pub mod oracle;
pub mod posg;
pub mod rng;
pub mod scalar;
pub mod suite;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Posg64 = model::PosgModel<f64>;
pub type Posg32 = model::PosgModel<f32>;
pub type Bg64 = model::BayesianGame<f64>;
pub type Bg32 = model::BayesianGame<f32>;
pub type BgFamily64 = model::BgFamily<f64>;
pub type BgFamily32 = model::BgFamily<f32>;
pub type JointDist64 = model::JointDist<f64>;
pub type Statistic64 = posg::Statistic<f64>;
pub type Statistic32 = posg::Statistic<f32>;
pub type DecisionRule64 = model::DecisionRule<f64>;
pub type PartialPolicy64 = model::PartialPolicy<f64>;
pub type ValueVector64 = bg::ValueVector<f64>;
pub type MatrixGame64 = oracle::MatrixGame<f64>;
pub type MatrixGame32 = oracle::MatrixGame<f32>;
pub type GameFile64 = model::GameFile<f64>;
