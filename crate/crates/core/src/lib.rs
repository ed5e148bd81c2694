//! Privacy accounting for hyper-parameter tuning under differential privacy.
//!
//! Generic code is parameterised by a [`Real`] scalar; the aliases at the
//! crate root fix it to `f64`.

// `!(x > a)` is used on purpose so that NaN fails domain checks
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod accountant;
pub mod audit;
pub mod calibration;
pub mod discrete;
pub mod error;
pub mod numeric;
pub mod rdp;
pub mod runcount;
pub mod scalar;
pub mod serde_float;
pub mod special;
pub mod tradeoff;

pub use error::{Error, Result};
pub use scalar::{Field, Rational, Real};

pub type TradeoffCurve = tradeoff::TradeoffCurve<f64>;
pub type RunCountDist = runcount::RunCountDist<f64>;
pub type RunCountSpec = runcount::RunCountSpec<f64>;
pub type DpSgdConfig = tradeoff::DpSgdConfig<f64>;
pub type AccountantReport = accountant::AccountantReport<f64>;
pub type BoundsRow = accountant::BoundsRow<f64>;

pub type TradeoffCurveF32 = tradeoff::TradeoffCurve<f32>;
pub type RunCountDistF32 = runcount::RunCountDist<f32>;
