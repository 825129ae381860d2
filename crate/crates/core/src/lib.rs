//! Volatility forecasting by blending ARCH-family models.
//!
//! The crate fits a zoo of ARCH, GARCH, EGARCH and GJR models by maximum
//! likelihood, turns their one-step variance forecasts into a feature matrix,
//! selects weakly correlated features, blends them by OLS or a small neural
//! network, optionally nudges the blend with the efficiency ratio of the
//! realized-variance proxy, and scores everything against SVR-GARCH and a
//! persistence baseline with RMSE, MAE and the Diebold-Mariano test.

pub mod arch_family;
pub mod augmentation;
pub mod blending;
pub mod error;
pub mod evaluation;
pub mod feature_bank;
pub mod innovations;
pub mod market_data;
pub mod optim;
pub mod pipeline;
pub mod svr_baseline;

pub use error::{Error, Result};
