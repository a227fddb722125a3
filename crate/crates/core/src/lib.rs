//! Numerical laboratory for even-degree Liénard systems `x' = y - F(x)`, `y' = -x`.
//!
//! Two halves share this crate. [`bounds`] evaluates the explicit
//! limit-cycle bound and each of its intermediate constants in log space.
//! [`dynamics`], [`cycles`] and [`verifier`] integrate the system, compute
//! return maps on the positive `y` axis, enumerate cycles, and check every
//! inequality that the bound relies on by dense sampling.

pub mod bounds;
pub mod cycles;
pub mod dynamics;
pub mod error;
pub mod integrator;
pub mod logspace;
pub mod polynomial;
pub mod verifier;

pub use bounds::{BoundReport, SystemParams};
pub use cycles::{CycleRecord, CycleSet, Stability};
pub use dynamics::{Direction, PlaneState, PolarState, ReturnConfig, ReturnResult, Trajectory};

pub use error::{Error, Result};
pub use logspace::{LogLogValue, LogValue};
pub use polynomial::PolynomialSpec;
pub use verifier::{CheckResult, VerificationReport};

