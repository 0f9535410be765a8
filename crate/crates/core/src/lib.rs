//! Solver and simulator for the n-player ordered-lock acquisition race.
//!
//! `n` players race to acquire `M` ordered locks before a deadline `T`.
//! Each player controls the rate of its Poisson contact clock (bounded by a
//! per-player cap) and pays for accumulated acceleration; a lock pays out only
//! to the player that was first on it and on every lock before it.  Players
//! observe their own contacts only, so a player may keep paying for a lock
//! that is already lost.
//!
//! The crate computes the unique Nash equilibrium of this race within the
//! class of M-threshold strategies, and then attacks the result from three
//! independent directions:
//!
//! * [`recursion`] builds, per player, the continuation values and the
//!   thresholds for locks `2..=M` by a backward value recursion,
//! * [`equilibrium`] closes the loop on the first-lock thresholds with a
//!   damped Gauss-Seidel fixed-point iteration over best responses, plus
//!   large-horizon closed forms for cross-checking,
//! * [`simulate`] replays the race by seeded Monte Carlo, and
//! * [`oracle`] verifies the structural facts (bang-bang optimality,
//!   mass-shift dominance, cost identity, state-scaling) on discretized
//!   open-loop controls by exhaustive enumeration at desk scale.
//!
//! All numerics are generic over the scalar type through [`Real`]; use the
//! `*64` aliases at the crate root for ordinary double-precision work.

pub mod battery;
pub mod equilibrium;
pub mod model;
pub mod oracle;
mod quad;
pub mod recursion;
pub mod simulate;

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Scalar type for all solver arithmetic: `f32` or `f64`.
pub trait Real:
    'static + Send + Sync + Float + FloatConst + NumAssign + FromPrimitive + Sum + Debug + Display + LowerExp
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Converts an `f64` literal to the working scalar type.
#[inline]
pub(crate) fn real<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("literal representable in scalar type")
}

pub use equilibrium::{
    AsymptoticBranch, AsymptoticEquilibrium, DeviationReport, EquilibriumResult, SolveError,
    SolveOptions,
};
pub use model::{
    eta_first_lock, GameConfig, MTStrategy, PlayerParams, PlayerState, SampledFunction,
    StrategyProfile, ThresholdPolicy,
};
pub use recursion::ContinuationValues;
pub use simulate::{EpisodeOutcome, PayoffEstimate, PlayerOutcome, StopReason};

/// Double-precision aliases for the common entry points.
pub type GameConfig64 = GameConfig<f64>;
pub type StrategyProfile64 = StrategyProfile<f64>;
pub type EquilibriumResult64 = EquilibriumResult<f64>;
pub type SampledFunction64 = SampledFunction<f64>;
