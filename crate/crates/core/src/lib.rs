//! Special flows over irrational rotations with power-singularity roofs,
//! time changes of linear flows on the 2-torus, and prime-weighted orbit sums.
//!
//! The numerical core (roofs, Birkhoff sums, the special flow) is generic over
//! [`Scalar`]; the aliases at the bottom of this file fix it to `f64`, which is
//! what the experiment layer uses. Continued-fraction data is exact
//! (arbitrary-precision integers and rationals) and circle points on rotation
//! orbits are stepped in 128-bit fixed point ([`Phase`]).

pub mod error;
pub mod experiment;
pub mod flow;
pub mod observables;
pub mod phase;
pub mod primes;
pub mod quadrature;
pub mod reparam;
pub mod roof;
pub mod rotation;
pub mod scalar;
pub mod summation;

pub use error::{Error, Result};
pub use phase::Phase;
pub use scalar::Scalar;

pub use flow::{FlowPoint, FlowStep, SpecialFlow};
pub use primes::{PhaseCoefficients, PrimeTable};
pub use reparam::{ReparamFlow, TorusPoint};
pub use roof::{CircleFn, FourierRoof, PowerRoof, Roof, RoofFunction, TimeChange};
pub use rotation::{OstrowskiExpansion, RotationNumber};

/// Power-singularity roof in double precision.
pub type PowerRoof64 = PowerRoof<f64>;
/// Fourier roof in double precision.
pub type FourierRoof64 = FourierRoof<f64>;
/// Roof enum in double precision.
pub type RoofFunction64 = RoofFunction<f64>;
/// Special-flow point in double precision.
pub type FlowPoint64 = FlowPoint<f64>;
/// Power-singularity roof in single precision.
pub type PowerRoof32 = PowerRoof<f32>;
