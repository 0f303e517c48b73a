//! Numerical stability analysis of approximate homomorphisms between
//! finite-dimensional C*-ternary rings, organised around the Trif
//! functional equation.
//!
//! The crate is generic over the real scalar ([`Real`], implemented for
//! `f32` and `f64`); the aliases at the crate root fix it to `f64`.

pub mod axioms;
pub mod control;
pub mod error;
pub mod hyers;
pub mod map;
pub mod noise;
pub mod sampling;
pub mod scalar;
pub mod scenario;
pub mod spectral;
pub mod subsets;
pub mod ternary;
pub mod trif;
pub mod verify;

pub use control::{BoundVariant, ControlFunction};
pub use error::{Error, Result};
pub use hyers::{extract_map, iterate, IterationSettings};
pub use map::{FnMap, TernaryMap};
pub use sampling::ScalarDomain;
pub use scalar::Real;
pub use ternary::Shape;
pub use trif::TrifParams;

/// Version of this library.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Double-precision ring element.
pub type Element = ternary::RingElement<f64>;
/// Single-precision ring element.
pub type Element32 = ternary::RingElement<f32>;
/// Double-precision complex scalar.
pub type C64 = num_complex::Complex<f64>;
/// Double-precision scenario map.
pub type Scenario = scenario::MapUnderTest<f64>;
/// Double-precision extracted map.
pub type Extracted = hyers::ExtractedMap<f64>;
