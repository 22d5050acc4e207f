//! Twisted conjugacies and invariant tori of near-integrable Hamiltonians on
//! `T^n x R^n`, computed with truncated Fourier series and action jets.
//!
//! Everything numeric is generic over [`scalar::Real`]; the aliases below fix
//! the scalar for the common cases.

pub mod error;
pub mod fourier;
pub mod herman;
pub mod interpolation;
pub mod jet;
pub mod kolmogorov;
pub mod linalg;
pub mod multi_index;
pub mod random;
pub mod ode;
pub mod scalar;
pub mod serial;
pub mod small_divisors;
pub mod suite;
pub mod symplectic;

pub use error::{KamError, Result};
pub use scalar::Real;

pub type Series = fourier::FourierSeries<f64>;
pub type Series32 = fourier::FourierSeries<f32>;
pub type Jet = jet::ActionJet<f64>;
pub type Jet32 = jet::ActionJet<f32>;
pub type TorusMap = symplectic::TorusMap<f64>;
pub type Symplectomorphism = symplectic::FiberedSymplectomorphism<f64>;
pub type Conjugacy = herman::TwistedConjugacy<f64>;
pub type Torus = kolmogorov::InvariantTorus<f64>;
