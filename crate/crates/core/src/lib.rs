//! Numerical tools for boundary homeomorphisms of the unit circle: dyadic
//! energies, Poisson-extension energies, log-kernel energies, Orlicz
//! machinery and chord-arc constants of planar domains.

pub mod analysis;
pub mod chordarc;
pub mod circle_map;
pub mod dyadic;
pub mod energy;
pub mod error;
pub mod logkernel;
pub mod numeric;
pub mod orlicz;
pub mod poisson;

pub use error::{Error, Result};
