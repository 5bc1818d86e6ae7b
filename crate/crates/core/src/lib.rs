//! Chordal Loewner chains on the right half-plane and the quasiconformal
//! extensions they produce.
//!
//! The crate is organised bottom-up:
//!
//! * [`jets`]: order-4 truncated Taylor arithmetic, the carrier of exact derivatives.
//! * [`maps`]: a catalog of analytic maps behind the [`maps::ConformalMap`] trait,
//!   registered by name in a [`maps::MapRegistry`].
//! * [`schwarz`]: pre-Schwarzian/Schwarzian derivatives and boundary-strip norms.
//! * [`loewner`]: the explicit chain `h_t`, its Herglotz field and RK4 evolution.
//! * [`extension`]: reflected extensions over the imaginary axis and their dilatation.
//! * [`carleson`]: Carleson box functionals for area densities on either half-plane.

pub mod carleson;
pub mod error;
pub mod extension;
pub mod jets;
pub mod loewner;
pub mod maps;
#[cfg(test)]
mod oracle;
pub mod real;
pub mod report;
pub mod schwarz;

pub use error::{Error, Result};
pub use jets::Jet;
pub use real::{Dd, C64};
