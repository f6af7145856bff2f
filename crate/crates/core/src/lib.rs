//! Threshold dynamics (MBO) for curve shortening flow in the plane with a
//! positive three-Gaussian kernel that makes the scheme second-order
//! accurate in time while keeping it unconditionally monotone.
//!
//! The crate is organised bottom-up:
//!
//! * [`kernel`] builds and certifies the convolution kernel `K = Σ c_j G_{α_j}`.
//! * [`consistency`] evaluates the Taylor-expansion algebra of one scheme step
//!   in two and three dimensions.
//! * [`evolve`] runs the convolution/threshold iteration on circles, periodic
//!   graphs and periodic grids.
//! * [`benchmark`] provides reference solutions (shrinking circle, finite
//!   differences for the graph equation).
//! * [`harness`] drives the convergence experiments and tabulates errors.
//! * [`io`] holds the plain-text and raster file formats.

pub mod benchmark;
pub mod consistency;
pub mod error;
pub mod evolve;
pub mod harness;
pub mod io;
pub mod kernel;
pub mod quad;
pub mod roots;

pub use error::{Error, Result};
pub use kernel::KernelSpec;
