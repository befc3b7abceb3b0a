pub mod error;
pub mod fbm;
pub mod func;
pub mod kernels;
pub mod laplace;
pub mod numerics;
pub mod ops;
pub mod verify;

/// Crate version, echoed in emitted sidecars.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use error::{Error, Result};
pub use func::{Decay, RealFn, Smoothness};
