//! Steady-state transfer of multi-photon wavepackets through quantum linear
//! systems.
//!
//! The crate is `no_std` and needs only `alloc`. Enabling `parallel` pulls in
//! `std` and rayon and spreads the per-axis convolutions across threads.
//!
//! Layout:
//! - [`sysmodel`]: realization, impulse responses, transfer functions
//! - [`photonstate`]: pulse classes, CCR inner products, correlation kernels
//! - [`transferengine`]: input to output pulse maps in time and frequency
//! - [`intensity`]: time-resolved output intensity of distinct-channel inputs
//! - [`oracles`]: closed-form references for the worked examples
#![no_std]

extern crate alloc;
#[cfg(any(test, feature = "std"))]
extern crate std;

pub mod error;
pub mod fft;
pub mod grid;
pub mod intensity;
pub mod linalg;
pub mod oracles;
pub mod photonstate;
pub mod sysmodel;
pub mod transferengine;

mod par;

pub use error::{Error, Result};
pub use grid::TimeGrid;
pub use linalg::{CMat, C64};

pub use photonstate::{FunctionPulse, MultiplicityPulse, ProductSumPulse, TensorPulse};
pub use sysmodel::{Realization, SlhParams, Tolerances};
pub use transferengine::{TransferMode, TransferOptions};

