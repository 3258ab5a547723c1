#![no_std]
//! Generalized Toda lattice: state representations, Lax pairs, flows,
//! Poisson structure and bilinear (tau-function) residuals.

extern crate alloc;
#[cfg(test)]
extern crate std;

mod math;

pub mod bilinear;
pub mod dynamics;
pub mod error;
pub mod lax;
pub mod matrix;
pub mod model;
pub mod poisson;

pub use error::{Error, Result};
pub use matrix::Mat;
pub use model::State;
