//! Reactive transport with crystal dissolution and precipitation in a
//! periodically perforated domain: the resolved microscale model, periodic
//! cell problems for the effective coefficients, the homogenized model and
//! tools to compare them.

// validation uses `!(x > 0.0)` so that NaN is rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cell_solver;
pub mod cli;
pub mod config;
pub mod data;
pub mod error;
pub mod geometry;
pub mod io;
pub mod kinetics;
pub mod linalg;
pub mod mac;
pub mod macro_solver;
pub mod micro;
pub mod upscaling;

pub use error::{Error, Result};
